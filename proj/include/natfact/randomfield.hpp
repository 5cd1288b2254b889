#pragma once

#include "natfact/linalg.hpp"
#include "natfact/mesh.hpp"

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace natfact {

enum class KernelKind { gaussian, matern };

/// Stationary covariance with unit variance.
///  - gaussian: exp(-|x-y|^2 / 2); no length scale, `ell` is ignored.
///  - matern:   half-integer smoothness nu in {0.5, 1.5, 2.5}, length `ell`.
struct CovarianceKernel {
  KernelKind kind = KernelKind::gaussian;
  double nu = 0.5;
  double ell = 1.0;

  static CovarianceKernel gaussian() { return {KernelKind::gaussian, 0.5, 1.0}; }
  static CovarianceKernel matern(double nu, double ell);

  void validate() const;
  bool operator==(const CovarianceKernel&) const = default;
};

std::string to_string(KernelKind k);
KernelKind parse_kernel_kind(const std::string& s);

double kernel_eval(const CovarianceKernel& k, const Point& x, const Point& y);
/// Same kernel as a function of the distance r >= 0.
double kernel_eval_distance(const CovarianceKernel& k, double r);

/// Truncated Karhunen-Loeve expansion on triangle barycenters (Nystrom with
/// area weights). Modes are orthonormal in the weighted inner product
/// <u, v>_W = sum_T |T| u_T v_T.
struct KlExpansion {
  CovarianceKernel kernel;
  int terms = 0;
  VectorXd eigenvalues;      // descending, negatives clipped to 0
  VectorXd raw_eigenvalues;  // before clipping
  MatrixXd modes;            // N_T x terms
  std::vector<Point> sample_points;
  VectorXd weights;
};

KlExpansion build_kl(const Mesh& m, const CovarianceKernel& k, int terms);

/// Seeded standard normals: std::mt19937_64 feeding the Box-Muller
/// transform, consumed in pairs. Bit-reproducible for a given seed.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : engine_(seed) {}
  double next();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

struct FieldSample {
  VectorXd kappa;  // per triangle, strictly positive
  double contrast = 1.0;
  VectorXd xi;
};

FieldSample sample_field(const KlExpansion& kl, std::uint64_t seed);
/// Sample from explicit KL coordinates (length = kl.terms).
FieldSample sample_field_from_xi(const KlExpansion& kl, const Eigen::Ref<const VectorXd>& xi);

/// One kappa_T per line after a "kappa" header, triangle order, 17 digits.
void write_field_csv(std::ostream& os, std::span<const double> kappa);
void write_field_csv(const std::string& path, std::span<const double> kappa);
std::vector<double> read_field_csv(std::istream& is);
std::vector<double> read_field_csv(const std::string& path);

}  // namespace natfact
