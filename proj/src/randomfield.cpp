#include "natfact/randomfield.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace natfact {

CovarianceKernel CovarianceKernel::matern(double nu, double ell) {
  CovarianceKernel k{KernelKind::matern, nu, ell};
  k.validate();
  return k;
}

void CovarianceKernel::validate() const {
  if (kind == KernelKind::gaussian) return;
  if (nu != 0.5 && nu != 1.5 && nu != 2.5)
    throw std::invalid_argument("matern kernel: nu must be 0.5, 1.5 or 2.5");
  if (!(ell > 0.0) || !std::isfinite(ell))
    throw std::invalid_argument("matern kernel: ell must be positive");
}

std::string to_string(KernelKind k) { return k == KernelKind::gaussian ? "gaussian" : "matern"; }

KernelKind parse_kernel_kind(const std::string& s) {
  if (s == "gaussian") return KernelKind::gaussian;
  if (s == "matern") return KernelKind::matern;
  throw std::invalid_argument("unknown covariance kernel: " + s);
}

double kernel_eval_distance(const CovarianceKernel& k, double r) {
  if (k.kind == KernelKind::gaussian) return std::exp(-0.5 * r * r);
  k.validate();
  const double s = r / k.ell;
  if (k.nu == 0.5) return std::exp(-s);
  if (k.nu == 1.5) {
    const double a = std::sqrt(3.0) * s;
    return (1.0 + a) * std::exp(-a);
  }
  const double a = std::sqrt(5.0) * s;
  return (1.0 + a + 5.0 * s * s / 3.0) * std::exp(-a);
}

double kernel_eval(const CovarianceKernel& k, const Point& x, const Point& y) {
  return kernel_eval_distance(k, (x - y).norm());
}

KlExpansion build_kl(const Mesh& m, const CovarianceKernel& k, int terms) {
  k.validate();
  const int nt = m.num_triangles();
  if (terms < 1 || terms > nt)
    throw std::invalid_argument("build_kl: term count must lie in [1, N_T]");

  VectorXd sqrt_w(nt);
  for (int i = 0; i < nt; ++i) sqrt_w(i) = std::sqrt(m.areas[i]);

  // Only the lower triangle is referenced by the eigensolver; fill both so
  // the symmetry check in symmetric_eigen sees an exactly symmetric matrix.
  MatrixXd s(nt, nt);
  for (int j = 0; j < nt; ++j) {
    s(j, j) = m.areas[j] * kernel_eval(k, m.barycenters[j], m.barycenters[j]);
    for (int i = j + 1; i < nt; ++i) {
      const double v = sqrt_w(i) * kernel_eval(k, m.barycenters[i], m.barycenters[j]) * sqrt_w(j);
      s(i, j) = v;
      s(j, i) = v;
    }
  }
  const auto eig = symmetric_eigen<double>(s);

  KlExpansion kl;
  kl.kernel = k;
  kl.terms = terms;
  kl.raw_eigenvalues = eig.eigenvalues.head(terms);
  kl.eigenvalues = kl.raw_eigenvalues.cwiseMax(0.0);
  kl.modes = sqrt_w.cwiseInverse().asDiagonal() * eig.eigenvectors.leftCols(terms);
  kl.sample_points = m.barycenters;
  kl.weights = sqrt_w.cwiseAbs2();
  return kl;
}

double NormalStream::next() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  constexpr double scale = 0x1.0p-53;
  const double u1 = static_cast<double>((engine_() >> 11) + 1) * scale;  // (0, 1]
  const double u2 = static_cast<double>(engine_() >> 11) * scale;        // [0, 1)
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

FieldSample sample_field_from_xi(const KlExpansion& kl, const Eigen::Ref<const VectorXd>& xi) {
  detail::require_dims(xi.size() == kl.terms, "sample_field_from_xi");
  FieldSample out;
  out.xi = xi;
  const VectorXd log_kappa = kl.modes * (kl.eigenvalues.cwiseSqrt().cwiseProduct(xi));
  out.kappa = log_kappa.array().exp();
  out.contrast = out.kappa.maxCoeff() / out.kappa.minCoeff();
  return out;
}

FieldSample sample_field(const KlExpansion& kl, std::uint64_t seed) {
  NormalStream normals(seed);
  VectorXd xi(kl.terms);
  for (int i = 0; i < kl.terms; ++i) xi(i) = normals.next();
  return sample_field_from_xi(kl, xi);
}

void write_field_csv(std::ostream& os, std::span<const double> kappa) {
  os << "kappa\n" << std::setprecision(17);
  for (double k : kappa) os << k << '\n';
}

void write_field_csv(const std::string& path, std::span<const double> kappa) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  write_field_csv(os, kappa);
}

std::vector<double> read_field_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("field csv: empty input");
  std::vector<double> out;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ls(line);
    double v = 0.0;
    std::string rest;
    if (!(ls >> v) || (ls >> rest))
      throw std::runtime_error("field csv: malformed value on line " + std::to_string(lineno));
    if (!std::isfinite(v) || v <= 0.0)
      throw std::runtime_error("field csv: nonpositive or nonfinite value on line " +
                               std::to_string(lineno));
    out.push_back(v);
  }
  return out;
}

std::vector<double> read_field_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open for reading: " + path);
  return read_field_csv(is);
}

}  // namespace natfact
