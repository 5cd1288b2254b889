#pragma once

#include "natfact/operators.hpp"
#include "natfact/pcg.hpp"
#include "natfact/preconditioner.hpp"
#include "natfact/randomfield.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace natfact {

/// Right-hand side f of -div(kappa grad u) = f.
struct ForcingSpec {
  enum class Kind { constant, sine };
  Kind kind = Kind::constant;
  double value = 1.0;  // constant level

  /// "const:<v>" or "sine" (f = 2 pi^2 sin(pi x) sin(pi y)).
  static ForcingSpec parse(const std::string& s);
  std::string to_string() const;
  ScalarField function() const;
  bool operator==(const ForcingSpec&) const = default;
};

/// Offset separating reference-solution seeds from realization seeds.
inline constexpr std::uint64_t kReferenceSeedOffset = std::uint64_t{1} << 32;

struct McConfig {
  int n = 20;
  CovarianceKernel kernel = CovarianceKernel::gaussian();
  int terms = 15;
  int realizations = 100;
  std::uint64_t base_seed = 0;
  ForcingSpec forcing;
  PcgConfig pcg;
  FactorMethod method = FactorMethod::lu;
  /// Forces every KL coordinate to zero (kappa == 1); test hook.
  bool zero_xi = false;

  void validate() const;
};

struct RealizationRecord {
  std::uint64_t seed = 0;
  int iterations = 0;
  double condition = 1.0;
  double contrast = 1.0;
  bool converged = false;
};

struct McSummary {
  int realizations = 0;
  double mean_condition = 0.0, var_condition = 0.0;
  double mean_iterations = 0.0, var_iterations = 0.0;
  double mean_contrast = 0.0, var_contrast = 0.0;
  int nonconverged = 0;
  VectorXd mean_solution;  // CR block, length N_e
  std::optional<double> h1_error;
  std::vector<RealizationRecord> records;
};

/// Monte Carlo over seeds base_seed + i, i = 0..R-1. Sample variances use the
/// R-1 divisor and are 0 when R = 1. The result does not depend on `threads`.
McSummary run_mc(const McConfig& cfg, const HFactorization& f, const KlExpansion& kl,
                 int threads = 1);

/// Unit-coefficient broken H1 seminorm of u - u_ref.
double broken_h1_error(const Mesh& m, const Eigen::Ref<const VectorXd>& u,
                       const Eigen::Ref<const VectorXd>& u_ref);
double broken_h1_error(const SparseXd& g_cr, const Eigen::Ref<const VectorXd>& u,
                       const Eigen::Ref<const VectorXd>& u_ref);

/// Monte Carlo mean with `ref_terms` KL terms and `ref_realizations` samples,
/// seeded from base_seed + seed_offset.
VectorXd reference_solution(const McConfig& cfg, const HFactorization& f, int ref_terms,
                            int ref_realizations, std::uint64_t seed_offset = kReferenceSeedOffset,
                            int threads = 1);

nlohmann::json config_to_json(const McConfig& cfg);
McConfig config_from_json(const nlohmann::json& j);
nlohmann::json summary_to_json(const McConfig& cfg, const McSummary& s);

/// seed,iterations,condition,contrast,converged
void write_records_csv(std::ostream& os, const std::vector<RealizationRecord>& records);
void write_records_csv(const std::string& path, const std::vector<RealizationRecord>& records);

}  // namespace natfact
