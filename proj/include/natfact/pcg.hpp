#pragma once

#include "natfact/preconditioner.hpp"

#include <span>
#include <vector>

namespace natfact {

struct PcgConfig {
  double rel_tolerance = 1e-8;
  int max_iterations = 500;

  /// Throws std::invalid_argument unless 0 < tol < 1 and max_iterations >= 1.
  void validate() const;
};

struct SolveReport {
  VectorXd solution;  // CR block, then curl block
  int iterations = 0;
  double condition_estimate = 1.0;
  double contrast = 1.0;
  bool converged = false;
  /// sqrt(r_k^T M^{-1} r_k) for k = 0..iterations.
  std::vector<double> residual_history;
  std::vector<double> alphas;
  std::vector<double> betas;
};

/// PCG on the block system with M = H^T D H as preconditioner. The stopping
/// test is sqrt(r^T M^{-1} r) <= tol * sqrt(r0^T M^{-1} r0). Hitting the
/// iteration cap is reported through `converged`, not thrown.
SolveReport pcg_solve(const BlockOperator& op, const HFactorization& f,
                      const Eigen::Ref<const VectorXd>& rhs, const PcgConfig& cfg = {});

/// Extreme-eigenvalue ratio of the Lanczos tridiagonal built from the CG step
/// lengths `alphas` (k entries) and directions updates `betas` (k-1 entries,
/// extra trailing entries are ignored).
double estimate_condition(std::span<const double> alphas, std::span<const double> betas);

}  // namespace natfact
