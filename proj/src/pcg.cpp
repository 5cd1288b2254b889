#include "natfact/pcg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace natfact {

void PcgConfig::validate() const {
  if (!(rel_tolerance > 0.0 && rel_tolerance < 1.0))
    throw std::invalid_argument("pcg: tolerance must lie in (0, 1)");
  if (max_iterations < 1) throw std::invalid_argument("pcg: max_iterations must be at least 1");
}

double estimate_condition(std::span<const double> alphas, std::span<const double> betas) {
  const auto k = static_cast<Eigen::Index>(alphas.size());
  if (k == 0) throw std::invalid_argument("estimate_condition: no iterations recorded");
  if (static_cast<Eigen::Index>(betas.size()) < k - 1)
    throw std::invalid_argument("estimate_condition: too few beta coefficients");

  VectorXd diag(k);
  VectorXd sub(std::max<Eigen::Index>(k - 1, 0));
  for (Eigen::Index j = 0; j < k; ++j) {
    diag(j) = 1.0 / alphas[j];
    if (j > 0) diag(j) += betas[j - 1] / alphas[j - 1];
    if (j + 1 < k) sub(j) = std::sqrt(betas[j]) / alphas[j];
  }
  if (k == 1) return 1.0;

  Eigen::SelfAdjointEigenSolver<MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  const double lo = ev.minCoeff();
  const double hi = ev.maxCoeff();
  if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
  return std::max(1.0, hi / lo);
}

SolveReport pcg_solve(const BlockOperator& op, const HFactorization& f,
                      const Eigen::Ref<const VectorXd>& rhs, const PcgConfig& cfg) {
  cfg.validate();
  detail::require_dims(rhs.size() == op.size() && f.size() == op.size(), "pcg_solve");
  const CoefficientDiagonal& d = op.diagonal();

  SolveReport rep;
  rep.contrast = d.contrast();
  rep.solution = VectorXd::Zero(rhs.size());
  if (rhs.isZero(0.0)) {
    rep.converged = true;
    rep.residual_history.push_back(0.0);
    return rep;
  }

  VectorXd& x = rep.solution;
  VectorXd r = rhs;
  VectorXd z = apply_minv(f, d, r);
  double rz = r.dot(z);
  const double norm0 = std::sqrt(std::abs(rz));
  const double target = cfg.rel_tolerance * norm0;
  rep.residual_history.push_back(norm0);
  VectorXd p = z;

  for (int k = 1; k <= cfg.max_iterations; ++k) {
    const VectorXd q = apply_block(op, p);
    const double alpha = rz / p.dot(q);
    x.noalias() += alpha * p;
    r.noalias() -= alpha * q;
    z = apply_minv(f, d, r);
    const double rz_next = r.dot(z);
    const double norm = std::sqrt(std::abs(rz_next));
    rep.alphas.push_back(alpha);
    rep.residual_history.push_back(norm);
    rep.iterations = k;
    if (norm <= target) {
      rep.converged = true;
      break;
    }
    const double beta = rz_next / rz;
    rep.betas.push_back(beta);
    p = z + beta * p;
    rz = rz_next;
  }
  rep.condition_estimate = estimate_condition(rep.alphas, rep.betas);
  return rep;
}

}  // namespace natfact
