#pragma once

#include "natfact/linalg.hpp"
#include "natfact/operators.hpp"

#include <Eigen/SparseLU>

#include <atomic>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <variant>

namespace natfact {

enum class FactorMethod { lu, qr, sparse_lu };

std::string to_string(FactorMethod m);
/// Accepts "lu", "qr", "sparse-lu" (or "sparse_lu").
FactorMethod parse_factor_method(const std::string& s);

/// H = [G_cr  C_tilde], square of size 2 N_T, factored once at construction.
/// H does not depend on the coefficient, so one instance serves every
/// realization. Immutable after construction; `solve` is safe to call from
/// several threads at once.
class HFactorization {
 public:
  HFactorization(std::shared_ptr<const NaturalFactors> factors, FactorMethod method);

  const NaturalFactors& factors() const { return *factors_; }
  std::shared_ptr<const NaturalFactors> factors_ptr() const { return factors_; }
  FactorMethod method() const { return method_; }
  Eigen::Index size() const { return h_.rows(); }

  const SparseXd& h() const { return h_; }
  MatrixXd dense_h() const { return MatrixXd(h_); }

  /// H x = b, or H^T x = b when `transposed`.
  VectorXd solve(const Eigen::Ref<const VectorXd>& b, bool transposed = false) const;

  /// Number of factorizations performed process-wide.
  static std::size_t construction_count() { return count_.load(); }
  static void reset_construction_count() { count_.store(0); }

 private:
  using SparseLu = Eigen::SparseLU<Eigen::SparseMatrix<double, Eigen::ColMajor, int>,
                                   Eigen::COLAMDOrdering<int>>;

  std::shared_ptr<const NaturalFactors> factors_;
  FactorMethod method_;
  SparseXd h_;
  std::optional<LuFactorization<double>> lu_;
  std::optional<QrFactorization<double>> qr_;
  // transpose() on Eigen's SparseLU is non-const although the solve is read-only.
  mutable std::unique_ptr<SparseLu> sparse_lu_;

  static inline std::atomic<std::size_t> count_{0};
};

/// Column-stacks [G_cr  C_tilde].
SparseXd assemble_h(const NaturalFactors& factors);

HFactorization build_h(std::shared_ptr<const NaturalFactors> factors,
                       FactorMethod method = FactorMethod::lu);

/// M^{-1} r = H^{-1} D^{-1} H^{-T} r with M = H^T D H.
VectorXd apply_minv(const HFactorization& f, const CoefficientDiagonal& d,
                    const Eigen::Ref<const VectorXd>& r);

/// blockdiag(G_cr^T D G_cr, C_tilde^T D C_tilde), applied factor-wise.
class BlockOperator {
 public:
  BlockOperator(const NaturalFactors& factors, const CoefficientDiagonal& d);

  Eigen::Index size() const { return n_cr_ + n_curl_; }
  Eigen::Index cr_size() const { return n_cr_; }
  const NaturalFactors& factors() const { return *factors_; }
  const CoefficientDiagonal& diagonal() const { return *d_; }

 private:
  const NaturalFactors* factors_;
  const CoefficientDiagonal* d_;
  Eigen::Index n_cr_;
  Eigen::Index n_curl_;
};

VectorXd apply_block(const BlockOperator& op, const Eigen::Ref<const VectorXd>& x);

/// Upper bound 2*eta - 1 on cond(M^{-1} A_hat), eta the coefficient contrast.
double condition_bound(const CoefficientDiagonal& d);

/// Dense forms for verification at small n.
MatrixXd dense_block_operator(const NaturalFactors& factors, const CoefficientDiagonal& d);
MatrixXd dense_preconditioner(const NaturalFactors& factors, const CoefficientDiagonal& d);

}  // namespace natfact
