#include "natfact/preconditioner.hpp"

#include <stdexcept>
#include <utility>
#include <vector>

namespace natfact {

std::string to_string(FactorMethod m) {
  switch (m) {
    case FactorMethod::lu: return "lu";
    case FactorMethod::qr: return "qr";
    case FactorMethod::sparse_lu: return "sparse-lu";
  }
  return "unknown";
}

FactorMethod parse_factor_method(const std::string& s) {
  if (s == "lu") return FactorMethod::lu;
  if (s == "qr") return FactorMethod::qr;
  if (s == "sparse-lu" || s == "sparse_lu") return FactorMethod::sparse_lu;
  throw std::invalid_argument("unknown factorization method: " + s);
}

SparseXd assemble_h(const NaturalFactors& factors) {
  const SparseXd& g = factors.G_cr;
  const SparseXd& c = factors.C_tilde;
  detail::require_dims(g.rows() == c.rows(), "assemble_h: row counts differ");
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(g.nonZeros() + c.nonZeros()));
  for (Eigen::Index r = 0; r < g.outerSize(); ++r) {
    for (SparseXd::InnerIterator it(g, r); it; ++it)
      trip.emplace_back(static_cast<int>(r), static_cast<int>(it.index()), it.value());
    for (SparseXd::InnerIterator it(c, r); it; ++it)
      trip.emplace_back(static_cast<int>(r), static_cast<int>(g.cols() + it.index()), it.value());
  }
  SparseXd h(g.rows(), g.cols() + c.cols());
  h.setFromTriplets(trip.begin(), trip.end());
  h.makeCompressed();
  return h;
}

HFactorization::HFactorization(std::shared_ptr<const NaturalFactors> factors, FactorMethod method)
    : factors_(std::move(factors)), method_(method) {
  if (!factors_) throw std::invalid_argument("build_h: null factors");
  h_ = assemble_h(*factors_);
  if (h_.rows() != h_.cols())
    throw DimensionError("build_h: H is " + std::to_string(h_.rows()) + "x" +
                         std::to_string(h_.cols()) + ", expected square");
  switch (method_) {
    case FactorMethod::lu:
      lu_.emplace(MatrixXd(h_));
      break;
    case FactorMethod::qr:
      qr_.emplace(MatrixXd(h_));
      break;
    case FactorMethod::sparse_lu: {
      sparse_lu_ = std::make_unique<SparseLu>();
      Eigen::SparseMatrix<double, Eigen::ColMajor, int> hc = h_;
      sparse_lu_->analyzePattern(hc);
      sparse_lu_->factorize(hc);
      if (sparse_lu_->info() != Eigen::Success)
        throw SingularMatrixError("build_h: sparse LU failed: " + sparse_lu_->lastErrorMessage());
      break;
    }
  }
  ++count_;
}

VectorXd HFactorization::solve(const Eigen::Ref<const VectorXd>& b, bool transposed) const {
  detail::require_dims(b.size() == size(), "HFactorization::solve");
  if (lu_) return lu_->solve(b, transposed);
  if (qr_) return qr_->solve(b, transposed);
  VectorXd x(b.size());
  if (transposed)
    x = sparse_lu_->transpose().solve(b);
  else
    x = sparse_lu_->solve(b);
  return x;
}

HFactorization build_h(std::shared_ptr<const NaturalFactors> factors, FactorMethod method) {
  return HFactorization(std::move(factors), method);
}

VectorXd apply_minv(const HFactorization& f, const CoefficientDiagonal& d,
                    const Eigen::Ref<const VectorXd>& r) {
  detail::require_dims(r.size() == f.size() && d.size() == f.size(), "apply_minv");
  VectorXd y = f.solve(r, /*transposed=*/true);
  y.array() /= d.values().array();
  return f.solve(y);
}

BlockOperator::BlockOperator(const NaturalFactors& factors, const CoefficientDiagonal& d)
    : factors_(&factors), d_(&d), n_cr_(factors.G_cr.cols()), n_curl_(factors.C_tilde.cols()) {
  detail::require_dims(factors.G_cr.rows() == d.size(), "BlockOperator: diagonal size");
}

VectorXd apply_block(const BlockOperator& op, const Eigen::Ref<const VectorXd>& x) {
  detail::require_dims(x.size() == op.size(), "apply_block");
  const auto n = op.cr_size();
  VectorXd y(x.size());
  y.head(n) = apply_stiffness_factored(op.factors().G_cr, op.diagonal(), x.head(n));
  y.tail(x.size() - n) = apply_stiffness_factored(op.factors().C_tilde, op.diagonal(), x.tail(x.size() - n));
  return y;
}

double condition_bound(const CoefficientDiagonal& d) { return 2.0 * d.contrast() - 1.0; }

MatrixXd dense_block_operator(const NaturalFactors& factors, const CoefficientDiagonal& d) {
  const MatrixXd g(factors.G_cr);
  const MatrixXd c(factors.C_tilde);
  const auto dd = d.values().asDiagonal();
  const auto n = g.cols();
  const auto m = c.cols();
  MatrixXd a = MatrixXd::Zero(n + m, n + m);
  a.topLeftCorner(n, n) = g.transpose() * dd * g;
  a.bottomRightCorner(m, m) = c.transpose() * dd * c;
  return a;
}

MatrixXd dense_preconditioner(const NaturalFactors& factors, const CoefficientDiagonal& d) {
  const MatrixXd h(assemble_h(factors));
  return h.transpose() * d.values().asDiagonal() * h;
}

}  // namespace natfact
