#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <cstddef>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace natfact {

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Compressed row storage; column indices are sorted within each row once compressed.
template <typename Scalar>
using SparseMatrix = Eigen::SparseMatrix<Scalar, Eigen::RowMajor, int>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixXd = DenseMatrix<double>;
using SparseXd = SparseMatrix<double>;
using VectorXd = Vector<double>;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class SingularMatrixError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {
inline void require_dims(bool ok, const char* what) {
  if (!ok) throw DimensionError(std::string("dimension mismatch: ") + what);
}
}  // namespace detail

template <typename Scalar>
Vector<Scalar> sparse_matvec(const SparseMatrix<Scalar>& a,
                             const Eigen::Ref<const Vector<Scalar>>& x) {
  detail::require_dims(x.size() == a.cols(), "sparse_matvec");
  Vector<Scalar> y(a.rows());
  for (Eigen::Index r = 0; r < a.outerSize(); ++r) {
    Scalar acc{0};
    for (typename SparseMatrix<Scalar>::InnerIterator it(a, r); it; ++it)
      acc += it.value() * x(it.index());
    y(r) = acc;
  }
  return y;
}

/// y = A^T x without forming the transpose.
template <typename Scalar>
Vector<Scalar> sparse_matvec_transposed(const SparseMatrix<Scalar>& a,
                                        const Eigen::Ref<const Vector<Scalar>>& x) {
  detail::require_dims(x.size() == a.rows(), "sparse_matvec_transposed");
  Vector<Scalar> y = Vector<Scalar>::Zero(a.cols());
  for (Eigen::Index r = 0; r < a.outerSize(); ++r) {
    const Scalar xr = x(r);
    for (typename SparseMatrix<Scalar>::InnerIterator it(a, r); it; ++it)
      y(it.index()) += it.value() * xr;
  }
  return y;
}

/// Checks the compressed-row invariants: strictly increasing, in-range columns.
template <typename Scalar>
bool is_well_formed(const SparseMatrix<Scalar>& a) {
  if (!a.isCompressed()) return false;
  for (Eigen::Index r = 0; r < a.outerSize(); ++r) {
    Eigen::Index prev = -1;
    for (typename SparseMatrix<Scalar>::InnerIterator it(a, r); it; ++it) {
      if (it.index() <= prev || it.index() >= a.cols()) return false;
      if (!std::isfinite(it.value())) return false;
      prev = it.index();
    }
  }
  return true;
}

/// LU with partial pivoting, PA = LU. Element growth is not monitored.
template <typename Scalar>
class LuFactorization {
 public:
  explicit LuFactorization(const DenseMatrix<Scalar>& a);
  explicit LuFactorization(DenseMatrix<Scalar>&& a);

  Eigen::Index size() const { return lu_.rows(); }

  /// Solves A x = b, or A^T x = b when `transposed`.
  Vector<Scalar> solve(const Eigen::Ref<const Vector<Scalar>>& b, bool transposed = false) const;

  /// Row permutation: row i of PA is row perm[i] of A.
  std::vector<Eigen::Index> permutation() const;
  DenseMatrix<Scalar> lower() const;
  DenseMatrix<Scalar> upper() const;

 private:
  void check_pivots() const;

  Eigen::PartialPivLU<DenseMatrix<Scalar>> lu_;
};

/// Householder QR, A = QR.
template <typename Scalar>
class QrFactorization {
 public:
  explicit QrFactorization(const DenseMatrix<Scalar>& a);

  Eigen::Index size() const { return qr_.rows(); }

  Vector<Scalar> solve(const Eigen::Ref<const Vector<Scalar>>& b, bool transposed = false) const;

  Vector<Scalar> apply_q(const Eigen::Ref<const Vector<Scalar>>& x) const;
  Vector<Scalar> apply_qt(const Eigen::Ref<const Vector<Scalar>>& x) const;
  DenseMatrix<Scalar> upper() const;

 private:
  Eigen::HouseholderQR<DenseMatrix<Scalar>> qr_;
};

template <typename Scalar>
LuFactorization<Scalar> lu_factor(const DenseMatrix<Scalar>& a) {
  return LuFactorization<Scalar>(a);
}

template <typename Scalar>
Vector<Scalar> lu_solve(const LuFactorization<Scalar>& f,
                        const std::type_identity_t<Eigen::Ref<const Vector<Scalar>>>& b,
                        bool transposed = false) {
  return f.solve(b, transposed);
}

template <typename Scalar>
struct SymmetricEigen {
  Vector<Scalar> eigenvalues;         // descending
  DenseMatrix<Scalar> eigenvectors;   // column k pairs with eigenvalues(k)
};

/// Full symmetric eigendecomposition, eigenvalues sorted descending.
/// Inputs that are not symmetric to 1e-12 (absolute) are rejected.
template <typename Scalar>
SymmetricEigen<Scalar> symmetric_eigen(const DenseMatrix<Scalar>& a);

template <typename Scalar>
DenseMatrix<Scalar> to_dense(const SparseMatrix<Scalar>& a) {
  return DenseMatrix<Scalar>(a);
}

/// MatrixMarket "coordinate real general" writers.
void write_matrix_market(std::ostream& os, const SparseXd& a);
void write_matrix_market(std::ostream& os, const MatrixXd& a);
void write_matrix_market(const std::string& path, const SparseXd& a);
void write_matrix_market(const std::string& path, const MatrixXd& a);
SparseXd read_matrix_market(std::istream& is);
SparseXd read_matrix_market(const std::string& path);

extern template class LuFactorization<double>;
extern template class QrFactorization<double>;
extern template SymmetricEigen<double> symmetric_eigen(const MatrixXd&);

}  // namespace natfact
