#include "natfact/linalg.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace natfact {

template <typename Scalar>
LuFactorization<Scalar>::LuFactorization(const DenseMatrix<Scalar>& a) {
  detail::require_dims(a.rows() == a.cols(), "lu_factor requires a square matrix");
  lu_.compute(a);
  check_pivots();
}

template <typename Scalar>
LuFactorization<Scalar>::LuFactorization(DenseMatrix<Scalar>&& a) : lu_(a.rows()) {
  detail::require_dims(a.rows() == a.cols(), "lu_factor requires a square matrix");
  lu_.compute(std::move(a));
  check_pivots();
}

template <typename Scalar>
void LuFactorization<Scalar>::check_pivots() const {
  const auto& packed = lu_.matrixLU();
  for (Eigen::Index i = 0; i < packed.rows(); ++i) {
    if (packed(i, i) == Scalar{0})
      throw SingularMatrixError("lu_factor: zero pivot at column " + std::to_string(i));
  }
}

template <typename Scalar>
Vector<Scalar> LuFactorization<Scalar>::solve(const Eigen::Ref<const Vector<Scalar>>& b,
                                              bool transposed) const {
  detail::require_dims(b.size() == lu_.rows(), "lu_solve");
  if (transposed) return lu_.transpose().solve(b);
  return lu_.solve(b);
}

template <typename Scalar>
std::vector<Eigen::Index> LuFactorization<Scalar>::permutation() const {
  const auto& ind = lu_.permutationP().indices();
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(ind.size()));
  for (Eigen::Index i = 0; i < ind.size(); ++i) perm[static_cast<std::size_t>(ind(i))] = i;
  return perm;
}

template <typename Scalar>
DenseMatrix<Scalar> LuFactorization<Scalar>::lower() const {
  DenseMatrix<Scalar> l = lu_.matrixLU().template triangularView<Eigen::UnitLower>();
  return l;
}

template <typename Scalar>
DenseMatrix<Scalar> LuFactorization<Scalar>::upper() const {
  DenseMatrix<Scalar> u = lu_.matrixLU().template triangularView<Eigen::Upper>();
  return u;
}

template <typename Scalar>
QrFactorization<Scalar>::QrFactorization(const DenseMatrix<Scalar>& a) {
  detail::require_dims(a.rows() == a.cols(), "qr_factor requires a square matrix");
  qr_.compute(a);
  const auto& packed = qr_.matrixQR();
  for (Eigen::Index i = 0; i < packed.rows(); ++i) {
    if (packed(i, i) == Scalar{0})
      throw SingularMatrixError("qr_factor: zero diagonal in R at column " + std::to_string(i));
  }
}

template <typename Scalar>
Vector<Scalar> QrFactorization<Scalar>::apply_q(const Eigen::Ref<const Vector<Scalar>>& x) const {
  detail::require_dims(x.size() == qr_.rows(), "qr apply_q");
  Vector<Scalar> y = x;
  y.applyOnTheLeft(qr_.householderQ());
  return y;
}

template <typename Scalar>
Vector<Scalar> QrFactorization<Scalar>::apply_qt(const Eigen::Ref<const Vector<Scalar>>& x) const {
  detail::require_dims(x.size() == qr_.rows(), "qr apply_qt");
  Vector<Scalar> y = x;
  y.applyOnTheLeft(qr_.householderQ().adjoint());
  return y;
}

template <typename Scalar>
DenseMatrix<Scalar> QrFactorization<Scalar>::upper() const {
  DenseMatrix<Scalar> r = qr_.matrixQR().template triangularView<Eigen::Upper>();
  return r;
}

template <typename Scalar>
Vector<Scalar> QrFactorization<Scalar>::solve(const Eigen::Ref<const Vector<Scalar>>& b,
                                              bool transposed) const {
  detail::require_dims(b.size() == qr_.rows(), "qr solve");
  const auto r = qr_.matrixQR().template triangularView<Eigen::Upper>();
  if (!transposed) {
    Vector<Scalar> y = apply_qt(b);
    r.solveInPlace(y);
    return y;
  }
  // A^T = R^T Q^T
  Vector<Scalar> y = b;
  r.transpose().solveInPlace(y);
  return apply_q(y);
}

template <typename Scalar>
SymmetricEigen<Scalar> symmetric_eigen(const DenseMatrix<Scalar>& a) {
  detail::require_dims(a.rows() == a.cols(), "symmetric_eigen requires a square matrix");
  if (a.size() > 0 && (a - a.transpose()).cwiseAbs().maxCoeff() > Scalar(1e-12))
    throw std::invalid_argument("symmetric_eigen: matrix is not symmetric");

  Eigen::SelfAdjointEigenSolver<DenseMatrix<Scalar>> es(a);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("symmetric_eigen: eigensolver did not converge");

  // Eigen returns ascending order.
  SymmetricEigen<Scalar> out;
  out.eigenvalues = es.eigenvalues().reverse();
  out.eigenvectors = es.eigenvectors().rowwise().reverse();
  return out;
}

template class LuFactorization<double>;
template class QrFactorization<double>;
template SymmetricEigen<double> symmetric_eigen(const MatrixXd&);

namespace {

void write_header(std::ostream& os, Eigen::Index rows, Eigen::Index cols, Eigen::Index nnz) {
  os << "%%MatrixMarket matrix coordinate real general\n";
  os << rows << ' ' << cols << ' ' << nnz << '\n';
  os << std::setprecision(17);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  return os;
}

}  // namespace

void write_matrix_market(std::ostream& os, const SparseXd& a) {
  write_header(os, a.rows(), a.cols(), a.nonZeros());
  for (Eigen::Index r = 0; r < a.outerSize(); ++r)
    for (SparseXd::InnerIterator it(a, r); it; ++it)
      os << r + 1 << ' ' << it.index() + 1 << ' ' << it.value() << '\n';
}

void write_matrix_market(std::ostream& os, const MatrixXd& a) {
  const auto nnz = static_cast<Eigen::Index>((a.array() != 0.0).count());
  write_header(os, a.rows(), a.cols(), nnz);
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    for (Eigen::Index c = 0; c < a.cols(); ++c)
      if (a(r, c) != 0.0) os << r + 1 << ' ' << c + 1 << ' ' << a(r, c) << '\n';
}

void write_matrix_market(const std::string& path, const SparseXd& a) {
  auto os = open_out(path);
  write_matrix_market(os, a);
}

void write_matrix_market(const std::string& path, const MatrixXd& a) {
  auto os = open_out(path);
  write_matrix_market(os, a);
}

SparseXd read_matrix_market(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("%%MatrixMarket", 0) != 0)
    throw std::runtime_error("read_matrix_market: missing banner");
  if (line.find("coordinate") == std::string::npos || line.find("real") == std::string::npos ||
      line.find("general") == std::string::npos)
    throw std::runtime_error("read_matrix_market: only coordinate real general is supported");
  while (std::getline(is, line) && !line.empty() && line[0] == '%') {
  }
  std::istringstream head(line);
  Eigen::Index rows = 0, cols = 0, nnz = 0;
  if (!(head >> rows >> cols >> nnz)) throw std::runtime_error("read_matrix_market: bad size line");

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(nnz));
  for (Eigen::Index k = 0; k < nnz; ++k) {
    Eigen::Index r = 0, c = 0;
    double v = 0.0;
    if (!(is >> r >> c >> v)) throw std::runtime_error("read_matrix_market: truncated entries");
    if (r < 1 || r > rows || c < 1 || c > cols)
      throw std::runtime_error("read_matrix_market: index out of range");
    triplets.emplace_back(static_cast<int>(r - 1), static_cast<int>(c - 1), v);
  }
  SparseXd a(rows, cols);
  a.setFromTriplets(triplets.begin(), triplets.end());
  a.makeCompressed();
  return a;
}

SparseXd read_matrix_market(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open for reading: " + path);
  return read_matrix_market(is);
}

}  // namespace natfact
