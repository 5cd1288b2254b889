#pragma once

#include "natfact/linalg.hpp"
#include "natfact/mesh.hpp"

#include <functional>
#include <memory>
#include <span>

namespace natfact {

/// Coefficient-independent discrete differential operators of the mesh.
/// Every matrix has 2*N_T rows: rows [0, N_T) hold the x-derivative block and
/// rows [N_T, 2 N_T) the y-derivative block, each scaled by sqrt(|T|).
struct NaturalFactors {
  std::shared_ptr<const Mesh> mesh;
  SparseXd G_cr;     // 2N_T x N_e, Crouzeix-Raviart gradient
  SparseXd C_tilde;  // 2N_T x (N_v_all - 1), rotated P1 gradient, one vertex dropped
  SparseXd G_l;      // 2N_T x N_v, P1 gradient over interior vertices
};

/// Per-triangle coefficient stacked twice: (kappa_T, kappa_T).
class CoefficientDiagonal {
 public:
  /// Throws std::invalid_argument on nonpositive or nonfinite entries.
  explicit CoefficientDiagonal(std::span<const double> kappa_per_triangle);
  explicit CoefficientDiagonal(const VectorXd& kappa_per_triangle);

  const VectorXd& values() const { return d_; }
  Eigen::Index size() const { return d_.size(); }
  Eigen::Index num_triangles() const { return d_.size() / 2; }
  double contrast() const { return contrast_; }
  double min() const { return min_; }
  double max() const { return max_; }
  CoefficientDiagonal scaled(double c) const;

 private:
  VectorXd d_;
  double min_ = 0.0;
  double max_ = 0.0;
  double contrast_ = 1.0;
};

using ScalarField = std::function<double(double, double)>;

/// Vertex whose column is removed from the rotated P1 gradient.
inline int dropped_curl_vertex(const Mesh& m) { return m.num_vertices() - 1; }

SparseXd assemble_gradient_cr(const Mesh& m);
/// With `drop_vertex = false` all vertex columns are kept (the kernel then
/// contains the constants).
SparseXd assemble_curl_p1(const Mesh& m, bool drop_vertex = true);
SparseXd assemble_gradient_p1(const Mesh& m);
NaturalFactors assemble_natural_factors(std::shared_ptr<const Mesh> m);

CoefficientDiagonal coefficient_diagonal(const Mesh& m, std::span<const double> kappa_per_triangle);
/// One-point evaluation kappa_T = kappa(x_T).
CoefficientDiagonal coefficient_diagonal(const Mesh& m, const ScalarField& kappa);

/// Explicit G^T D G.
SparseXd assemble_stiffness(const SparseXd& g, const CoefficientDiagonal& d);
/// G^T (d .* (G x)) without assembly.
VectorXd apply_stiffness_factored(const SparseXd& g, const CoefficientDiagonal& d,
                                  const Eigen::Ref<const VectorXd>& x);

/// CR load vector over interior edges, edge-midpoint rule per triangle.
VectorXd load_vector_cr(const Mesh& m, const ScalarField& f);
/// Same quadrature over every edge, boundary edges included (indexed by edge id).
VectorXd load_vector_cr_all_edges(const Mesh& m, const ScalarField& f);

/// Gradients of the barycentric coordinates of triangle t (row k = grad lambda_k).
Eigen::Matrix<double, 3, 2> barycentric_gradients(const Mesh& m, int t);

/// Broken H1 seminorm of (u_h - u) where u_h is the CR function with interior
/// edge values `u_cr` and `grad_exact` returns grad u. Unit coefficient.
double broken_h1_error_to_exact(const Mesh& m, const Eigen::Ref<const VectorXd>& u_cr,
                                const std::function<Eigen::Vector2d(double, double)>& grad_exact);

}  // namespace natfact
