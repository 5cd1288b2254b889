#include "natfact/operators.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace natfact {

namespace {

using Triplet = Eigen::Triplet<double>;

SparseXd from_triplets(Eigen::Index rows, Eigen::Index cols, std::vector<Triplet>& t) {
  SparseXd a(rows, cols);
  a.setFromTriplets(t.begin(), t.end());
  a.makeCompressed();
  return a;
}

}  // namespace

Eigen::Matrix<double, 3, 2> barycentric_gradients(const Mesh& m, int t) {
  const auto& tri = m.triangles[static_cast<std::size_t>(t)];
  const Point& p0 = m.vertices[tri[0]];
  const Point& p1 = m.vertices[tri[1]];
  const Point& p2 = m.vertices[tri[2]];
  const double twice_area = (p1.x() - p0.x()) * (p2.y() - p0.y()) - (p1.y() - p0.y()) * (p2.x() - p0.x());
  Eigen::Matrix<double, 3, 2> g;
  g << p1.y() - p2.y(), p2.x() - p1.x(),
       p2.y() - p0.y(), p0.x() - p2.x(),
       p0.y() - p1.y(), p1.x() - p0.x();
  return g / twice_area;
}

SparseXd assemble_gradient_cr(const Mesh& m) {
  const int nt = m.num_triangles();
  std::vector<Triplet> trip;
  trip.reserve(6 * static_cast<std::size_t>(nt));
  for (int t = 0; t < nt; ++t) {
    const auto grads = barycentric_gradients(m, t);
    const double s = std::sqrt(m.areas[t]);
    for (int k = 0; k < 3; ++k) {
      const int col = m.interior_edge_index[m.triangle_edges[t][k]];
      if (col < 0) continue;
      // phi_e = 1 - 2 lambda_k, k the vertex opposite e
      trip.emplace_back(t, col, -2.0 * s * grads(k, 0));
      trip.emplace_back(nt + t, col, -2.0 * s * grads(k, 1));
    }
  }
  return from_triplets(2 * nt, m.num_interior_edges(), trip);
}

SparseXd assemble_curl_p1(const Mesh& m, bool drop_vertex) {
  const int nt = m.num_triangles();
  const int dropped = drop_vertex ? dropped_curl_vertex(m) : -1;
  const int cols = drop_vertex ? m.num_vertices() - 1 : m.num_vertices();
  std::vector<Triplet> trip;
  trip.reserve(6 * static_cast<std::size_t>(nt));
  for (int t = 0; t < nt; ++t) {
    const auto grads = barycentric_gradients(m, t);
    const double s = std::sqrt(m.areas[t]);
    for (int k = 0; k < 3; ++k) {
      const int v = m.triangles[t][k];
      if (v == dropped) continue;
      // dropped is the last vertex, so the remaining indices are unchanged
      trip.emplace_back(t, v, s * grads(k, 1));
      trip.emplace_back(nt + t, v, -s * grads(k, 0));
    }
  }
  return from_triplets(2 * nt, cols, trip);
}

SparseXd assemble_gradient_p1(const Mesh& m) {
  const int nt = m.num_triangles();
  std::vector<Triplet> trip;
  for (int t = 0; t < nt; ++t) {
    const auto grads = barycentric_gradients(m, t);
    const double s = std::sqrt(m.areas[t]);
    for (int k = 0; k < 3; ++k) {
      const int col = m.interior_vertex_index[m.triangles[t][k]];
      if (col < 0) continue;
      trip.emplace_back(t, col, s * grads(k, 0));
      trip.emplace_back(nt + t, col, s * grads(k, 1));
    }
  }
  return from_triplets(2 * nt, m.num_interior_vertices(), trip);
}

NaturalFactors assemble_natural_factors(std::shared_ptr<const Mesh> m) {
  if (!m) throw std::invalid_argument("assemble_natural_factors: null mesh");
  NaturalFactors f;
  f.G_cr = assemble_gradient_cr(*m);
  f.C_tilde = assemble_curl_p1(*m);
  f.G_l = assemble_gradient_p1(*m);
  f.mesh = std::move(m);
  return f;
}

CoefficientDiagonal::CoefficientDiagonal(std::span<const double> kappa) {
  if (kappa.empty()) throw std::invalid_argument("coefficient_diagonal: empty coefficient");
  const auto nt = static_cast<Eigen::Index>(kappa.size());
  d_.resize(2 * nt);
  for (Eigen::Index t = 0; t < nt; ++t) {
    const double k = kappa[static_cast<std::size_t>(t)];
    if (!std::isfinite(k) || k <= 0.0)
      throw std::invalid_argument("coefficient_diagonal: entry " + std::to_string(t) +
                                  " is not a positive finite number");
    d_(t) = k;
    d_(nt + t) = k;
  }
  min_ = d_.head(nt).minCoeff();
  max_ = d_.head(nt).maxCoeff();
  contrast_ = max_ / min_;
}

CoefficientDiagonal::CoefficientDiagonal(const VectorXd& kappa)
    : CoefficientDiagonal(std::span<const double>(kappa.data(), static_cast<std::size_t>(kappa.size()))) {}

CoefficientDiagonal CoefficientDiagonal::scaled(double c) const {
  VectorXd k = c * d_.head(num_triangles());
  return CoefficientDiagonal(k);
}

CoefficientDiagonal coefficient_diagonal(const Mesh& m, std::span<const double> kappa) {
  if (static_cast<int>(kappa.size()) != m.num_triangles())
    throw DimensionError("coefficient_diagonal: expected one value per triangle");
  return CoefficientDiagonal(kappa);
}

CoefficientDiagonal coefficient_diagonal(const Mesh& m, const ScalarField& kappa) {
  std::vector<double> k(static_cast<std::size_t>(m.num_triangles()));
  for (int t = 0; t < m.num_triangles(); ++t) k[t] = kappa(m.barycenters[t].x(), m.barycenters[t].y());
  return CoefficientDiagonal(k);
}

SparseXd assemble_stiffness(const SparseXd& g, const CoefficientDiagonal& d) {
  detail::require_dims(g.rows() == d.size(), "assemble_stiffness");
  SparseXd dg = d.values().asDiagonal() * g;
  SparseXd a = SparseXd(g.transpose()) * dg;
  a.makeCompressed();
  return a;
}

VectorXd apply_stiffness_factored(const SparseXd& g, const CoefficientDiagonal& d,
                                  const Eigen::Ref<const VectorXd>& x) {
  detail::require_dims(g.rows() == d.size(), "apply_stiffness_factored (diagonal)");
  VectorXd q = sparse_matvec<double>(g, x);
  q.array() *= d.values().array();
  return sparse_matvec_transposed<double>(g, q);
}

VectorXd load_vector_cr_all_edges(const Mesh& m, const ScalarField& f) {
  VectorXd b = VectorXd::Zero(m.num_edges());
  for (int t = 0; t < m.num_triangles(); ++t) {
    const double w = m.areas[t] / 3.0;
    for (int k = 0; k < 3; ++k) {
      const int e = m.triangle_edges[t][k];
      const auto& v = m.edges[e].vertices;
      const Point mid = 0.5 * (m.vertices[v[0]] + m.vertices[v[1]]);
      // phi_e is 1 at its own midpoint and 0 at the other two
      b(e) += w * f(mid.x(), mid.y());
    }
  }
  return b;
}

VectorXd load_vector_cr(const Mesh& m, const ScalarField& f) {
  const VectorXd all = load_vector_cr_all_edges(m, f);
  VectorXd b(m.num_interior_edges());
  for (int e = 0; e < m.num_edges(); ++e)
    if (const int i = m.interior_edge_index[e]; i >= 0) b(i) = all(e);
  return b;
}

double broken_h1_error_to_exact(const Mesh& m, const Eigen::Ref<const VectorXd>& u_cr,
                                const std::function<Eigen::Vector2d(double, double)>& grad_exact) {
  detail::require_dims(u_cr.size() == m.num_interior_edges(), "broken_h1_error_to_exact");
  // 3x3 Gauss-Legendre on the unit square collapsed onto the reference triangle.
  const double r = 0.5 * std::sqrt(0.6);
  const std::array<double, 3> gx{0.5 - r, 0.5, 0.5 + r};
  const std::array<double, 3> gw{5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

  double total = 0.0;
  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto grads = barycentric_gradients(m, t);
    Eigen::Vector2d gh = Eigen::Vector2d::Zero();
    for (int k = 0; k < 3; ++k) {
      const int col = m.interior_edge_index[m.triangle_edges[t][k]];
      if (col >= 0) gh += -2.0 * u_cr(col) * grads.row(k).transpose();
    }
    const auto& tri = m.triangles[t];
    const Point& a = m.vertices[tri[0]];
    const Point ab = m.vertices[tri[1]] - a;
    const Point ac = m.vertices[tri[2]] - a;
    double local = 0.0;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        const double xi = gx[i];
        const double eta = (1.0 - gx[i]) * gx[j];
        const Point p = a + xi * ab + eta * ac;
        local += gw[i] * gw[j] * (1.0 - gx[i]) * (grad_exact(p.x(), p.y()) - gh).squaredNorm();
      }
    }
    total += 2.0 * m.areas[t] * local;
  }
  return std::sqrt(total);
}

}  // namespace natfact
