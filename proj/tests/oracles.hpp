#pragma once

// Independent reference computations used only by the tests. Nothing here
// calls into the factorizations or assembly routines under test.

#include "natfact/linalg.hpp"
#include "natfact/mesh.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

namespace oracle {

using natfact::MatrixXd;
using natfact::VectorXd;

/// Gauss-Jordan inverse with partial pivoting, plain loops.
inline MatrixXd gauss_jordan_inverse(MatrixXd a) {
  const auto n = a.rows();
  MatrixXd inv = MatrixXd::Identity(n, n);
  for (Eigen::Index col = 0; col < n; ++col) {
    Eigen::Index piv = col;
    for (Eigen::Index r = col + 1; r < n; ++r)
      if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
    if (a(piv, col) == 0.0) throw std::runtime_error("oracle: singular");
    for (Eigen::Index c = 0; c < n; ++c) {
      std::swap(a(col, c), a(piv, c));
      std::swap(inv(col, c), inv(piv, c));
    }
    const double p = a(col, col);
    for (Eigen::Index c = 0; c < n; ++c) {
      a(col, c) /= p;
      inv(col, c) /= p;
    }
    for (Eigen::Index r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a(r, col);
      if (f == 0.0) continue;
      for (Eigen::Index c = 0; c < n; ++c) {
        a(r, c) -= f * a(col, c);
        inv(r, c) -= f * inv(col, c);
      }
    }
  }
  return inv;
}

struct JacobiResult {
  VectorXd values;   // descending
  MatrixXd vectors;  // columns
};

/// Cyclic Jacobi rotations until the off-diagonal mass is negligible.
inline JacobiResult cyclic_jacobi(MatrixXd a) {
  const auto n = a.rows();
  MatrixXd v = MatrixXd::Identity(n, n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off <= 1e-30 * std::max(1.0, a.squaredNorm())) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](auto i, auto j) { return a(i, i) > a(j, j); });
  JacobiResult r{VectorXd(n), MatrixXd(n, n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    r.values(k) = a(order[k], order[k]);
    r.vectors.col(k) = v.col(order[k]);
  }
  return r;
}

struct EntityCounts {
  int triangles = 0, vertices = 0, interior_vertices = 0, interior_edges = 0, boundary_edges = 0;
};

/// Enumerates the triangulation from geometry alone: cells split along the
/// (i,j)-(i+1,j+1) diagonal, edges identified by their endpoint coordinates.
inline EntityCounts enumerate_entities(int n) {
  using P = std::pair<int, int>;
  std::set<P> verts;
  std::map<std::pair<P, P>, int> edges;
  int tris = 0;
  auto add_edge = [&](P a, P b) { ++edges[{std::min(a, b), std::max(a, b)}]; };
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const P a{i, j}, b{i + 1, j}, c{i + 1, j + 1}, d{i, j + 1};
      for (const auto& tri : {std::array<P, 3>{a, b, c}, std::array<P, 3>{a, c, d}}) {
        ++tris;
        for (int k = 0; k < 3; ++k) {
          verts.insert(tri[k]);
          add_edge(tri[k], tri[(k + 1) % 3]);
        }
      }
    }
  }
  EntityCounts e;
  e.triangles = tris;
  e.vertices = static_cast<int>(verts.size());
  for (const auto& v : verts)
    if (v.first > 0 && v.first < n && v.second > 0 && v.second < n) ++e.interior_vertices;
  for (const auto& [_, count] : edges) (count == 2 ? e.interior_edges : e.boundary_edges)++;
  return e;
}

/// Gradient of the linear function on triangle (p0,p1,p2) taking values
/// `vals` at points `q0,q1,q2`, from the 3x3 interpolation system.
inline Eigen::Vector2d linear_gradient(const std::array<natfact::Point, 3>& q, const Eigen::Vector3d& vals) {
  Eigen::Matrix3d sys;
  for (int i = 0; i < 3; ++i) sys.row(i) << 1.0, q[i].x(), q[i].y();
  const Eigen::Vector3d coef = sys.fullPivLu().solve(vals);
  return {coef(1), coef(2)};
}

/// CR stiffness by element loop: each basis function is found by
/// interpolating the midpoint values (1 at its edge, 0 at the others).
inline MatrixXd cr_stiffness_by_interpolation(const natfact::Mesh& m, const std::vector<double>& kappa) {
  std::map<std::array<int, 2>, int> interior;
  for (std::size_t e = 0; e < m.edges.size(); ++e)
    if (!m.edges[e].boundary) interior[m.edges[e].vertices] = m.interior_edge_index[e];
  MatrixXd a = MatrixXd::Zero(m.num_interior_edges(), m.num_interior_edges());
  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto& tri = m.triangles[t];
    std::array<natfact::Point, 3> mids;
    std::array<int, 3> ids{};
    for (int k = 0; k < 3; ++k) {
      const int u = tri[k], v = tri[(k + 1) % 3];
      mids[k] = 0.5 * (m.vertices[u] + m.vertices[v]);
      const auto it = interior.find({std::min(u, v), std::max(u, v)});
      ids[k] = it == interior.end() ? -1 : it->second;
    }
    const natfact::Point ab = m.vertices[tri[1]] - m.vertices[tri[0]];
    const natfact::Point ac = m.vertices[tri[2]] - m.vertices[tri[0]];
    const double area = 0.5 * std::abs(ab.x() * ac.y() - ab.y() * ac.x());
    std::array<Eigen::Vector2d, 3> g;
    for (int k = 0; k < 3; ++k) g[k] = linear_gradient(mids, Eigen::Vector3d::Unit(k));
    for (int k = 0; k < 3; ++k)
      for (int l = 0; l < 3; ++l)
        if (ids[k] >= 0 && ids[l] >= 0) a(ids[k], ids[l]) += kappa[t] * area * g[k].dot(g[l]);
  }
  return a;
}

/// P1 stiffness over interior vertices by interpolation of hat functions.
inline MatrixXd p1_stiffness_by_interpolation(const natfact::Mesh& m, const std::vector<double>& kappa) {
  const int n = m.n;
  auto interior_id = [&](int v) {
    const int i = v % (n + 1), j = v / (n + 1);
    return (i > 0 && i < n && j > 0 && j < n) ? (j - 1) * (n - 1) + (i - 1) : -1;
  };
  const int nv = (n - 1) * (n - 1);
  MatrixXd a = MatrixXd::Zero(nv, nv);
  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto& tri = m.triangles[t];
    const std::array<natfact::Point, 3> p{m.vertices[tri[0]], m.vertices[tri[1]], m.vertices[tri[2]]};
    const natfact::Point ab = p[1] - p[0], ac = p[2] - p[0];
    const double area = 0.5 * std::abs(ab.x() * ac.y() - ab.y() * ac.x());
    for (int k = 0; k < 3; ++k) {
      for (int l = 0; l < 3; ++l) {
        const int ik = interior_id(tri[k]), il = interior_id(tri[l]);
        if (ik < 0 || il < 0) continue;
        a(ik, il) += kappa[t] * area *
                     linear_gradient(p, Eigen::Vector3d::Unit(k)).dot(linear_gradient(p, Eigen::Vector3d::Unit(l)));
      }
    }
  }
  return a;
}

inline MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  MatrixXd a(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) a(i, j) = u(gen);
  return a;
}

inline VectorXd random_vector(Eigen::Index n, unsigned seed) { return random_matrix(n, 1, seed).col(0); }

inline std::vector<double> random_kappa(int nt, unsigned seed, double lo = 0.1, double hi = 10.0) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  std::vector<double> k(static_cast<std::size_t>(nt));
  for (auto& v : k) v = std::exp(u(gen));
  return k;
}

}  // namespace oracle
