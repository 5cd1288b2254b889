#include "natfact/mesh.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <stdexcept>

namespace natfact {

Mesh build_mesh(int n) {
  if (n < 1) throw std::invalid_argument("build_mesh: n must be at least 1");

  Mesh m;
  m.n = n;
  const int side = n + 1;
  const double h = 1.0 / n;
  m.vertices.reserve(static_cast<std::size_t>(side) * side);
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) m.vertices.emplace_back(i * h, j * h);

  m.triangles.reserve(2 * static_cast<std::size_t>(n) * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int v00 = j * side + i;
      const int v10 = v00 + 1;
      const int v01 = v00 + side;
      const int v11 = v01 + 1;
      m.triangles.push_back({v00, v10, v11});
      m.triangles.push_back({v00, v11, v01});
    }
  }

  // Edge key -> number of incident triangles.
  std::map<std::array<int, 2>, int> incidence;
  auto key = [](int a, int b) { return std::array<int, 2>{std::min(a, b), std::max(a, b)}; };
  for (const auto& t : m.triangles)
    for (int k = 0; k < 3; ++k) ++incidence[key(t[(k + 1) % 3], t[(k + 2) % 3])];

  std::map<std::array<int, 2>, int> edge_id;
  for (const auto& [verts, count] : incidence) {
    edge_id.emplace(verts, static_cast<int>(m.edges.size()));
    m.edges.push_back(Edge{verts, count == 1});
  }

  m.triangle_edges.reserve(m.triangles.size());
  for (const auto& t : m.triangles) {
    std::array<int, 3> te{};
    for (int k = 0; k < 3; ++k) te[k] = edge_id.at(key(t[(k + 1) % 3], t[(k + 2) % 3]));
    m.triangle_edges.push_back(te);
  }

  m.interior_edge_index.assign(m.edges.size(), -1);
  for (std::size_t e = 0; e < m.edges.size(); ++e)
    if (!m.edges[e].boundary) m.interior_edge_index[e] = m.num_interior_edges_++;

  m.interior_vertex_index.assign(m.vertices.size(), -1);
  for (int j = 1; j < n; ++j)
    for (int i = 1; i < n; ++i) m.interior_vertex_index[j * side + i] = m.num_interior_vertices_++;

  m.areas.reserve(m.triangles.size());
  m.barycenters.reserve(m.triangles.size());
  for (const auto& t : m.triangles) {
    const Point& a = m.vertices[t[0]];
    const Point& b = m.vertices[t[1]];
    const Point& c = m.vertices[t[2]];
    const Point ab = b - a;
    const Point ac = c - a;
    m.areas.push_back(0.5 * (ab.x() * ac.y() - ab.y() * ac.x()));
    m.barycenters.push_back((a + b + c) / 3.0);
  }
  return m;
}

std::vector<Point> edge_midpoints(const Mesh& m) {
  std::vector<Point> mids(static_cast<std::size_t>(m.num_interior_edges()));
  for (std::size_t e = 0; e < m.edges.size(); ++e) {
    const int idx = m.interior_edge_index[e];
    if (idx < 0) continue;
    const auto& v = m.edges[e].vertices;
    mids[static_cast<std::size_t>(idx)] = 0.5 * (m.vertices[v[0]] + m.vertices[v[1]]);
  }
  return mids;
}

void write_vertices_csv(std::ostream& os, const Mesh& m) {
  os << "index,x,y,interior_index\n" << std::setprecision(17);
  for (int v = 0; v < m.num_vertices(); ++v)
    os << v << ',' << m.vertices[v].x() << ',' << m.vertices[v].y() << ','
       << m.interior_vertex_index[v] << '\n';
}

void write_triangles_csv(std::ostream& os, const Mesh& m) {
  os << "index,v0,v1,v2,area,bx,by\n" << std::setprecision(17);
  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto& tri = m.triangles[t];
    os << t << ',' << tri[0] << ',' << tri[1] << ',' << tri[2] << ',' << m.areas[t] << ','
       << m.barycenters[t].x() << ',' << m.barycenters[t].y() << '\n';
  }
}

void write_edges_csv(std::ostream& os, const Mesh& m) {
  os << "index,v0,v1,boundary,interior_index\n";
  for (int e = 0; e < m.num_edges(); ++e) {
    const auto& edge = m.edges[e];
    os << e << ',' << edge.vertices[0] << ',' << edge.vertices[1] << ',' << (edge.boundary ? 1 : 0)
       << ',' << m.interior_edge_index[e] << '\n';
  }
}

void write_mesh_csv(const Mesh& m, const std::string& vertices_path,
                    const std::string& triangles_path, const std::string& edges_path) {
  auto open = [](const std::string& p) {
    std::ofstream os(p);
    if (!os) throw std::runtime_error("cannot open for writing: " + p);
    return os;
  };
  auto vs = open(vertices_path);
  write_vertices_csv(vs, m);
  auto ts = open(triangles_path);
  write_triangles_csv(ts, m);
  auto es = open(edges_path);
  write_edges_csv(es, m);
}

}  // namespace natfact
