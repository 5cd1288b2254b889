#pragma once

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace natfact {

using Point = Eigen::Vector2d;

struct Edge {
  std::array<int, 2> vertices;  // sorted ascending
  bool boundary = false;

  bool operator==(const Edge&) const = default;
};

/// Structured triangulation of the unit square: n x n cells, each split by the
/// diagonal from its lower-left to its upper-right corner.
///
/// Numbering:
///  - vertex (i, j) at (i/n, j/n) has index j*(n+1) + i (row-major, bottom to top);
///  - cell (i, j) owns triangles 2*(j*n+i) (lower) and 2*(j*n+i)+1 (upper);
///  - edges are sorted lexicographically by their sorted vertex pair.
/// Triangles are counter-clockwise. `triangle_edges[t][k]` is the edge opposite
/// local vertex k of triangle t.
struct Mesh {
  int n = 0;
  std::vector<Point> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<std::array<int, 3>> triangle_edges;
  std::vector<Edge> edges;
  std::vector<int> interior_edge_index;    // per edge, -1 on the boundary
  std::vector<int> interior_vertex_index;  // per vertex, -1 on the boundary
  std::vector<double> areas;
  std::vector<Point> barycenters;

  int num_triangles() const { return static_cast<int>(triangles.size()); }
  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_edges() const { return static_cast<int>(edges.size()); }
  int num_interior_edges() const { return num_interior_edges_; }
  int num_interior_vertices() const { return num_interior_vertices_; }

  bool operator==(const Mesh&) const = default;

 private:
  friend Mesh build_mesh(int n);
  int num_interior_edges_ = 0;
  int num_interior_vertices_ = 0;
};

Mesh build_mesh(int n);

/// Midpoints of the interior edges, in interior-edge order.
std::vector<Point> edge_midpoints(const Mesh& m);

/// Plain-text dumps (header row, comma separated) for external plotting.
void write_mesh_csv(const Mesh& m, const std::string& vertices_path,
                    const std::string& triangles_path, const std::string& edges_path);
void write_vertices_csv(std::ostream& os, const Mesh& m);
void write_triangles_csv(std::ostream& os, const Mesh& m);
void write_edges_csv(std::ostream& os, const Mesh& m);

}  // namespace natfact
