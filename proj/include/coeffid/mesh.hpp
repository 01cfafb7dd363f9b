#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace coeffid {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Structured simplicial mesh of (0,1) or (0,1)^2.
///
/// In 1D element e joins nodes e and e+1. In 2D node (i,j) has index
/// j*(n+1)+i and every grid cell is cut along its lower-left to upper-right
/// diagonal into (v00, v10, v11) and (v00, v11, v01), both counter-clockwise.
/// Meshes are immutable once built and are shared through shared_ptr.
class Mesh {
 public:
  using Element = std::array<int, 3>;

  static std::shared_ptr<const Mesh> interval(int n);
  static std::shared_ptr<const Mesh> unit_square(int n);

  int dim() const { return dim_; }
  /// Cells per side.
  int cells() const { return cells_; }
  double h() const { return h_; }

  std::size_t num_nodes() const { return nodes_.size(); }
  std::size_t num_elements() const { return measure_.size(); }
  /// Vertices per element (d+1).
  int element_size() const { return dim_ + 1; }

  const Point& node(std::size_t i) const { return nodes_[i]; }
  bool is_boundary(std::size_t i) const { return boundary_[i] != 0; }

  /// Vertex indices of element e; only the first element_size() entries are used.
  const Element& element(std::size_t e) const { return elements_[e]; }
  double measure(std::size_t e) const { return measure_[e]; }
  /// Constant gradient of the local basis function of vertex k on element e.
  const Point& grad(std::size_t e, int k) const { return grads_[e][k]; }
  Point centroid(std::size_t e) const;

  /// Node-to-node adjacency (including the diagonal), CSR layout with sorted columns.
  std::span<const int> adjacency_row_ptr() const { return adj_ptr_; }
  std::span<const int> adjacency_cols() const { return adj_col_; }

  /// Interior nodes in increasing order and the inverse map (-1 on the boundary).
  std::span<const int> interior_nodes() const { return interior_; }
  int dof_of_node(std::size_t i) const { return dof_[i]; }
  std::size_t num_interior() const { return interior_.size(); }

  /// Integral of each nodal basis function, sum over T of |T|/(d+1).
  std::span<const double> lumped_mass() const { return lumped_; }

  /// Index of the node at lattice position (i, j); j is ignored in 1D.
  int node_index(int i, int j = 0) const { return dim_ == 1 ? i : j * (cells_ + 1) + i; }

 private:
  Mesh() = default;
  void finalize();

  int dim_ = 1;
  int cells_ = 0;
  double h_ = 0.0;
  std::vector<Point> nodes_;
  std::vector<unsigned char> boundary_;
  std::vector<Element> elements_;
  std::vector<double> measure_;
  std::vector<std::array<Point, 3>> grads_;
  std::vector<int> adj_ptr_;
  std::vector<int> adj_col_;
  std::vector<int> interior_;
  std::vector<int> dof_;
  std::vector<double> lumped_;
};

using MeshPtr = std::shared_ptr<const Mesh>;

/// Euclidean distance from node to the boundary of the unit interval or square.
double dist_to_boundary(const Mesh& mesh, std::size_t node);
double dist_to_boundary(const Point& p, int dim);

}  // namespace coeffid
