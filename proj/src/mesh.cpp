#include "coeffid/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace coeffid {

std::shared_ptr<const Mesh> Mesh::interval(int n) {
  if (n < 2) {
    throw std::invalid_argument("interval mesh needs at least 2 cells, got " + std::to_string(n));
  }
  std::shared_ptr<Mesh> m(new Mesh());
  m->dim_ = 1;
  m->cells_ = n;
  m->h_ = 1.0 / n;
  m->nodes_.resize(n + 1);
  m->boundary_.assign(n + 1, 0);
  for (int i = 0; i <= n; ++i) {
    m->nodes_[i] = {static_cast<double>(i) / n, 0.0};
  }
  m->boundary_[0] = 1;
  m->boundary_[n] = 1;
  m->elements_.resize(n);
  for (int e = 0; e < n; ++e) {
    m->elements_[e] = {e, e + 1, -1};
  }
  m->finalize();
  return m;
}

std::shared_ptr<const Mesh> Mesh::unit_square(int n) {
  if (n < 2) {
    throw std::invalid_argument("unit square mesh needs at least 2 cells per side, got " +
                                std::to_string(n));
  }
  std::shared_ptr<Mesh> m(new Mesh());
  m->dim_ = 2;
  m->cells_ = n;
  m->h_ = std::sqrt(2.0) / n;
  const int np = n + 1;
  m->nodes_.resize(static_cast<std::size_t>(np) * np);
  m->boundary_.assign(m->nodes_.size(), 0);
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      const int k = j * np + i;
      m->nodes_[k] = {static_cast<double>(i) / n, static_cast<double>(j) / n};
      if (i == 0 || j == 0 || i == n || j == n) m->boundary_[k] = 1;
    }
  }
  m->elements_.reserve(2 * static_cast<std::size_t>(n) * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int v00 = j * np + i;
      const int v10 = v00 + 1;
      const int v01 = v00 + np;
      const int v11 = v01 + 1;
      m->elements_.push_back({v00, v10, v11});
      m->elements_.push_back({v00, v11, v01});
    }
  }
  m->finalize();
  return m;
}

void Mesh::finalize() {
  const std::size_t ne = elements_.size();
  const int nv = element_size();
  measure_.resize(ne);
  grads_.resize(ne);
  for (std::size_t e = 0; e < ne; ++e) {
    const auto& el = elements_[e];
    if (dim_ == 1) {
      const double len = nodes_[el[1]].x - nodes_[el[0]].x;
      if (!(len > 0.0)) throw std::logic_error("degenerate interval element");
      measure_[e] = len;
      grads_[e] = {Point{-1.0 / len, 0.0}, Point{1.0 / len, 0.0}, Point{}};
    } else {
      const Point& a = nodes_[el[0]];
      const Point& b = nodes_[el[1]];
      const Point& c = nodes_[el[2]];
      const double det = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
      if (!(det > 0.0)) throw std::logic_error("triangle with nonpositive orientation");
      measure_[e] = 0.5 * det;
      // grad(lambda_k) = rot90(opposite edge) / det
      grads_[e] = {Point{(b.y - c.y) / det, (c.x - b.x) / det},
                   Point{(c.y - a.y) / det, (a.x - c.x) / det},
                   Point{(a.y - b.y) / det, (b.x - a.x) / det}};
    }
  }

  const std::size_t nn = nodes_.size();
  std::vector<std::vector<int>> nbr(nn);
  for (std::size_t i = 0; i < nn; ++i) nbr[i].push_back(static_cast<int>(i));
  for (const auto& el : elements_) {
    for (int a = 0; a < nv; ++a) {
      for (int b = 0; b < nv; ++b) {
        if (a != b) nbr[el[a]].push_back(el[b]);
      }
    }
  }
  adj_ptr_.assign(nn + 1, 0);
  adj_col_.clear();
  for (std::size_t i = 0; i < nn; ++i) {
    auto& row = nbr[i];
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
    adj_col_.insert(adj_col_.end(), row.begin(), row.end());
    adj_ptr_[i + 1] = static_cast<int>(adj_col_.size());
  }

  dof_.assign(nn, -1);
  interior_.clear();
  for (std::size_t i = 0; i < nn; ++i) {
    if (!boundary_[i]) {
      dof_[i] = static_cast<int>(interior_.size());
      interior_.push_back(static_cast<int>(i));
    }
  }

  lumped_.assign(nn, 0.0);
  for (std::size_t e = 0; e < ne; ++e) {
    const double share = measure_[e] / nv;
    for (int a = 0; a < nv; ++a) lumped_[elements_[e][a]] += share;
  }
}

Point Mesh::centroid(std::size_t e) const {
  const int nv = element_size();
  Point c;
  for (int a = 0; a < nv; ++a) {
    c.x += nodes_[elements_[e][a]].x;
    c.y += nodes_[elements_[e][a]].y;
  }
  c.x /= nv;
  c.y /= nv;
  return c;
}

double dist_to_boundary(const Point& p, int dim) {
  double d = std::min(p.x, 1.0 - p.x);
  if (dim == 2) d = std::min({d, p.y, 1.0 - p.y});
  return std::max(d, 0.0);
}

double dist_to_boundary(const Mesh& mesh, std::size_t node) {
  if (mesh.is_boundary(node)) return 0.0;
  return dist_to_boundary(mesh.node(node), mesh.dim());
}

}  // namespace coeffid
