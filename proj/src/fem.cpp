#include "coeffid/fem.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace coeffid {

namespace {

CsrMatrix empty_pattern(const Mesh& mesh) {
  return CsrMatrix::from_pattern(mesh.adjacency_row_ptr(), mesh.adjacency_cols());
}

// Adds the local block of element e into a matrix with the mesh adjacency pattern.
template <class LocalEntry>
void scatter_element(const Mesh& mesh, std::size_t e, CsrMatrix& m, LocalEntry&& entry) {
  const auto& el = mesh.element(e);
  const int nv = mesh.element_size();
  for (int a = 0; a < nv; ++a) {
    for (int b = 0; b < nv; ++b) {
      const long k = m.find(el[a], el[b]);
      m.vals[k] += entry(a, b);
    }
  }
}

}  // namespace

CsrMatrix assemble_mass(const Mesh& mesh) {
  CsrMatrix m = empty_pattern(mesh);
  const int d = mesh.dim();
  const double denom = (d + 1) * (d + 2);
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const double base = mesh.measure(e) / denom;
    scatter_element(mesh, e, m, [&](int a, int b) { return a == b ? 2.0 * base : base; });
  }
  return m;
}

CsrMatrix assemble_stiffness(const Mesh& mesh, std::span<const double> q) {
  if (q.size() != mesh.num_nodes()) {
    throw std::invalid_argument("assemble_stiffness: coefficient has wrong length");
  }
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (!(q[i] > 0.0)) {
      throw std::invalid_argument("assemble_stiffness: coefficient is not positive at node " +
                                  std::to_string(i));
    }
  }
  CsrMatrix m = empty_pattern(mesh);
  const int nv = mesh.element_size();
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const auto& el = mesh.element(e);
    double qbar = 0.0;
    for (int a = 0; a < nv; ++a) qbar += q[el[a]];
    const double w = mesh.measure(e) * qbar / nv;
    scatter_element(mesh, e, m, [&](int a, int b) {
      const Point& ga = mesh.grad(e, a);
      const Point& gb = mesh.grad(e, b);
      return w * (ga.x * gb.x + ga.y * gb.y);
    });
  }
  return m;
}

CsrMatrix assemble_stiffness(const FeFunction& q) {
  return assemble_stiffness(q.mesh(), q.values());
}

CsrMatrix assemble_laplacian(const Mesh& mesh) {
  std::vector<double> one(mesh.num_nodes(), 1.0);
  return assemble_stiffness(mesh, one);
}

std::vector<double> assemble_load(const Mesh& mesh, const ScalarField& f) {
  std::vector<double> b(mesh.num_nodes());
  const auto w = mesh.lumped_mass();
  for (std::size_t i = 0; i < b.size(); ++i) b[i] = w[i] * f(mesh.node(i));
  return b;
}

CsrMatrix restrict_interior(const Mesh& mesh, const CsrMatrix& full) {
  std::vector<int> map(mesh.num_nodes());
  for (std::size_t i = 0; i < map.size(); ++i) map[i] = mesh.dof_of_node(i);
  return restrict_to(full, mesh.interior_nodes(), map);
}

std::vector<double> gather_interior(const Mesh& mesh, std::span<const double> full) {
  const auto idx = mesh.interior_nodes();
  std::vector<double> out(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) out[k] = full[idx[k]];
  return out;
}

std::vector<double> scatter_interior(const Mesh& mesh, std::span<const double> interior) {
  const auto idx = mesh.interior_nodes();
  std::vector<double> out(mesh.num_nodes(), 0.0);
  for (std::size_t k = 0; k < idx.size(); ++k) out[idx[k]] = interior[k];
  return out;
}

namespace {

// (f, phi_i) with a rule of degree 2 (two Gauss points per interval, edge midpoints on
// triangles), so that P1 data are integrated exactly against P1 test functions.
std::vector<double> projection_load(const Mesh& mesh, const ScalarField& f) {
  std::vector<double> b(mesh.num_nodes(), 0.0);
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const auto& el = mesh.element(e);
    if (mesh.dim() == 1) {
      const Point a = mesh.node(el[0]), c = mesh.node(el[1]);
      for (double s : {0.5 - 0.5 / std::sqrt(3.0), 0.5 + 0.5 / std::sqrt(3.0)}) {
        const double fx = f(Point{a.x + s * (c.x - a.x), 0.0}) * mesh.measure(e) / 2.0;
        b[el[0]] += (1.0 - s) * fx;
        b[el[1]] += s * fx;
      }
      continue;
    }
    for (int k = 0; k < 3; ++k) {
      const Point p = mesh.node(el[k]), r = mesh.node(el[(k + 1) % 3]);
      const double fx = f(Point{(p.x + r.x) / 2, (p.y + r.y) / 2}) * mesh.measure(e) / 3.0;
      b[el[k]] += 0.5 * fx;
      b[el[(k + 1) % 3]] += 0.5 * fx;
    }
  }
  return b;
}

}  // namespace

FeFunction l2_project(const MeshPtr& mesh, const ScalarField& f) {
  const CsrMatrix m = restrict_interior(*mesh, assemble_mass(*mesh));
  const auto b = gather_interior(*mesh, projection_load(*mesh, f));
  const auto x = cg_solve(m, b);
  return FeFunction(mesh, scatter_interior(*mesh, x), Space::zero_trace);
}

FeFunction lagrange_interpolate(const MeshPtr& mesh, const ScalarField& f) {
  std::vector<double> v(mesh->num_nodes());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(mesh->node(i));
  return FeFunction(mesh, std::move(v), Space::full);
}

double mass_inner(const Mesh& mesh, std::span<const double> u, std::span<const double> v) {
  const int nv = mesh.element_size();
  const double denom = (mesh.dim() + 1) * (mesh.dim() + 2);
  double s = 0.0;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const auto& el = mesh.element(e);
    double su = 0.0, sv = 0.0, suv = 0.0;
    for (int a = 0; a < nv; ++a) {
      su += u[el[a]];
      sv += v[el[a]];
      suv += u[el[a]] * v[el[a]];
    }
    s += mesh.measure(e) / denom * (suv + su * sv);
  }
  return s;
}

Point element_gradient(const Mesh& mesh, std::size_t e, std::span<const double> u) {
  const auto& el = mesh.element(e);
  Point g;
  for (int a = 0; a < mesh.element_size(); ++a) {
    g.x += u[el[a]] * mesh.grad(e, a).x;
    g.y += u[el[a]] * mesh.grad(e, a).y;
  }
  return g;
}

double stiffness_inner(const Mesh& mesh, std::span<const double> u, std::span<const double> v) {
  double s = 0.0;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const Point gu = element_gradient(mesh, e, u);
    const Point gv = element_gradient(mesh, e, v);
    s += mesh.measure(e) * (gu.x * gv.x + gu.y * gv.y);
  }
  return s;
}

double norm_l2(const FeFunction& v) {
  return std::sqrt(std::max(0.0, mass_inner(v.mesh(), v.values(), v.values())));
}

double seminorm_h1(const FeFunction& v) {
  return std::sqrt(std::max(0.0, stiffness_inner(v.mesh(), v.values(), v.values())));
}

double norm_linf(const FeFunction& v) {
  double m = 0.0;
  for (double x : v.values()) m = std::max(m, std::abs(x));
  return m;
}

std::vector<double> coefficient_sensitivity(const Mesh& mesh, std::span<const double> u,
                                            std::span<const double> p) {
  const int nv = mesh.element_size();
  std::vector<double> g(mesh.num_nodes(), 0.0);
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const Point gu = element_gradient(mesh, e, u);
    const Point gp = element_gradient(mesh, e, p);
    const double c = (gu.x * gp.x + gu.y * gp.y) * mesh.measure(e) / nv;
    const auto& el = mesh.element(e);
    for (int a = 0; a < nv; ++a) g[el[a]] += c;
  }
  return g;
}

}  // namespace coeffid
