#include "coeffid/fe_function.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace coeffid {

FeFunction::FeFunction(MeshPtr mesh, std::vector<double> values, Space space)
    : mesh_(std::move(mesh)), values_(std::move(values)), space_(space) {
  if (!mesh_) throw std::invalid_argument("FeFunction without mesh");
  if (values_.size() != mesh_->num_nodes()) {
    throw std::invalid_argument("FeFunction has " + std::to_string(values_.size()) +
                                " values for a mesh with " +
                                std::to_string(mesh_->num_nodes()) + " nodes");
  }
  if (space_ == Space::zero_trace) {
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (mesh_->is_boundary(i) && values_[i] != 0.0) {
        throw std::invalid_argument("zero-trace FeFunction is nonzero at boundary node " +
                                    std::to_string(i));
      }
    }
  }
}

FeFunction FeFunction::zeros(MeshPtr mesh, Space space) {
  const std::size_t n = mesh->num_nodes();
  return FeFunction(std::move(mesh), std::vector<double>(n, 0.0), space);
}

FeFunction FeFunction::constant(MeshPtr mesh, double value) {
  const std::size_t n = mesh->num_nodes();
  return FeFunction(std::move(mesh), std::vector<double>(n, value), Space::full);
}

FeFunction FeFunction::with_zero_trace() const {
  std::vector<double> v = values_;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (mesh_->is_boundary(i)) v[i] = 0.0;
  }
  return FeFunction(mesh_, std::move(v), Space::zero_trace);
}

namespace {

int refinement_ratio(const Mesh& fine, const Mesh& coarse) {
  if (fine.dim() != coarse.dim()) {
    throw std::invalid_argument("mesh transfer between different dimensions");
  }
  if (fine.cells() % coarse.cells() != 0) {
    throw std::invalid_argument("coarse cell count " + std::to_string(coarse.cells()) +
                                " does not divide fine cell count " +
                                std::to_string(fine.cells()));
  }
  return fine.cells() / coarse.cells();
}

}  // namespace

FeFunction transfer_nodal(const FeFunction& fine, const MeshPtr& coarse) {
  const Mesh& fm = fine.mesh();
  const int r = refinement_ratio(fm, *coarse);
  const int n = coarse->cells();
  std::vector<double> v(coarse->num_nodes());
  if (coarse->dim() == 1) {
    for (int i = 0; i <= n; ++i) v[i] = fine[fm.node_index(i * r)];
  } else {
    for (int j = 0; j <= n; ++j) {
      for (int i = 0; i <= n; ++i) {
        v[coarse->node_index(i, j)] = fine[fm.node_index(i * r, j * r)];
      }
    }
  }
  return FeFunction(coarse, std::move(v), fine.space());
}

FeFunction prolong_nodal(const FeFunction& coarse, const MeshPtr& fine) {
  const Mesh& cm = coarse.mesh();
  const int r = refinement_ratio(*fine, cm);
  const int nf = fine->cells();
  std::vector<double> v(fine->num_nodes());
  if (cm.dim() == 1) {
    for (int i = 0; i <= nf; ++i) {
      const int ci = std::min(i / r, cm.cells() - 1);
      const double s = static_cast<double>(i - ci * r) / r;
      v[i] = (1.0 - s) * coarse[ci] + s * coarse[ci + 1];
    }
  } else {
    for (int j = 0; j <= nf; ++j) {
      const int cj = std::min(j / r, cm.cells() - 1);
      const double t = static_cast<double>(j - cj * r) / r;
      for (int i = 0; i <= nf; ++i) {
        const int ci = std::min(i / r, cm.cells() - 1);
        const double s = static_cast<double>(i - ci * r) / r;
        const double v00 = coarse[cm.node_index(ci, cj)];
        const double v10 = coarse[cm.node_index(ci + 1, cj)];
        const double v01 = coarse[cm.node_index(ci, cj + 1)];
        const double v11 = coarse[cm.node_index(ci + 1, cj + 1)];
        // lower triangle (v00, v10, v11) when t <= s, upper (v00, v11, v01) otherwise
        v[fine->node_index(i, j)] = t <= s ? v00 + s * (v10 - v00) + t * (v11 - v10)
                                           : v00 + s * (v11 - v01) + t * (v01 - v00);
      }
    }
  }
  return FeFunction(fine, std::move(v), coarse.space());
}

}  // namespace coeffid
