#pragma once

#include <functional>
#include <span>
#include <vector>

#include "coeffid/mesh.hpp"

namespace coeffid {

/// Full P1 space V_h or the zero-trace subspace X_h.
enum class Space { full, zero_trace };

/// Analytic data on the closed domain (coefficients, sources, initial values).
using ScalarField = std::function<double(const Point&)>;
/// Space-time data f(x, t).
using TimeField = std::function<double(const Point&, double)>;

/// Nodal P1 function. A zero_trace function is exactly zero on boundary nodes.
class FeFunction {
 public:
  FeFunction(MeshPtr mesh, std::vector<double> values, Space space = Space::full);
  static FeFunction zeros(MeshPtr mesh, Space space = Space::full);
  static FeFunction constant(MeshPtr mesh, double value);

  const Mesh& mesh() const { return *mesh_; }
  const MeshPtr& mesh_ptr() const { return mesh_; }
  Space space() const { return space_; }

  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }

  /// Copy of this function with boundary values set to zero.
  FeFunction with_zero_trace() const;

 private:
  MeshPtr mesh_;
  std::vector<double> values_;
  Space space_;
};

/// Restrict a fine structured-mesh function to a coarse mesh by sampling coinciding nodes.
/// Requires equal dimension and that the coarse cell count divides the fine one.
FeFunction transfer_nodal(const FeFunction& fine, const MeshPtr& coarse);

/// Evaluate a coarse P1 function at the nodes of a nested fine mesh.
FeFunction prolong_nodal(const FeFunction& coarse, const MeshPtr& fine);

}  // namespace coeffid
