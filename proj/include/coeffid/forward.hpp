#pragma once

#include <functional>
#include <span>
#include <vector>

#include "coeffid/fe_function.hpp"
#include "coeffid/fem.hpp"
#include "coeffid/sparse.hpp"

namespace coeffid {

/// Uniform grid t_n = n*tau on [0, T] with an observation window starting at index first_observed.
struct TimeGrid {
  double final_time = 0.0;
  int steps = 0;
  /// N_sigma: first step whose averaging interval (t_{n-1}, t_n] lies in [T - sigma, T].
  int first_observed = 0;

  /// Builds the grid for window length sigma in [0, T). (T - sigma)/tau must be an integer
  /// up to 1e-9. sigma = 0 observes the last step only.
  static TimeGrid make(double final_time, int steps, double sigma);

  double tau() const { return final_time / steps; }
  double t(int n) const { return final_time * n / steps; }
  int observed_count() const { return steps - first_observed + 1; }
};

/// Interior-unknown vectors of all time levels n = 0..N.
struct TimeSeriesFe {
  TimeGrid grid;
  std::vector<FeFunction> states;
};

/// Galerkin solution of -div(q grad u) = f, u = 0 on the boundary.
FeFunction solve_elliptic(const FeFunction& q, const ScalarField& f);

/// Backward Euler in time, P1 in space, U^0 = P_h u0.
TimeSeriesFe solve_parabolic(const FeFunction& q, const TimeField& f, const ScalarField& u0,
                             const TimeGrid& grid);

/// Reusable elliptic solver: caches the interior load vector of one mesh and source.
class EllipticSolver {
 public:
  EllipticSolver(MeshPtr mesh, const ScalarField& f);

  const MeshPtr& mesh() const { return mesh_; }
  /// Factor of the interior stiffness matrix K_I(q).
  CholeskyFactor factor(std::span<const double> q) const;
  /// Nodal (full-length, zero on the boundary) state for coefficient q.
  std::vector<double> solve(std::span<const double> q) const;
  std::vector<double> solve(const CholeskyFactor& k) const;
  /// Solve K_I(q) x = rhs on interior unknowns; rhs and result are nodal vectors.
  std::vector<double> solve_with_rhs(std::span<const double> q, std::span<const double> rhs) const;
  std::vector<double> solve_with_rhs(const CholeskyFactor& k, std::span<const double> rhs) const;

 private:
  MeshPtr mesh_;
  std::vector<double> load_;
};

/// Reusable backward-Euler solver for one mesh, grid, source and initial value.
///
/// States are stored as nodal vectors (zero on the boundary) for n = 0..N.
/// The system matrix M + tau K(q) is assembled and factored once per call.
class ParabolicSolver {
 public:
  using Visitor = std::function<void(int, std::span<const double>)>;

  ParabolicSolver(MeshPtr mesh, const TimeGrid& grid, const TimeField& f, const ScalarField& u0);

  const MeshPtr& mesh() const { return mesh_; }
  const TimeGrid& grid() const { return grid_; }
  const CsrMatrix& interior_mass() const { return mass_; }
  /// Interior system matrix M + tau K(q).
  CsrMatrix step_matrix(std::span<const double> q) const;
  CholeskyFactor factor(std::span<const double> q) const;

  std::vector<std::vector<double>> solve(std::span<const double> q) const;
  /// Streams the nodal states to visit(n, state) for n = 0..N without storing them.
  void solve(std::span<const double> q, const Visitor& visit) const;
  void solve(const CholeskyFactor& step, const Visitor& visit) const;

  /// Solves (M + tau K) P^n = M P^{n+1} + forcing[n] backward from P^{N+1} = 0 for n = N..1.
  /// forcing[n] is an interior vector (empty means zero); returns nodal P^n, with P^0 = 0.
  std::vector<std::vector<double>> solve_adjoint(
      std::span<const double> q, const std::vector<std::vector<double>>& forcing) const;
  std::vector<std::vector<double>> solve_adjoint(
      const CholeskyFactor& step, const std::vector<std::vector<double>>& forcing) const;

 private:
  MeshPtr mesh_;
  TimeGrid grid_;
  CsrMatrix mass_;
  std::vector<double> interior_load(int n) const;

  TimeField source_;
  std::vector<std::vector<double>> loads_;  // cached interior b(t_n) at [n], empty if too large
  std::vector<double> initial_;             // interior U^0
};

}  // namespace coeffid
