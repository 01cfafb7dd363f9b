#include "coeffid/forward.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace coeffid {

TimeGrid TimeGrid::make(double final_time, int steps, double sigma) {
  if (!(final_time > 0.0)) throw std::invalid_argument("time grid: final time must be positive");
  if (steps < 1) throw std::invalid_argument("time grid: need at least one step");
  if (!(sigma >= 0.0 && sigma < final_time)) {
    throw std::invalid_argument("time grid: observation window must satisfy 0 <= sigma < T");
  }
  const double k = (final_time - sigma) * steps / final_time;
  const double kr = std::round(k);
  if (std::abs(k - kr) > 1e-9 * std::max(1.0, k)) {
    throw std::invalid_argument("time grid: (T - sigma)/tau = " + std::to_string(k) +
                                " is not an integer");
  }
  TimeGrid g;
  g.final_time = final_time;
  g.steps = steps;
  // sigma = 0 would give N + 1; the last interval (t_{N-1}, t_N] is observed instead
  g.first_observed = std::min(static_cast<int>(kr) + 1, steps);
  return g;
}

EllipticSolver::EllipticSolver(MeshPtr mesh, const ScalarField& f) : mesh_(std::move(mesh)) {
  load_ = gather_interior(*mesh_, assemble_load(*mesh_, f));
}

CholeskyFactor EllipticSolver::factor(std::span<const double> q) const {
  return CholeskyFactor(restrict_interior(*mesh_, assemble_stiffness(*mesh_, q)));
}

std::vector<double> EllipticSolver::solve(std::span<const double> q) const {
  return solve(factor(q));
}

std::vector<double> EllipticSolver::solve(const CholeskyFactor& k) const {
  return scatter_interior(*mesh_, k.solve(load_));
}

std::vector<double> EllipticSolver::solve_with_rhs(std::span<const double> q,
                                                   std::span<const double> rhs) const {
  return solve_with_rhs(factor(q), rhs);
}

std::vector<double> EllipticSolver::solve_with_rhs(const CholeskyFactor& k,
                                                   std::span<const double> rhs) const {
  return scatter_interior(*mesh_, k.solve(gather_interior(*mesh_, rhs)));
}

FeFunction solve_elliptic(const FeFunction& q, const ScalarField& f) {
  EllipticSolver solver(q.mesh_ptr(), f);
  return FeFunction(q.mesh_ptr(), solver.solve(q.values()), Space::zero_trace);
}

namespace {
// Loads are cached when all time levels fit in this many doubles.
constexpr std::size_t kLoadCacheLimit = std::size_t{1} << 22;
}  // namespace

ParabolicSolver::ParabolicSolver(MeshPtr mesh, const TimeGrid& grid, const TimeField& f,
                                 const ScalarField& u0)
    : mesh_(std::move(mesh)), grid_(grid), source_(f) {
  mass_ = restrict_interior(*mesh_, assemble_mass(*mesh_));
  initial_ = gather_interior(*mesh_, l2_project(mesh_, u0).values());
  if (static_cast<std::size_t>(grid_.steps) * mesh_->num_interior() <= kLoadCacheLimit) {
    std::vector<std::vector<double>> loads(grid_.steps + 1);
    for (int n = 1; n <= grid_.steps; ++n) loads[n] = interior_load(n);
    loads_ = std::move(loads);
  }
}

std::vector<double> ParabolicSolver::interior_load(int n) const {
  if (!loads_.empty()) return loads_[n];
  const double t = grid_.t(n);
  const auto idx = mesh_->interior_nodes();
  const auto w = mesh_->lumped_mass();
  std::vector<double> b(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) b[k] = w[idx[k]] * source_(mesh_->node(idx[k]), t);
  return b;
}

CsrMatrix ParabolicSolver::step_matrix(std::span<const double> q) const {
  const CsrMatrix k = restrict_interior(*mesh_, assemble_stiffness(*mesh_, q));
  return add_scaled(mass_, grid_.tau(), k);
}

CholeskyFactor ParabolicSolver::factor(std::span<const double> q) const {
  return CholeskyFactor(step_matrix(q));
}

void ParabolicSolver::solve(std::span<const double> q, const Visitor& visit) const {
  solve(factor(q), visit);
}

void ParabolicSolver::solve(const CholeskyFactor& step, const Visitor& visit) const {
  const double tau = grid_.tau();
  std::vector<double> u = initial_;
  std::vector<double> rhs(u.size());
  visit(0, scatter_interior(*mesh_, u));
  for (int n = 1; n <= grid_.steps; ++n) {
    matvec(mass_, u, rhs);
    const auto b = interior_load(n);
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] += tau * b[i];
    step.solve_into(rhs, u);
    visit(n, scatter_interior(*mesh_, u));
  }
}

std::vector<std::vector<double>> ParabolicSolver::solve(std::span<const double> q) const {
  std::vector<std::vector<double>> states(grid_.steps + 1);
  solve(q, [&](int n, std::span<const double> s) { states[n].assign(s.begin(), s.end()); });
  return states;
}

std::vector<std::vector<double>> ParabolicSolver::solve_adjoint(
    std::span<const double> q, const std::vector<std::vector<double>>& forcing) const {
  return solve_adjoint(factor(q), forcing);
}

std::vector<std::vector<double>> ParabolicSolver::solve_adjoint(
    const CholeskyFactor& step, const std::vector<std::vector<double>>& forcing) const {
  const std::size_t ni = mesh_->num_interior();
  std::vector<std::vector<double>> adj(grid_.steps + 1);
  adj[0].assign(mesh_->num_nodes(), 0.0);
  std::vector<double> p(ni, 0.0), rhs(ni);
  for (int n = grid_.steps; n >= 1; --n) {
    matvec(mass_, p, rhs);
    if (n < static_cast<int>(forcing.size()) && !forcing[n].empty()) {
      for (std::size_t i = 0; i < ni; ++i) rhs[i] += forcing[n][i];
    }
    step.solve_into(rhs, p);
    adj[n] = scatter_interior(*mesh_, p);
  }
  return adj;
}

TimeSeriesFe solve_parabolic(const FeFunction& q, const TimeField& f, const ScalarField& u0,
                             const TimeGrid& grid) {
  ParabolicSolver solver(q.mesh_ptr(), grid, f, u0);
  TimeSeriesFe out{grid, {}};
  out.states.reserve(grid.steps + 1);
  solver.solve(q.values(), [&](int, std::span<const double> s) {
    out.states.emplace_back(q.mesh_ptr(), std::vector<double>(s.begin(), s.end()),
                            Space::zero_trace);
  });
  return out;
}

}  // namespace coeffid
