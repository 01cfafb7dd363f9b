#include "coeffid/inverse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "coeffid/fem.hpp"

namespace coeffid {

void AdmissibleBox::validate() const {
  if (!(c0 > 0.0 && c0 < c1)) {
    throw std::invalid_argument("admissible box needs 0 < c0 < c1");
  }
}

bool AdmissibleBox::contains(std::span<const double> q) const {
  return std::all_of(q.begin(), q.end(), [&](double v) { return v >= c0 && v <= c1; });
}

void project_box(std::span<double> q, const AdmissibleBox& box) {
  for (double& v : q) v = std::clamp(v, box.c0, box.c1);
}

FeFunction project_box(const FeFunction& q, const AdmissibleBox& box) {
  std::vector<double> v(q.values().begin(), q.values().end());
  project_box(v, box);
  return FeFunction(q.mesh_ptr(), std::move(v), q.space());
}

namespace {

std::vector<double> difference(std::span<const double> a, std::span<const double> b) {
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return d;
}

void check_same_mesh(const Mesh& a, const Mesh& b, const char* what) {
  if (&a != &b && (a.dim() != b.dim() || a.cells() != b.cells())) {
    throw std::invalid_argument(std::string(what) + " lives on a different mesh");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Elliptic

EllipticObjective::EllipticObjective(EllipticInverseProblem problem)
    : problem_(std::move(problem)), solver_(problem_.mesh, problem_.f) {
  problem_.box.validate();
  if (!(problem_.gamma >= 0.0)) throw std::invalid_argument("gamma must be nonnegative");
  check_same_mesh(problem_.z.mesh(), *problem_.mesh, "observation");
  mass_ = assemble_mass(*problem_.mesh);
  laplacian_ = assemble_laplacian(*problem_.mesh);
}

std::pair<double, double> EllipticObjective::parts(std::span<const double> q) const {
  const Mesh& mesh = *problem_.mesh;
  const auto u = solver_.solve(q);
  const auto r = difference(u, problem_.z.values());
  return {0.5 * mass_inner(mesh, r, r), 0.5 * problem_.gamma * stiffness_inner(mesh, q, q)};
}

double EllipticObjective::value(std::span<const double> q) const {
  const auto [fit, pen] = parts(q);
  return fit + pen;
}

double EllipticObjective::value_and_gradient(std::span<const double> q,
                                             std::span<double> grad) const {
  const Mesh& mesh = *problem_.mesh;
  const CholeskyFactor k = solver_.factor(q);
  const auto u = solver_.solve(k);
  const auto r = difference(u, problem_.z.values());
  const auto mr = matvec(mass_, r);
  // adjoint: K(q) p = M (u - z) on X_h; then dJ/dq_j = -(phi_j grad u, grad p)
  const auto p = solver_.solve_with_rhs(k, mr);
  const auto sens = coefficient_sensitivity(mesh, u, p);
  const auto kq = matvec(laplacian_, q);
  for (std::size_t j = 0; j < grad.size(); ++j) grad[j] = -sens[j] + problem_.gamma * kq[j];
  return 0.5 * mass_inner(mesh, r, r) + 0.5 * problem_.gamma * stiffness_inner(mesh, q, q);
}

namespace {

// B(u) v on interior unknowns: sum over elements of mean_T(v) |T| grad u . grad phi_i.
// Its transpose is coefficient_sensitivity(mesh, u, .).
std::vector<double> apply_coefficient_derivative(const Mesh& mesh, std::span<const double> u,
                                                 std::span<const double> v) {
  const int nv = mesh.element_size();
  std::vector<double> out(mesh.num_nodes(), 0.0);
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const auto& el = mesh.element(e);
    double mean = 0.0;
    for (int a = 0; a < nv; ++a) mean += v[el[a]];
    mean /= nv;
    const Point gu = element_gradient(mesh, e, u);
    const double c = mean * mesh.measure(e);
    for (int a = 0; a < nv; ++a) {
      const Point ga = mesh.grad(e, a);
      out[el[a]] += c * (gu.x * ga.x + gu.y * ga.y);
    }
  }
  return out;
}

class EllipticGaussNewton : public LinearOperator {
 public:
  EllipticGaussNewton(const EllipticSolver& solver, const CsrMatrix& mass,
                      const CsrMatrix& laplacian, double gamma, std::span<const double> q)
      : solver_(solver), mass_(mass), laplacian_(laplacian), gamma_(gamma),
        k_(solver.factor(q)), u_(solver.solve(k_)) {}

  void apply(std::span<const double> v, std::span<double> out) const override {
    const Mesh& mesh = *solver_.mesh();
    // du = S v solves K du = -B(u) v; then S^T M S v = -B(u)^T K^{-1} M du
    auto du = solver_.solve_with_rhs(k_, apply_coefficient_derivative(mesh, u_, v));
    for (double& x : du) x = -x;
    const auto p = solver_.solve_with_rhs(k_, matvec(mass_, du));
    const auto sens = coefficient_sensitivity(mesh, u_, p);
    const auto kv = matvec(laplacian_, v);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = -sens[j] + gamma_ * kv[j];
  }

 private:
  const EllipticSolver& solver_;
  const CsrMatrix& mass_;
  const CsrMatrix& laplacian_;
  double gamma_;
  CholeskyFactor k_;
  std::vector<double> u_;
};

class ParabolicGaussNewton : public LinearOperator {
 public:
  ParabolicGaussNewton(const ParabolicSolver& solver, const CsrMatrix& laplacian, double gamma,
                       std::span<const double> q)
      : solver_(solver), laplacian_(laplacian), gamma_(gamma), step_(solver.factor(q)),
        states_(solver.grid().steps + 1) {
    solver_.solve(step_, [&](int n, std::span<const double> u) {
      states_[n].assign(u.begin(), u.end());
    });
  }

  void apply(std::span<const double> v, std::span<double> out) const override {
    const Mesh& mesh = *solver_.mesh();
    const TimeGrid& grid = solver_.grid();
    const double tau = grid.tau();
    const CsrMatrix& mass = solver_.interior_mass();
    const std::size_t ni = mesh.num_interior();
    // linearized march: (M + tau K) dU^n = M dU^{n-1} - tau B(U^n) v, dU^0 = 0
    std::vector<double> du(ni, 0.0), rhs(ni);
    std::vector<std::vector<double>> forcing(grid.steps + 1);
    for (int n = 1; n <= grid.steps; ++n) {
      matvec(mass, du, rhs);
      const auto bv = gather_interior(mesh, apply_coefficient_derivative(mesh, states_[n], v));
      for (std::size_t i = 0; i < ni; ++i) rhs[i] -= tau * bv[i];
      step_.solve_into(rhs, du);
      if (n >= grid.first_observed) {
        auto f = matvec(mass, du);
        for (double& x : f) x *= 2.0 * tau;
        forcing[n] = std::move(f);
      }
    }
    const auto adj = solver_.solve_adjoint(step_, forcing);
    std::fill(out.begin(), out.end(), 0.0);
    for (int n = 1; n <= grid.steps; ++n) {
      const auto sens = coefficient_sensitivity(mesh, states_[n], adj[n]);
      for (std::size_t j = 0; j < out.size(); ++j) out[j] -= tau * sens[j];
    }
    const auto kv = matvec(laplacian_, v);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += gamma_ * kv[j];
  }

 private:
  const ParabolicSolver& solver_;
  const CsrMatrix& laplacian_;
  double gamma_;
  CholeskyFactor step_;
  std::vector<std::vector<double>> states_;
};

}  // namespace

std::unique_ptr<LinearOperator> EllipticObjective::gauss_newton(std::span<const double> q) const {
  return std::make_unique<EllipticGaussNewton>(solver_, mass_, laplacian_, problem_.gamma, q);
}

std::unique_ptr<LinearOperator> ParabolicObjective::gauss_newton(std::span<const double> q) const {
  return std::make_unique<ParabolicGaussNewton>(solver_, laplacian_, problem_.gamma, q);
}

double objective_elliptic(const EllipticInverseProblem& p, const FeFunction& q) {
  return EllipticObjective(p).value(q.values());
}

std::vector<double> gradient_elliptic(const EllipticInverseProblem& p, const FeFunction& q) {
  std::vector<double> g(q.size());
  EllipticObjective(p).value_and_gradient(q.values(), g);
  return g;
}

// ---------------------------------------------------------------------------
// Parabolic

ParabolicObjective::ParabolicObjective(ParabolicInverseProblem problem)
    : problem_(std::move(problem)),
      solver_(problem_.mesh, problem_.grid, problem_.f, problem_.u0) {
  problem_.box.validate();
  if (!(problem_.gamma >= 0.0)) throw std::invalid_argument("gamma must be nonnegative");
  if (static_cast<int>(problem_.z_seq.size()) != problem_.grid.observed_count()) {
    throw std::invalid_argument("parabolic observation has " +
                                std::to_string(problem_.z_seq.size()) + " levels, expected " +
                                std::to_string(problem_.grid.observed_count()));
  }
  for (const auto& z : problem_.z_seq) check_same_mesh(z.mesh(), *problem_.mesh, "observation");
  laplacian_ = assemble_laplacian(*problem_.mesh);
}

std::pair<double, double> ParabolicObjective::parts(std::span<const double> q) const {
  const Mesh& mesh = *problem_.mesh;
  const int first = problem_.grid.first_observed;
  double fit = 0.0;
  solver_.solve(q, [&](int n, std::span<const double> u) {
    if (n < first) return;
    const auto r = difference(u, problem_.z_seq[n - first].values());
    fit += mass_inner(mesh, r, r);
  });
  return {problem_.grid.tau() * fit, 0.5 * problem_.gamma * stiffness_inner(mesh, q, q)};
}

double ParabolicObjective::value(std::span<const double> q) const {
  const auto [fit, pen] = parts(q);
  return fit + pen;
}

double ParabolicObjective::value_and_gradient(std::span<const double> q,
                                              std::span<double> grad) const {
  const Mesh& mesh = *problem_.mesh;
  const TimeGrid& grid = problem_.grid;
  const double tau = grid.tau();
  const int first = grid.first_observed;

  const CholeskyFactor step = solver_.factor(q);
  std::vector<std::vector<double>> states(grid.steps + 1);
  solver_.solve(step, [&](int n, std::span<const double> u) { states[n].assign(u.begin(), u.end()); });
  std::vector<std::vector<double>> forcing(grid.steps + 1);
  double fit = 0.0;
  for (int n = first; n <= grid.steps; ++n) {
    const auto r = difference(states[n], problem_.z_seq[n - first].values());
    fit += mass_inner(mesh, r, r);
    auto mr = matvec(solver_.interior_mass(), gather_interior(mesh, r));
    for (double& v : mr) v *= 2.0 * tau;
    forcing[n] = std::move(mr);
  }
  const auto adj = solver_.solve_adjoint(step, forcing);

  std::fill(grad.begin(), grad.end(), 0.0);
  for (int n = 1; n <= grid.steps; ++n) {
    const auto sens = coefficient_sensitivity(mesh, states[n], adj[n]);
    for (std::size_t j = 0; j < grad.size(); ++j) grad[j] -= tau * sens[j];
  }
  const auto kq = matvec(laplacian_, q);
  for (std::size_t j = 0; j < grad.size(); ++j) grad[j] += problem_.gamma * kq[j];
  return tau * fit + 0.5 * problem_.gamma * stiffness_inner(mesh, q, q);
}

double objective_parabolic(const ParabolicInverseProblem& p, const FeFunction& q) {
  return ParabolicObjective(p).value(q.values());
}

std::vector<double> gradient_parabolic(const ParabolicInverseProblem& p, const FeFunction& q) {
  std::vector<double> g(q.size());
  ParabolicObjective(p).value_and_gradient(q.values(), g);
  return g;
}

// ---------------------------------------------------------------------------
// Optimizer

void OptimizerOptions::validate() const {
  if (max_iters < 0 || inner_iters < 1 || !(inner_tol > 0.0) || !(grad_rel_tol > 0.0) || !(obj_rel_tol > 0.0) || !(armijo_c > 0.0) ||
      !(armijo_c < 1.0) || !(backtrack_factor > 0.0 && backtrack_factor < 1.0) ||
      max_backtracks < 1 || !(initial_step > 0.0) || !(sobolev_length > 0.0)) {
    throw std::invalid_argument("invalid optimizer options");
  }
}

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::gradient_tolerance: return "gradient_tolerance";
    case Termination::objective_stall: return "objective_stall";
    case Termination::max_iterations: return "max_iterations";
    case Termination::stagnation: return "stagnation";
  }
  return "unknown";
}

namespace {

double sup_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Maps a Euclidean gradient g to the search-space gradient r = B^{-1} g.
class SearchSpace {
 public:
  SearchSpace(const Objective& objective, const OptimizerOptions& opts)
      : objective_(objective), opts_(opts), metric_(opts.metric) {
    const Mesh* mesh = objective.mesh();
    if (metric_ == SearchMetric::euclidean || mesh == nullptr) {
      metric_ = SearchMetric::euclidean;
      return;
    }
    const auto w = mesh->lumped_mass();
    lumped_.assign(w.begin(), w.end());
    if (metric_ == SearchMetric::lumped_mass) return;
    const double l2 = opts.sobolev_length * opts.sobolev_length;
    CsrMatrix gram = assemble_laplacian(*mesh);
    for (double& v : gram.vals) v *= l2;
    for (std::size_t i = 0; i < gram.n; ++i) gram.vals[gram.find(i, i)] += lumped_[i];
    gram_ = CholeskyFactor(gram);
  }

  /// r = B^{-1} g for the fixed part of the metric.
  void base(std::span<const double> g, std::span<double> r) const {
    switch (metric_) {
      case SearchMetric::euclidean:
        std::copy(g.begin(), g.end(), r.begin());
        return;
      case SearchMetric::lumped_mass:
        for (std::size_t i = 0; i < g.size(); ++i) r[i] = g[i] / lumped_[i];
        return;
      case SearchMetric::sobolev:
      case SearchMetric::gauss_newton:
        gram_.solve_into(g, r);
        return;
    }
  }

  /// Preconditioned gradient at q.
  void direction(std::span<const double> q, std::span<const double> g, std::vector<double>& r) const {
    r.resize(g.size());
    if (metric_ != SearchMetric::gauss_newton) {
      base(g, r);
      return;
    }
    const auto hessian = objective_.gauss_newton(q);
    if (!hessian) {
      base(g, r);
      return;
    }
    truncated_cg(*hessian, g, r);
  }

 private:
  // A few preconditioned CG steps on H r = g from r = 0. Falls back to the preconditioned
  // gradient if H shows no positive curvature along the first direction.
  void truncated_cg(const LinearOperator& h, std::span<const double> g, std::vector<double>& x) const {
    const std::size_t n = g.size();
    std::vector<double> res(g.begin(), g.end()), z(n), p(n), hp(n);
    std::fill(x.begin(), x.end(), 0.0);
    base(res, z);
    p = z;
    double rz = dot(res, z);
    const double rz0 = rz;
    for (int k = 0; k < opts_.inner_iters; ++k) {
      h.apply(p, hp);
      const double php = dot(p, hp);
      if (!(php > 0.0)) {
        if (k == 0) x = z;
        return;
      }
      const double alpha = rz / php;
      for (std::size_t i = 0; i < n; ++i) {
        x[i] += alpha * p[i];
        res[i] -= alpha * hp[i];
      }
      base(res, z);
      const double rz_new = dot(res, z);
      if (rz_new <= opts_.inner_tol * opts_.inner_tol * rz0) return;
      for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + (rz_new / rz) * p[i];
      rz = rz_new;
    }
  }

  const Objective& objective_;
  const OptimizerOptions& opts_;
  SearchMetric metric_;
  std::vector<double> lumped_;
  CholeskyFactor gram_;
};

}  // namespace

OptimizeResult ncg_minimize(const Objective& objective, const FeFunction& q0,
                            const AdmissibleBox& box, const OptimizerOptions& opts,
                            const IterateObserver& observer) {
  opts.validate();
  box.validate();
  const std::size_t n = objective.size();
  if (q0.size() != n) throw std::invalid_argument("ncg_minimize: initial guess has wrong size");
  if (!box.contains(q0.values())) {
    throw std::invalid_argument("ncg_minimize: initial guess violates the admissible box");
  }
  const SearchSpace space(objective, opts);

  std::vector<double> q(q0.values().begin(), q0.values().end());
  std::vector<double> g(n), r, d(n), work(n);
  auto grad_norm = [&](std::span<const double> grad) {
    space.base(grad, work);
    return std::sqrt(std::max(dot(grad, work), 0.0));
  };

  OptimizeResult res{q0, {}, {}, 0, Termination::max_iterations};
  double J = objective.value_and_gradient(q, g);
  space.direction(q, g, r);
  double gr = dot(g, r);
  double gnorm = grad_norm(g);
  const double gnorm0 = gnorm;
  res.objective_history.push_back(J);
  res.grad_norm_history.push_back(gnorm0);
  if (observer) observer(0, q);

  auto finish = [&](Termination t) {
    res.termination = t;
    res.q_star = FeFunction(q0.mesh_ptr(), q, Space::full);
    return res;
  };

  // One point on the projected search path q -> P(q + alpha d).
  struct Trial {
    double alpha = 0.0;
    double value = 0.0;
    double slope0 = 0.0;  ///< g(q) . (x - q) / alpha
    double slope = 0.0;   ///< g(x) . (x - q) / alpha
    bool armijo = false;
    std::vector<double> x, grad;
  };
  auto evaluate = [&](double alpha) {
    Trial t;
    t.alpha = alpha;
    t.x.resize(n);
    t.grad.resize(n);
    for (std::size_t i = 0; i < n; ++i) t.x[i] = q[i] + alpha * d[i];
    project_box(t.x, box);
    t.value = objective.value_and_gradient(t.x, t.grad);
    for (std::size_t i = 0; i < n; ++i) {
      t.slope0 += g[i] * (t.x[i] - q[i]);
      t.slope += t.grad[i] * (t.x[i] - q[i]);
    }
    t.armijo = t.value < J && t.value <= J + opts.armijo_c * t.slope0;
    t.slope0 /= alpha;
    t.slope /= alpha;
    return t;
  };

  double prev_alpha = 0.0;
  double prev_slope = 0.0;
  for (std::size_t i = 0; i < n; ++i) d[i] = -r[i];

  for (int k = 0;; ++k) {
    if (gnorm == 0.0 || gnorm <= opts.grad_rel_tol * gnorm0) {
      return finish(Termination::gradient_tolerance);
    }
    if (k >= opts.max_iters) return finish(Termination::max_iterations);

    double slope = dot(g, d);
    bool steepest = false;
    if (!(slope < 0.0)) {
      for (std::size_t i = 0; i < n; ++i) d[i] = -r[i];
      slope = -gr;
      steepest = true;
    }

    std::optional<Trial> best;
    while (true) {
      const double alpha_max = (box.c1 - box.c0) / sup_norm(d);
      double alpha = prev_alpha > 0.0 ? prev_alpha * prev_slope / slope
                                      : opts.initial_step / sup_norm(d);
      alpha = std::min(alpha, alpha_max);
      for (int b = 0; b <= opts.max_backtracks; ++b) {
        Trial t = evaluate(alpha);
        if (t.armijo) {
          best = std::move(t);
          break;
        }
        // minimizer of the quadratic through J, the initial slope and the trial value
        const double curv = (t.value - J - t.slope0 * alpha) / (alpha * alpha);
        const double alpha_q = curv > 0.0 ? -t.slope0 / (2.0 * curv) : 0.0;
        alpha = std::clamp(alpha_q, 0.1 * alpha, opts.backtrack_factor * alpha);
      }
      if (best || steepest) break;
      // retry once along the steepest descent direction
      for (std::size_t i = 0; i < n; ++i) d[i] = -r[i];
      slope = -gr;
      steepest = true;
      prev_alpha = 0.0;
    }
    if (!best) return finish(Termination::stagnation);

    // Secant refinements on the directional derivative keep the search close to exact,
    // which conjugacy of successive directions relies on.
    for (int s = 0; s < 2; ++s) {
      const double lo = best->slope0;
      const double hi = best->slope;
      if (!(hi > lo) || std::abs(hi) <= 1e-3 * std::abs(lo)) break;
      const double alpha_s = std::min(best->alpha * lo / (lo - hi),
                                      std::min(10.0 * best->alpha, (box.c1 - box.c0) / sup_norm(d)));
      if (std::abs(alpha_s / best->alpha - 1.0) < 0.02) break;
      Trial t = evaluate(alpha_s);
      if (!t.armijo || t.value >= best->value) break;
      best = std::move(t);
    }
    prev_alpha = best->alpha;
    prev_slope = slope;

    std::vector<double> r_new;
    space.direction(best->x, best->grad, r_new);
    const double gr_new = dot(best->grad, r_new);
    double num = 0.0;
    for (std::size_t i = 0; i < n; ++i) num += best->grad[i] * (r_new[i] - r[i]);
    const double beta = gr > 0.0 ? std::max(0.0, num / gr) : 0.0;
    for (std::size_t i = 0; i < n; ++i) d[i] = -r_new[i] + beta * d[i];

    const double rel_decrease =
        (J - best->value) / std::max(std::abs(J), std::numeric_limits<double>::min());
    q = std::move(best->x);
    g = std::move(best->grad);
    r = std::move(r_new);
    gr = gr_new;
    J = best->value;
    gnorm = grad_norm(g);
    ++res.iterations;
    res.objective_history.push_back(J);
    res.grad_norm_history.push_back(gnorm);
    if (observer) observer(res.iterations, q);
    if (rel_decrease <= opts.obj_rel_tol) return finish(Termination::objective_stall);
  }
}

}  // namespace coeffid
