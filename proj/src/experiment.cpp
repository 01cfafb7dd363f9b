#include "coeffid/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>

#include "coeffid/fem.hpp"

namespace coeffid {

std::mt19937_64 make_rng(const NoiseSpec& noise) {
  std::seed_seq seq{static_cast<std::uint32_t>(noise.seed), static_cast<std::uint32_t>(noise.seed >> 32),
                    static_cast<std::uint32_t>(noise.stream),
                    static_cast<std::uint32_t>(noise.stream >> 32)};
  return std::mt19937_64(seq);
}

namespace {

MeshPtr build_mesh(int dim, int cells) {
  return dim == 1 ? Mesh::interval(cells) : Mesh::unit_square(cells);
}

ScalarField at_time(const TimeField& f, double t) {
  return [f, t](const Point& x) { return f(x, t); };
}

double sup_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Local integral int_T v^2 of a P1 function.
double element_square(const Mesh& mesh, std::size_t e, std::span<const double> v) {
  const auto& el = mesh.element(e);
  double s = 0.0, s2 = 0.0;
  for (int a = 0; a < mesh.element_size(); ++a) {
    s += v[el[a]];
    s2 += v[el[a]] * v[el[a]];
  }
  return mesh.measure(e) / ((mesh.dim() + 1) * (mesh.dim() + 2)) * (s2 + s * s);
}

double element_mean(const Mesh& mesh, std::size_t e, std::span<const double> v) {
  const auto& el = mesh.element(e);
  double s = 0.0;
  for (int a = 0; a < mesh.element_size(); ++a) s += v[el[a]];
  return s / mesh.element_size();
}

int refinement(int fine, int coarse, const char* what) {
  if (coarse <= 0 || fine % coarse != 0) {
    throw std::invalid_argument(std::string(what) + ": coarse count " + std::to_string(coarse) +
                                " does not divide fine count " + std::to_string(fine));
  }
  return fine / coarse;
}

}  // namespace

// ---------------------------------------------------------------------------
// References

EllipticReference solve_reference_elliptic(const ScalarField& q_exact, const ScalarField& f,
                                           int fine_cells, int dim) {
  MeshPtr mesh = build_mesh(dim, fine_cells);
  FeFunction q = lagrange_interpolate(mesh, q_exact);
  FeFunction u = solve_elliptic(q, f);
  const double s = sup_abs(u.values());
  return EllipticReference{mesh, std::move(q), std::move(u), s};
}

std::span<const double> ParabolicReference::state(int fine_step) const {
  const auto it = states.find(fine_step);
  if (it == states.end()) {
    throw std::out_of_range("reference state " + std::to_string(fine_step) + " was not kept");
  }
  return it->second;
}

std::set<int> required_fine_steps(const TimeGrid& fine, const TimeGrid& coarse) {
  const int r = refinement(fine.steps, coarse.steps, "time grid");
  std::set<int> keep;
  for (int n = coarse.first_observed; n <= coarse.steps; ++n) {
    for (int m = (n - 1) * r; m <= n * r; ++m) keep.insert(m);
  }
  return keep;
}

std::set<int> observed_fine_steps(const TimeGrid& fine) {
  std::set<int> keep;
  for (int m = fine.first_observed; m <= fine.steps; ++m) {
    keep.insert(m);
    keep.insert(m - 1);
  }
  return keep;
}

ParabolicReference solve_reference_parabolic(const ProblemDefinition& def,
                                             const std::set<int>& keep) {
  MeshPtr mesh = build_mesh(def.dim, def.fine_cells);
  const TimeGrid grid = TimeGrid::make(def.final_time, def.fine_steps, def.sigma);
  FeFunction q = lagrange_interpolate(mesh, def.q_exact);
  ParabolicSolver solver(mesh, grid, def.source, def.initial);
  ParabolicReference ref{mesh, grid, q, {}, 0.0};
  solver.solve(q.values(), [&](int n, std::span<const double> u) {
    ref.sup_abs = std::max(ref.sup_abs, sup_abs(u));
    if (keep.count(n)) ref.states.emplace(n, std::vector<double>(u.begin(), u.end()));
  });
  return ref;
}

// ---------------------------------------------------------------------------
// Data synthesis

FeFunction synthesize_elliptic(const EllipticReference& ref, const MeshPtr& coarse,
                               const NoiseSpec& noise) {
  if (!(noise.epsilon >= 0.0)) throw std::invalid_argument("noise level must be nonnegative");
  refinement(ref.mesh->cells(), coarse->cells(), "synthesize_elliptic");
  std::vector<double> noisy(ref.u.values().begin(), ref.u.values().end());
  if (noise.epsilon > 0.0) {
    auto rng = make_rng(noise);
    std::normal_distribution<double> xi(0.0, 1.0);
    const double scale = noise.epsilon * ref.sup_abs;
    for (double& v : noisy) v += scale * xi(rng);
  }
  FeFunction fine(ref.mesh, std::move(noisy), Space::full);
  return transfer_nodal(fine, coarse).with_zero_trace();
}

FeFunction synthesize_elliptic(const ScalarField& q_exact, const ScalarField& f, int fine_cells,
                               const MeshPtr& coarse, const NoiseSpec& noise) {
  return synthesize_elliptic(solve_reference_elliptic(q_exact, f, fine_cells, coarse->dim()),
                             coarse, noise);
}

std::vector<FeFunction> synthesize_parabolic(const ParabolicReference& ref, const MeshPtr& coarse,
                                             const TimeGrid& grid, const NoiseSpec& noise) {
  if (!(noise.epsilon >= 0.0)) throw std::invalid_argument("noise level must be nonnegative");
  refinement(ref.mesh->cells(), coarse->cells(), "synthesize_parabolic (space)");
  const int r = refinement(ref.grid.steps, grid.steps, "synthesize_parabolic (time)");
  auto rng = make_rng(noise);
  std::normal_distribution<double> xi(0.0, 1.0);
  const double scale = noise.epsilon * ref.sup_abs;
  const std::size_t nn = ref.mesh->num_nodes();

  std::vector<FeFunction> out;
  out.reserve(grid.observed_count());
  std::vector<double> avg(nn);
  for (int n = grid.first_observed; n <= grid.steps; ++n) {
    std::fill(avg.begin(), avg.end(), 0.0);
    for (int m = (n - 1) * r + 1; m <= n * r; ++m) {
      const auto u = ref.state(m);
      for (std::size_t i = 0; i < nn; ++i) {
        const double e = noise.epsilon > 0.0 ? scale * xi(rng) : 0.0;
        avg[i] += u[i] + e;
      }
    }
    for (double& v : avg) v /= r;
    FeFunction fine(ref.mesh, avg, Space::full);
    out.push_back(transfer_nodal(fine, coarse).with_zero_trace());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Metrics

double error_q(const FeFunction& q_star, const ScalarField& q_exact) {
  const auto iq = lagrange_interpolate(q_star.mesh_ptr(), q_exact);
  std::vector<double> d(q_star.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = q_star[i] - iq[i];
  return std::sqrt(std::max(0.0, mass_inner(q_star.mesh(), d, d)));
}

double error_u_elliptic(const FeFunction& q_star, const ScalarField& f,
                        const EllipticReference& ref) {
  const FeFunction u = solve_elliptic(q_star, f);
  const FeFunction uref = transfer_nodal(ref.u, q_star.mesh_ptr());
  std::vector<double> d(u.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = u[i] - uref[i];
  return std::sqrt(std::max(0.0, mass_inner(u.mesh(), d, d)));
}

double error_u_parabolic(const FeFunction& q_star, const ProblemDefinition& def,
                         const TimeGrid& grid, const ParabolicReference& ref) {
  const int r = refinement(ref.grid.steps, grid.steps, "error_u_parabolic");
  const MeshPtr& mesh = q_star.mesh_ptr();
  ParabolicSolver solver(mesh, grid, def.source, def.initial);
  double sum = 0.0;
  solver.solve(q_star.values(), [&](int n, std::span<const double> u) {
    if (n < grid.first_observed) return;
    const auto s = ref.state(n * r);
    const FeFunction uref =
        transfer_nodal(FeFunction(ref.mesh, std::vector<double>(s.begin(), s.end())), mesh);
    std::vector<double> d(u.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = u[i] - uref[i];
    sum += mass_inner(*mesh, d, d);
  });
  return std::sqrt(grid.tau() * sum);
}

WeightedError weighted_error_elliptic(const FeFunction& q_star, const ScalarField& q_exact,
                                      const ScalarField& f, const EllipticReference& ref) {
  const Mesh& mesh = *ref.mesh;
  const FeFunction qf = prolong_nodal(q_star, ref.mesh);
  const FeFunction iq = lagrange_interpolate(ref.mesh, q_exact);
  std::vector<double> e(mesh.num_nodes());
  for (std::size_t i = 0; i < e.size(); ++i) e[i] = iq[i] - qf[i];

  WeightedError out;
  double eq2 = 0.0;
  for (std::size_t t = 0; t < mesh.num_elements(); ++t) {
    const Point c = mesh.centroid(t);
    const Point g = element_gradient(mesh, t, ref.u.values());
    const double w = q_exact(c) * (g.x * g.x + g.y * g.y) + f(c) * element_mean(mesh, t, ref.u.values());
    const double e2 = element_square(mesh, t, e);
    out.weighted += w * e2;
    out.max_weight = std::max(out.max_weight, w);
    eq2 += e2;
  }
  out.e_q_ref = std::sqrt(eq2);
  return out;
}

namespace {

// Weight q|grad u|^2 + (f - u_t) u on element t at fine step m of the reference.
double parabolic_weight(const ProblemDefinition& def, const ParabolicReference& ref, int m,
                        std::size_t t) {
  const Mesh& mesh = *ref.mesh;
  const auto u = ref.state(m);
  const auto u_prev = ref.state(m - 1);
  const Point c = mesh.centroid(t);
  const Point g = element_gradient(mesh, t, u);
  const double um = element_mean(mesh, t, u);
  const double ut = (um - element_mean(mesh, t, u_prev)) / ref.grid.tau();
  return def.q_exact(c) * (g.x * g.x + g.y * g.y) + (def.source(c, ref.grid.t(m)) - ut) * um;
}

}  // namespace

WeightedError weighted_error_parabolic(const FeFunction& q_star, const ProblemDefinition& def,
                                       const TimeGrid& grid, const ParabolicReference& ref) {
  const Mesh& mesh = *ref.mesh;
  const int r = refinement(ref.grid.steps, grid.steps, "weighted_error_parabolic");
  const FeFunction qf = prolong_nodal(q_star, ref.mesh);
  const FeFunction iq = lagrange_interpolate(ref.mesh, def.q_exact);
  std::vector<double> e(mesh.num_nodes()), rel(mesh.num_nodes());
  for (std::size_t i = 0; i < e.size(); ++i) {
    e[i] = iq[i] - qf[i];
    rel[i] = e[i] / iq[i];
  }
  WeightedError out;
  double eq2 = 0.0;
  for (std::size_t t = 0; t < mesh.num_elements(); ++t) eq2 += element_square(mesh, t, e);
  out.e_q_ref = std::sqrt(eq2);
  for (int n = grid.first_observed; n <= grid.steps; ++n) {
    double level = 0.0;
    for (std::size_t t = 0; t < mesh.num_elements(); ++t) {
      const double w = parabolic_weight(def, ref, n * r, t);
      level += w * element_square(mesh, t, rel);
      out.max_weight = std::max(out.max_weight, w);
    }
    out.weighted += level;
  }
  out.weighted /= grid.observed_count();
  return out;
}

namespace {

template <class WeightFn>
PositivityProfile profile_over_elements(const Mesh& mesh, double beta, WeightFn&& weight,
                                        PositivityProfile p) {
  for (std::size_t t = 0; t < mesh.num_elements(); ++t) {
    const double w = weight(t);
    const Point c = mesh.centroid(t);
    const double ratio = beta == 0.0 ? w : w / std::pow(dist_to_boundary(c, mesh.dim()), beta);
    if (w < p.min_weight) {
      p.min_weight = w;
      p.argmin_element = t;
      p.argmin_centroid = c;
    }
    p.min_ratio = std::min(p.min_ratio, ratio);
    p.max_weight = std::max(p.max_weight, w);
  }
  return p;
}

PositivityProfile empty_profile() {
  PositivityProfile p;
  p.min_ratio = std::numeric_limits<double>::infinity();
  p.min_weight = std::numeric_limits<double>::infinity();
  p.max_weight = -std::numeric_limits<double>::infinity();
  return p;
}

}  // namespace

PositivityProfile positivity_profile(const ScalarField& q_exact, const ScalarField& f,
                                     const EllipticReference& ref, double beta) {
  const Mesh& mesh = *ref.mesh;
  auto weight = [&](std::size_t t) {
    const Point c = mesh.centroid(t);
    const Point g = element_gradient(mesh, t, ref.u.values());
    return q_exact(c) * (g.x * g.x + g.y * g.y) + f(c) * element_mean(mesh, t, ref.u.values());
  };
  return profile_over_elements(mesh, beta, weight, empty_profile());
}

PositivityProfile positivity_profile(const ProblemDefinition& def, const ParabolicReference& ref,
                                     double beta) {
  PositivityProfile p = empty_profile();
  for (int m = std::max(ref.grid.first_observed, 1); m <= ref.grid.steps; ++m) {
    p = profile_over_elements(*ref.mesh, beta,
                              [&](std::size_t t) { return parabolic_weight(def, ref, m, t); }, p);
  }
  return p;
}

bool touches_corner(const Mesh& mesh, std::size_t e) {
  const auto& el = mesh.element(e);
  for (int a = 0; a < mesh.element_size(); ++a) {
    const Point& p = mesh.node(el[a]);
    const bool cx = p.x == 0.0 || p.x == 1.0;
    const bool cy = mesh.dim() == 1 || p.y == 0.0 || p.y == 1.0;
    if (cx && cy) return true;
  }
  return false;
}

double fit_rate(std::span<const std::pair<double, double>> points) {
  if (points.size() < 2) throw std::invalid_argument("fit_rate needs at least two points");
  double mx = 0.0, my = 0.0;
  for (const auto& [eps, err] : points) {
    if (!(eps > 0.0) || !(err > 0.0)) {
      throw std::invalid_argument("fit_rate needs positive noise levels and errors");
    }
    mx += std::log(eps);
    my += std::log(err);
  }
  mx /= points.size();
  my /= points.size();
  double sxy = 0.0, sxx = 0.0;
  for (const auto& [eps, err] : points) {
    const double dx = std::log(eps) - mx;
    sxy += dx * (std::log(err) - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_rate needs at least two distinct noise levels");
  return sxy / sxx;
}

// ---------------------------------------------------------------------------
// Sweeps

void SweepConfig::validate() const {
  if (epsilons.empty()) throw std::invalid_argument("sweep needs at least one noise level");
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    if (!(epsilons[i] > 0.0)) throw std::invalid_argument("noise levels must be positive");
    if (i > 0 && !(epsilons[i] < epsilons[i - 1])) {
      throw std::invalid_argument("noise levels must be strictly descending");
    }
  }
  const auto& p = problem;
  if (!(p.eps0 > 0.0 && p.gamma0 > 0.0 && p.h0 > 0.0)) {
    throw std::invalid_argument("sweep anchors eps0, gamma0, h0 must be positive");
  }
  if (p.fine_cells < 2) throw std::invalid_argument("fine mesh needs at least 2 cells");
  if (p.parabolic && !(p.tau0 > 0.0 && p.fine_steps >= 1 && p.final_time > 0.0)) {
    throw std::invalid_argument("parabolic sweep needs tau0 > 0, fine_steps >= 1 and T > 0");
  }
  if (!p.q_exact || !p.source || (p.parabolic && !p.initial)) {
    throw std::invalid_argument("problem definition is missing a field");
  }
  box.validate();
  optimizer.validate();
  if (!(p.initial_guess >= box.c0 && p.initial_guess <= box.c1)) {
    throw std::invalid_argument("initial guess lies outside the admissible box");
  }
}

int nearest_divisor(int total, double target, int min_value, const std::function<bool(int)>& ok) {
  int best = -1;
  double best_dist = std::numeric_limits<double>::infinity();
  for (int d = std::max(min_value, 1); d <= total; ++d) {
    if (total % d != 0) continue;
    if (ok && !ok(d)) continue;
    const double dist = std::abs(d - target);
    if (dist < best_dist) {
      best = d;
      best_dist = dist;
    }
  }
  if (best < 0) throw std::invalid_argument("no admissible divisor of " + std::to_string(total));
  return best;
}

std::vector<PointPlan> plan_sweep(const SweepConfig& config) {
  config.validate();
  const auto& p = config.problem;
  std::vector<PointPlan> plans;
  for (std::size_t k = 0; k < config.epsilons.size(); ++k) {
    const double eps = config.epsilons[k];
    const double ratio = eps / p.eps0;
    PointPlan plan;
    plan.index = k;
    plan.epsilon = eps;
    plan.gamma = p.gamma0 * ratio * ratio;
    plan.n_space = nearest_divisor(p.fine_cells, 1.0 / (p.h0 * std::sqrt(ratio)), 2);
    if (p.parabolic) {
      const double target = p.final_time / (p.tau0 * ratio);
      plan.n_time = nearest_divisor(p.fine_steps, target, 1, [&](int n) {
        const double k_obs = (p.final_time - p.sigma) * n / p.final_time;
        return std::abs(k_obs - std::round(k_obs)) <= 1e-9 * std::max(1.0, k_obs);
      });
    }
    plans.push_back(plan);
  }
  return plans;
}

double SweepResult::rate_e_q() const {
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : rows) {
    if (!r.failed) pts.emplace_back(r.plan.epsilon, r.e_q);
  }
  return fit_rate(pts);
}

double SweepResult::rate_e_u() const {
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : rows) {
    if (!r.failed) pts.emplace_back(r.plan.epsilon, r.e_u);
  }
  return fit_rate(pts);
}

bool SweepResult::any_failed() const {
  return std::any_of(rows.begin(), rows.end(), [](const SweepRow& r) { return r.failed; });
}

namespace {

struct References {
  std::optional<EllipticReference> elliptic;
  std::optional<ParabolicReference> parabolic;
};

void finish_optimization(SweepRow& row, const OptimizeResult& res) {
  row.iterations = res.iterations;
  row.termination = res.termination;
  row.initial_objective = res.objective_history.front();
  row.final_objective = res.objective_history.back();
  for (std::size_t i = 1; i < res.objective_history.size(); ++i) {
    if (!(res.objective_history[i] < res.objective_history[i - 1])) row.objective_decreasing = false;
  }
  row.q_star.assign(res.q_star.values().begin(), res.q_star.values().end());
}

SweepRow run_point(const SweepConfig& config, const PointPlan& plan, const References& refs) {
  const auto start = std::chrono::steady_clock::now();
  const auto& def = config.problem;
  SweepRow row;
  row.plan = plan;
  try {
    MeshPtr mesh = build_mesh(def.dim, plan.n_space);
    const NoiseSpec noise{plan.epsilon, config.seed, plan.index};
    const FeFunction q0 = FeFunction::constant(mesh, def.initial_guess);
    auto observer = [&](int, std::span<const double> q) {
      if (!config.box.contains(q)) row.iterates_feasible = false;
    };

    if (!def.parabolic) {
      const auto& ref = *refs.elliptic;
      const ScalarField f = at_time(def.source, 0.0);
      EllipticInverseProblem problem{mesh, synthesize_elliptic(ref, mesh, noise), f, plan.gamma,
                                     config.box};
      EllipticObjective objective(std::move(problem));
      const auto res = ncg_minimize(objective, q0, config.box, config.optimizer, observer);
      finish_optimization(row, res);
      row.e_q = error_q(res.q_star, def.q_exact);
      row.e_u = error_u_elliptic(res.q_star, f, ref);
      const auto w = weighted_error_elliptic(res.q_star, def.q_exact, f, ref);
      row.weighted_error = w.weighted;
      row.max_weight = w.max_weight;
      row.e_q_ref = w.e_q_ref;
    } else {
      const auto& ref = *refs.parabolic;
      const TimeGrid grid = TimeGrid::make(def.final_time, plan.n_time, def.sigma);
      row.tau = grid.tau();
      ParabolicInverseProblem problem{mesh,       grid,         synthesize_parabolic(ref, mesh, grid, noise),
                                      def.source, def.initial,  plan.gamma,
                                      config.box};
      ParabolicObjective objective(std::move(problem));
      const auto res = ncg_minimize(objective, q0, config.box, config.optimizer, observer);
      finish_optimization(row, res);
      row.e_q = error_q(res.q_star, def.q_exact);
      row.e_u = error_u_parabolic(res.q_star, def, grid, ref);
      const auto w = weighted_error_parabolic(res.q_star, def, grid, ref);
      row.weighted_error = w.weighted;
      row.max_weight = w.max_weight;
      row.e_q_ref = w.e_q_ref;
    }
  } catch (const std::exception& ex) {
    row.failed = true;
    row.failure = ex.what();
  }
  row.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return row;
}

}  // namespace

SweepResult run_sweep(const SweepConfig& config) {
  const auto plans = plan_sweep(config);
  const auto& def = config.problem;

  References refs;
  SweepResult result;
  if (!def.parabolic) {
    refs.elliptic = solve_reference_elliptic(def.q_exact, at_time(def.source, 0.0),
                                             def.fine_cells, def.dim);
    result.diagnostics.reference_sup = refs.elliptic->sup_abs;
    for (double beta : config.betas) {
      result.diagnostics.positivity.emplace_back(
          beta, positivity_profile(def.q_exact, at_time(def.source, 0.0), *refs.elliptic, beta));
    }
  } else {
    const TimeGrid fine = TimeGrid::make(def.final_time, def.fine_steps, def.sigma);
    std::set<int> keep = observed_fine_steps(fine);
    for (const auto& plan : plans) {
      const auto more =
          required_fine_steps(fine, TimeGrid::make(def.final_time, plan.n_time, def.sigma));
      keep.insert(more.begin(), more.end());
    }
    refs.parabolic = solve_reference_parabolic(def, keep);
    result.diagnostics.reference_sup = refs.parabolic->sup_abs;
    for (double beta : config.betas) {
      result.diagnostics.positivity.emplace_back(beta,
                                                 positivity_profile(def, *refs.parabolic, beta));
    }
  }

  result.rows.resize(plans.size());
  unsigned jobs = config.jobs > 0 ? config.jobs : std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min<unsigned>(jobs, static_cast<unsigned>(plans.size()));
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t k = next++; k < plans.size(); k = next++) {
      result.rows[k] = run_point(config, plans[k], refs);
    }
  };
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return result;
}

}  // namespace coeffid
