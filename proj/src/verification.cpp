#include "coeffid/verification.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "coeffid/experiment.hpp"
#include "coeffid/fem.hpp"
#include "coeffid/problems.hpp"

namespace coeffid {

namespace {

constexpr double pi = std::numbers::pi;

std::string format(const char* fmt, double a, double b = 0.0) {
  char buf[128];
  std::snprintf(buf, sizeof buf, fmt, a, b);
  return buf;
}

std::vector<double> random_coefficient(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(1.5, 3.0);
  std::vector<double> q(n);
  for (double& v : q) v = u(rng);
  return q;
}

double slope(const std::vector<double>& steps, const std::vector<double>& errors) {
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < steps.size(); ++i) pts.emplace_back(steps[i], errors[i]);
  return fit_rate(pts);
}

}  // namespace

double SignFlippedObjective::value_and_gradient(std::span<const double> q,
                                                std::span<double> grad) const {
  const double j = inner_.value_and_gradient(q, grad);
  for (double& g : grad) g = -g;
  return j;
}

GradientCheck check_gradient(const Objective& objective, std::span<const double> q,
                             int directions, std::uint64_t seed) {
  const std::size_t n = objective.size();
  std::vector<double> g(n);
  objective.value_and_gradient(q, g);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  GradientCheck out;
  std::vector<double> d(n), qp(n), qm(n);
  for (int k = 0; k < directions; ++k) {
    for (double& v : d) v = u(rng);
    const double gd = dot(g, d);
    double best = std::numeric_limits<double>::infinity();
    for (double s = 1e-3; s >= 0.99e-8; s /= 10.0) {
      for (std::size_t i = 0; i < n; ++i) {
        qp[i] = q[i] + s * d[i];
        qm[i] = q[i] - s * d[i];
      }
      const double fd = (objective.value(qp) - objective.value(qm)) / (2.0 * s);
      best = std::min(best, std::abs(gd - fd) / std::max(std::abs(gd), 1e-300));
    }
    out.mismatch.push_back(best);
    out.worst = std::max(out.worst, best);
  }
  return out;
}

GradientCheck elliptic_gradient_check(int directions, std::uint64_t seed, bool flip_sign) {
  const ProblemDefinition def = builtin_problem("ell1d");
  MeshPtr mesh = Mesh::interval(25);
  const ScalarField f = [&](const Point& x) { return def.source(x, 0.0); };
  EllipticInverseProblem p{mesh,
                           synthesize_elliptic(def.q_exact, f, 100, mesh, {1e-2, seed, 0}),
                           f,
                           1e-5,
                           {}};
  EllipticObjective objective(std::move(p));
  std::mt19937_64 rng(seed + 1);
  const auto q = random_coefficient(objective.size(), rng);
  if (!flip_sign) return check_gradient(objective, q, directions, seed + 2);
  return check_gradient(SignFlippedObjective(objective), q, directions, seed + 2);
}

GradientCheck parabolic_gradient_check(int directions, std::uint64_t seed, bool flip_sign) {
  const ProblemDefinition def = builtin_problem("par1d");
  MeshPtr mesh = Mesh::interval(25);
  const TimeGrid grid = TimeGrid::make(def.final_time, 100, def.sigma);

  // data: the forward trajectory at I_h q plus Gaussian noise
  ParabolicSolver solver(mesh, grid, def.source, def.initial);
  const auto states = solver.solve(lagrange_interpolate(mesh, def.q_exact).values());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> xi(0.0, 1.0);
  std::vector<FeFunction> z;
  for (int n = grid.first_observed; n <= grid.steps; ++n) {
    std::vector<double> v = states[n];
    for (double& x : v) x += 1e-2 * xi(rng);
    z.push_back(FeFunction(mesh, std::move(v)).with_zero_trace());
  }
  ParabolicInverseProblem p{mesh, grid, std::move(z), def.source, def.initial, 1e-5, {}};
  ParabolicObjective objective(std::move(p));
  const auto q = random_coefficient(objective.size(), rng);
  if (!flip_sign) return check_gradient(objective, q, directions, seed + 2);
  return check_gradient(SignFlippedObjective(objective), q, directions, seed + 2);
}

OrderStudy elliptic_order_study() {
  // three-point Gauss rule on each interval is exact for the squared quadratic error
  const double gx[3] = {-std::sqrt(0.6), 0.0, std::sqrt(0.6)};
  const double gw[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  OrderStudy study;
  for (int n = 8; n <= 128; n *= 2) {
    MeshPtr mesh = Mesh::interval(n);
    const FeFunction u = solve_elliptic(FeFunction::constant(mesh, 1.0), [](const Point&) { return 1.0; });
    const double h = 1.0 / n;
    double err2 = 0.0;
    for (int e = 0; e < n; ++e) {
      for (int k = 0; k < 3; ++k) {
        const double s = 0.5 * (gx[k] + 1.0);
        const double x = (e + s) * h;
        const double uh = (1.0 - s) * u[e] + s * u[e + 1];
        const double d = x * (1.0 - x) / 2.0 - uh;
        err2 += 0.5 * h * gw[k] * d * d;
      }
    }
    study.steps.push_back(h);
    study.errors.push_back(std::sqrt(err2));
  }
  study.rate = slope(study.steps, study.errors);
  return study;
}

OrderStudy parabolic_time_order_study() {
  const double final_time = 0.3;
  MeshPtr mesh = Mesh::interval(256);
  const ScalarField u0 = [](const Point& x) { return std::sin(pi * x.x); };
  const TimeField f = [](const Point&, double) { return 0.0; };
  const FeFunction q = FeFunction::constant(mesh, 1.0);
  const FeFunction exact = lagrange_interpolate(mesh, [&](const Point& x) {
    return std::exp(-pi * pi * final_time) * u0(x);
  });
  OrderStudy study;
  for (int steps = 3; steps <= 48; steps *= 2) {
    const TimeGrid grid = TimeGrid::make(final_time, steps, 0.0);
    const auto series = solve_parabolic(q, f, u0, grid);
    const auto& un = series.states.back();
    std::vector<double> d(un.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = un[i] - exact[i];
    study.steps.push_back(grid.tau());
    study.errors.push_back(std::sqrt(mass_inner(*mesh, d, d)));
  }
  study.rate = slope(study.steps, study.errors);
  return study;
}

double elliptic_noise_std_ratio(double epsilon, std::uint64_t seed) {
  const ProblemDefinition def = builtin_problem("ell1d");
  const ScalarField f = [&](const Point& x) { return def.source(x, 0.0); };
  const auto ref = solve_reference_elliptic(def.q_exact, f, def.fine_cells, 1);
  const FeFunction z = synthesize_elliptic(ref, ref.mesh, {epsilon, seed, 0});
  double s2 = 0.0;
  std::size_t count = 0;
  for (int i : ref.mesh->interior_nodes()) {
    const double d = z[i] - ref.u[i];
    s2 += d * d;
    ++count;
  }
  return std::sqrt(s2 / count) / (epsilon * ref.sup_abs);
}

double parabolic_noise_std_ratio(double epsilon, std::uint64_t seed, int steps_per_interval) {
  ProblemDefinition def = builtin_problem("par1d");
  def.fine_cells = 200;
  def.fine_steps = 10 * steps_per_interval;
  def.sigma = 0.09;
  const TimeGrid fine = TimeGrid::make(def.final_time, def.fine_steps, def.sigma);
  const TimeGrid coarse = TimeGrid::make(def.final_time, 10, def.sigma);
  const auto ref = solve_reference_parabolic(def, required_fine_steps(fine, coarse));
  const auto noisy = synthesize_parabolic(ref, ref.mesh, coarse, {epsilon, seed, 0});
  const auto clean = synthesize_parabolic(ref, ref.mesh, coarse, {0.0, seed, 0});
  double s2 = 0.0;
  std::size_t count = 0;
  for (std::size_t k = 0; k < noisy.size(); ++k) {
    for (int i : ref.mesh->interior_nodes()) {
      const double d = noisy[k][i] - clean[k][i];
      s2 += d * d;
      ++count;
    }
  }
  return std::sqrt(s2 / count) * std::sqrt(double(steps_per_interval)) /
         (epsilon * ref.sup_abs);
}

std::vector<CheckOutcome> run_verification(bool flip_gradient_sign) {
  std::vector<CheckOutcome> out;
  {
    const auto g = elliptic_gradient_check(10, 7, flip_gradient_sign);
    out.push_back({"gradient_fd_elliptic", g.worst <= 1e-5, format("worst mismatch %.2e", g.worst)});
  }
  {
    const auto g = parabolic_gradient_check(10, 7, flip_gradient_sign);
    out.push_back({"gradient_fd_parabolic", g.worst <= 1e-5, format("worst mismatch %.2e", g.worst)});
  }
  {
    const auto s = elliptic_order_study();
    out.push_back({"elliptic_order", std::abs(s.rate - 2.0) <= 0.1, format("rate %.3f", s.rate)});
  }
  {
    const auto s = parabolic_time_order_study();
    out.push_back({"parabolic_time_order", std::abs(s.rate - 1.0) <= 0.1, format("rate %.3f", s.rate)});
  }
  {
    MeshPtr mesh = Mesh::interval(16);
    std::vector<double> v(mesh->num_nodes());
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-2.0, 8.0);
    for (double& x : v) x = u(rng);
    const AdmissibleBox box;
    const FeFunction once = project_box(FeFunction(mesh, v), box);
    const FeFunction twice = project_box(once, box);
    const bool same = std::equal(once.values().begin(), once.values().end(), twice.values().begin());
    out.push_back({"projection_idempotent", same && box.contains(once.values()), ""});
  }
  {
    const double r = elliptic_noise_std_ratio(5e-2, 11);
    out.push_back({"noise_std_elliptic", std::abs(r - 1.0) <= 0.1, format("std ratio %.4f", r)});
  }
  {
    const double r = parabolic_noise_std_ratio(5e-2, 11, 8);
    out.push_back({"noise_std_parabolic_average", std::abs(r - 1.0) <= 0.2,
                   format("std ratio %.4f", r)});
  }
  return out;
}

}  // namespace coeffid
