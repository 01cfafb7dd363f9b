#include <cmath>
#include <numbers>

#include "coeffid/fem.hpp"
#include "coeffid/forward.hpp"
#include "coeffid/verification.hpp"
#include "doctest.h"

using namespace coeffid;

namespace {

constexpr double pi = std::numbers::pi;
const ScalarField one = [](const Point&) { return 1.0; };

}  // namespace

TEST_SUITE("forward") {
  TEST_CASE("time grid and the observation window") {
    const auto g = TimeGrid::make(0.1, 100, 0.05);
    CHECK(g.tau() == doctest::Approx(1e-3));
    CHECK(g.first_observed == 51);
    CHECK(g.observed_count() == 50);
    // sigma = 0 keeps one averaged interval
    const auto g0 = TimeGrid::make(0.1, 40, 0.0);
    CHECK(g0.first_observed == 40);
    CHECK(g0.observed_count() == 1);
    CHECK_THROWS_AS(TimeGrid::make(0.1, 100, 0.0333), std::invalid_argument);
    CHECK_THROWS_AS(TimeGrid::make(0.1, 10, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(TimeGrid::make(0.1, 0, 0.0), std::invalid_argument);
  }

  TEST_CASE("elliptic solution is nodally exact for q = 1, f = 1") {
    auto m = Mesh::interval(10);
    const auto u = solve_elliptic(FeFunction::constant(m, 1.0), one);
    CHECK(u.space() == Space::zero_trace);
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double x = m->node(i).x;
      CHECK(u[i] == doctest::Approx(x * (1 - x) / 2).epsilon(1e-12));
    }
  }

  TEST_CASE("coefficient scaling") {
    auto m = Mesh::interval(10);
    const auto u = solve_elliptic(FeFunction::constant(m, 2.0), one);
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double x = m->node(i).x;
      CHECK(u[i] == doctest::Approx(x * (1 - x) / 4).epsilon(1e-12));
    }
  }

  TEST_CASE("zero source gives zero state") {
    const auto u = solve_elliptic(FeFunction::constant(Mesh::unit_square(6), 1.5),
                                  [](const Point&) { return 0.0; });
    for (double v : u.values()) CHECK(v == 0.0);
  }

  TEST_CASE("nonpositive coefficient is rejected") {
    auto m = Mesh::interval(4);
    CHECK_THROWS_AS(solve_elliptic(FeFunction(m, {1, 1, -1, 1, 1}), one), std::invalid_argument);
  }

  TEST_CASE("weak-form residual of the elliptic solve") {
    auto m = Mesh::unit_square(16);
    const auto q = lagrange_interpolate(m, [](const Point& p) { return 1 + p.x * p.y; });
    const ScalarField f = [](const Point& p) { return std::sin(pi * p.x) + p.y; };
    const auto u = solve_elliptic(q, f);
    const auto r = matvec(assemble_stiffness(q), u.values());
    const auto b = assemble_load(*m, f);
    for (int i : m->interior_nodes()) CHECK(std::abs(r[i] - b[i]) <= 1e-12);
  }

  TEST_CASE("elliptic L2 order is two") {
    const auto s = elliptic_order_study();
    REQUIRE(s.steps.size() == 5);
    CHECK(s.steps.front() == 1.0 / 8);
    CHECK(s.steps.back() == 1.0 / 128);
    CHECK(std::abs(s.rate - 2.0) <= 0.1);
  }

  TEST_CASE("backward Euler is first order in time") {
    const auto s = parabolic_time_order_study();
    CHECK(s.steps.front() == doctest::Approx(0.1));
    CHECK(s.steps.back() == doctest::Approx(1.0 / 160));
    CHECK(std::abs(s.rate - 1.0) <= 0.1);
  }

  TEST_CASE("zero data give a zero trajectory") {
    auto m = Mesh::interval(16);
    const auto ts = solve_parabolic(FeFunction::constant(m, 1.0), [](const Point&, double) { return 0.0; },
                                    [](const Point&) { return 0.0; }, TimeGrid::make(0.1, 10, 0.0));
    REQUIRE(ts.states.size() == 11);
    for (const auto& s : ts.states) {
      for (double v : s.values()) CHECK(v == 0.0);
    }
  }

  TEST_CASE("long-time limit is the steady state") {
    auto m = Mesh::interval(16);
    const auto ts = solve_parabolic(FeFunction::constant(m, 1.0), [](const Point&, double) { return 1.0; },
                                    [](const Point& p) { return std::sin(pi * p.x); },
                                    TimeGrid::make(2.0, 400, 0.0));
    const auto& un = ts.states.back();
    for (std::size_t i = 0; i < un.size(); ++i) {
      const double x = m->node(i).x;
      CHECK(std::abs(un[i] - x * (1 - x) / 2) <= 1e-6);
    }
  }

  TEST_CASE("energy decays without a source") {
    auto m = Mesh::unit_square(10);
    const auto q = lagrange_interpolate(m, [](const Point& p) { return 1 + p.x; });
    const auto ts = solve_parabolic(q, [](const Point&, double) { return 0.0; },
                                    [](const Point& p) { return p.x * (1 - p.x) * p.y; },
                                    TimeGrid::make(0.2, 20, 0.0));
    double prev = norm_l2(ts.states.front());
    for (std::size_t n = 1; n < ts.states.size(); ++n) {
      const double now = norm_l2(ts.states[n]);
      CHECK(now <= prev);
      prev = now;
    }
  }

  TEST_CASE("initial state is the L2 projection") {
    auto m = Mesh::interval(12);
    const ScalarField u0 = [](const Point& p) { return std::sin(pi * p.x); };
    const auto ts = solve_parabolic(FeFunction::constant(m, 1.0), [](const Point&, double) { return 0.0; },
                                    u0, TimeGrid::make(0.1, 5, 0.0));
    const auto p = l2_project(m, u0);
    for (std::size_t i = 0; i < p.size(); ++i) CHECK(ts.states[0][i] == doctest::Approx(p[i]));
  }

  TEST_CASE("adjoint march is the transpose of the forward march") {
    // <forcing, forward response to a source> equals <source, adjoint response to forcing>
    auto m = Mesh::interval(10);
    const TimeGrid grid = TimeGrid::make(0.1, 6, 0.0);
    const TimeField src = [](const Point& p, double t) { return std::cos(3 * p.x) * (1 + t); };
    ParabolicSolver solver(m, grid, src, [](const Point&) { return 0.0; });
    const auto q = lagrange_interpolate(m, [](const Point& p) { return 1 + p.x; });
    const auto u = solver.solve(q.values());

    const std::size_t ni = m->num_interior();
    std::vector<std::vector<double>> forcing(grid.steps + 1);
    for (int n = 1; n <= grid.steps; ++n) {
      forcing[n].resize(ni);
      for (std::size_t i = 0; i < ni; ++i) forcing[n][i] = std::sin(1.0 + n + 0.7 * i);
    }
    const auto p = solver.solve_adjoint(q.values(), forcing);
    const auto load = [&](int n) {
      return gather_interior(*m, assemble_load(*m, [&](const Point& x) { return src(x, grid.t(n)); }));
    };
    double lhs = 0.0, rhs = 0.0;
    for (int n = 1; n <= grid.steps; ++n) {
      lhs += dot(forcing[n], gather_interior(*m, u[n]));
      const auto b = load(n);
      rhs += grid.tau() * dot(b, gather_interior(*m, p[n]));
    }
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
  }
}
