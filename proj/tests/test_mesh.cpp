#include <cmath>

#include "coeffid/fe_function.hpp"
#include "coeffid/fem.hpp"
#include "coeffid/mesh.hpp"
#include "doctest.h"

using namespace coeffid;

TEST_SUITE("mesh") {
  TEST_CASE("interval mesh with four cells") {
    auto m = Mesh::interval(4);
    CHECK(m->dim() == 1);
    CHECK(m->num_nodes() == 5);
    CHECK(m->num_elements() == 4);
    CHECK(m->h() == 0.25);
    for (int i = 0; i <= 4; ++i) CHECK(m->node(i).x == i / 4.0);
    CHECK(m->is_boundary(0));
    CHECK(m->is_boundary(4));
    for (int i = 1; i < 4; ++i) CHECK_FALSE(m->is_boundary(i));
  }

  TEST_CASE("interval mesh with two cells") {
    auto m = Mesh::interval(2);
    CHECK(m->h() == 0.5);
    CHECK(m->is_boundary(0));
    CHECK_FALSE(m->is_boundary(1));
    CHECK(m->is_boundary(2));
  }

  TEST_CASE("fine data meshes have the expected sizes") {
    CHECK(Mesh::interval(3200)->num_nodes() == 3201);
    CHECK(Mesh::unit_square(200)->num_nodes() == 40401);
  }

  TEST_CASE("too coarse meshes are rejected") {
    CHECK_THROWS_AS(Mesh::interval(1), std::invalid_argument);
    CHECK_THROWS_AS(Mesh::unit_square(1), std::invalid_argument);
  }

  TEST_CASE("unit square with two cells per side") {
    auto m = Mesh::unit_square(2);
    CHECK(m->num_nodes() == 9);
    CHECK(m->num_elements() == 8);
    CHECK(m->h() == doctest::Approx(std::sqrt(2.0) / 2));
    for (std::size_t e = 0; e < m->num_elements(); ++e) CHECK(m->measure(e) == doctest::Approx(0.125));
    // only the centre node is interior
    for (std::size_t i = 0; i < 9; ++i) CHECK(m->is_boundary(i) == (i != 4));
  }

  TEST_CASE("element indices are valid and measures positive") {
    for (int n : {2, 3, 7, 16}) {
      for (auto m : {Mesh::interval(n), Mesh::unit_square(n)}) {
        double total = 0.0;
        for (std::size_t e = 0; e < m->num_elements(); ++e) {
          for (int k = 0; k < m->element_size(); ++k) {
            CHECK(m->element(e)[k] >= 0);
            CHECK(static_cast<std::size_t>(m->element(e)[k]) < m->num_nodes());
          }
          CHECK(m->measure(e) > 0.0);
          total += m->measure(e);
        }
        CHECK(std::abs(total - 1.0) <= 1e-12);
      }
    }
  }

  TEST_CASE("2D counts and mesh size follow the structured formulas") {
    for (int n : {2, 5, 12}) {
      auto m = Mesh::unit_square(n);
      CHECK(m->num_nodes() == static_cast<std::size_t>((n + 1) * (n + 1)));
      CHECK(m->num_elements() == static_cast<std::size_t>(2 * n * n));
      CHECK(m->h() == doctest::Approx(std::sqrt(2.0) / n));
    }
  }

  TEST_CASE("boundary flags are exactly the nodes with a coordinate 0 or 1") {
    auto m = Mesh::unit_square(6);
    for (std::size_t i = 0; i < m->num_nodes(); ++i) {
      const auto p = m->node(i);
      const bool on = p.x == 0.0 || p.x == 1.0 || p.y == 0.0 || p.y == 1.0;
      CHECK(m->is_boundary(i) == on);
    }
  }

  TEST_CASE("interior valence") {
    auto m1 = Mesh::interval(8);
    std::vector<int> count1(m1->num_nodes(), 0);
    for (std::size_t e = 0; e < m1->num_elements(); ++e) {
      for (int k = 0; k < 2; ++k) ++count1[m1->element(e)[k]];
    }
    for (int i : m1->interior_nodes()) CHECK(count1[i] == 2);

    // with one diagonal direction every interior vertex touches 6 triangles
    auto m2 = Mesh::unit_square(8);
    std::vector<int> count2(m2->num_nodes(), 0);
    for (std::size_t e = 0; e < m2->num_elements(); ++e) {
      for (int k = 0; k < 3; ++k) ++count2[m2->element(e)[k]];
    }
    for (int i : m2->interior_nodes()) CHECK(count2[i] == 6);
  }

  TEST_CASE("distance to the boundary") {
    CHECK(dist_to_boundary(Point{0.25, 0.0}, 1) == 0.25);
    CHECK(dist_to_boundary(Point{0.5, 0.1}, 2) == doctest::Approx(0.1));
    auto m = Mesh::unit_square(4);
    for (std::size_t i = 0; i < m->num_nodes(); ++i) {
      if (m->is_boundary(i)) CHECK(dist_to_boundary(*m, i) == 0.0);
    }
  }
}

TEST_SUITE("mesh") {
  TEST_CASE("nodal transfer subsamples coinciding nodes") {
    auto fine = Mesh::interval(8);
    auto coarse = Mesh::interval(4);
    std::vector<double> v(9);
    for (int i = 0; i <= 8; ++i) v[i] = i * i / 64.0;
    const auto c = transfer_nodal(FeFunction(fine, v), coarse);
    for (int i = 0; i <= 4; ++i) CHECK(c[i] == (2 * i) * (2 * i) / 64.0);
  }

  TEST_CASE("transfer of a constant") {
    const auto c = transfer_nodal(FeFunction::constant(Mesh::unit_square(12), 3.7), Mesh::unit_square(4));
    for (double v : c.values()) CHECK(v == 3.7);
  }

  TEST_CASE("transfer of sin(2 pi x) from 3200 to 40 cells is exact") {
    const double pi = std::acos(-1.0);
    auto f = [&](const Point& p) { return std::sin(2 * pi * p.x); };
    auto fine = lagrange_interpolate(Mesh::interval(3200), f);
    auto coarse = Mesh::interval(40);
    const auto c = transfer_nodal(fine, coarse);
    double worst = 0.0;
    for (int i = 0; i <= 40; ++i) worst = std::max(worst, std::abs(c[i] - f(coarse->node(i))));
    CHECK(worst == 0.0);
  }

  TEST_CASE("transfer requires divisible cell counts") {
    CHECK_THROWS_AS(transfer_nodal(FeFunction::constant(Mesh::interval(10), 1.0), Mesh::interval(4)),
                    std::invalid_argument);
    CHECK_THROWS_AS(transfer_nodal(FeFunction::constant(Mesh::interval(8), 1.0), Mesh::unit_square(4)),
                    std::invalid_argument);
  }

  TEST_CASE("transfer composes") {
    auto fine = Mesh::unit_square(12);
    auto mid = Mesh::unit_square(6);
    auto coarse = Mesh::unit_square(3);
    auto f = lagrange_interpolate(fine, [](const Point& p) { return std::exp(p.x) * std::cos(3 * p.y); });
    const auto two_step = transfer_nodal(transfer_nodal(f, mid), coarse);
    const auto direct = transfer_nodal(f, coarse);
    for (std::size_t i = 0; i < direct.size(); ++i) CHECK(two_step[i] == direct[i]);
  }

  TEST_CASE("prolongation inverts transfer on coarse functions") {
    auto fine = Mesh::unit_square(8);
    auto coarse = Mesh::unit_square(4);
    auto c = lagrange_interpolate(coarse, [](const Point& p) { return 1.0 + p.x * p.y; });
    const auto back = transfer_nodal(prolong_nodal(c, fine), coarse);
    for (std::size_t i = 0; i < c.size(); ++i) CHECK(back[i] == doctest::Approx(c[i]).epsilon(1e-14));
  }
}
