#include <random>

#include "coeffid/fem.hpp"
#include "coeffid/sparse.hpp"
#include "doctest.h"

using namespace coeffid;

namespace {

CsrMatrix diagonal_matrix(std::vector<double> d) {
  CsrMatrix a = CsrMatrix::identity(d.size());
  a.vals = std::move(d);
  return a;
}

CsrMatrix interior_laplacian(int n) {
  auto m = Mesh::interval(n);
  return restrict_interior(*m, assemble_laplacian(*m));
}

}  // namespace

TEST_SUITE("linalg") {
  TEST_CASE("identity matvec") {
    const auto y = matvec(CsrMatrix::identity(3), std::vector<double>{1, 2, 3});
    CHECK(y == std::vector<double>{1, 2, 3});
  }

  TEST_CASE("1D Laplacian with four cells") {
    const auto a = interior_laplacian(4);
    CHECK(a.at(1, 1) == doctest::Approx(8.0));
    CHECK(a.at(0, 1) == doctest::Approx(-4.0));
    const auto y = matvec(a, std::vector<double>{1, 1, 1});
    CHECK(y[0] == doctest::Approx(4.0));
    CHECK(y[1] == doctest::Approx(0.0));
    CHECK(y[2] == doctest::Approx(4.0));
  }

  TEST_CASE("zero matrix") {
    auto a = CsrMatrix::identity(4);
    std::fill(a.vals.begin(), a.vals.end(), 0.0);
    for (double v : matvec(a, std::vector<double>{1, -2, 3, 5})) CHECK(v == 0.0);
  }

  TEST_CASE("dimension mismatch") {
    CHECK_THROWS_AS(matvec(CsrMatrix::identity(3), std::vector<double>{1, 2}), std::invalid_argument);
  }

  TEST_CASE("columns are sorted and unique") {
    auto m = Mesh::unit_square(5);
    const auto k = assemble_laplacian(*m);
    for (std::size_t i = 0; i < k.n; ++i) {
      CHECK(k.row_ptr[i] <= k.row_ptr[i + 1]);
      for (int p = k.row_ptr[i] + 1; p < k.row_ptr[i + 1]; ++p) CHECK(k.col_idx[p - 1] < k.col_idx[p]);
    }
  }

  TEST_CASE("cg on a diagonal system") {
    const auto x = cg_solve(diagonal_matrix({2, 2, 2}), std::vector<double>{2, 4, 6});
    CHECK(x[0] == doctest::Approx(1.0));
    CHECK(x[1] == doctest::Approx(2.0));
    CHECK(x[2] == doctest::Approx(3.0));
  }

  TEST_CASE("cg reproduces the nodally exact Poisson solution") {
    auto m = Mesh::interval(4);
    const auto a = interior_laplacian(4);
    const auto b = gather_interior(*m, assemble_load(*m, [](const Point&) { return 1.0; }));
    const auto x = cg_solve(a, b);
    CHECK(x[0] == doctest::Approx(0.09375));
    CHECK(x[1] == doctest::Approx(0.125));
    CHECK(x[2] == doctest::Approx(0.09375));
  }

  TEST_CASE("zero right-hand side takes no iterations") {
    const auto a = interior_laplacian(8);
    std::vector<double> b(a.n, 0.0), x(a.n, 0.0);
    const auto stats = cg_solve_into(a, b, x);
    CHECK(stats.iterations == 0);
    for (double v : x) CHECK(v == 0.0);
  }

  TEST_CASE("cg residual contract, recomputed independently") {
    auto m = Mesh::unit_square(20);
    std::vector<double> q(m->num_nodes());
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.5, 5.0);
    for (double& v : q) v = u(rng);
    const auto a = restrict_interior(*m, assemble_stiffness(*m, q));
    std::vector<double> b(a.n);
    for (double& v : b) v = u(rng) - 2.5;
    const CgOptions opts{1e-10, 0};
    const auto x = cg_solve(a, b, opts);
    auto r = matvec(a, x);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
    CHECK(norm2(r) <= 1e-10 * norm2(b) * 1.01);
  }

  TEST_CASE("cg reports non-convergence with the achieved residual") {
    const auto a = interior_laplacian(64);
    std::vector<double> b(a.n, 1.0);
    try {
      cg_solve(a, b, CgOptions{1e-12, 3});
      FAIL("expected SolverError");
    } catch (const SolverError& e) {
      CHECK(e.iterations() == 3);
      CHECK(e.residual() > 0.0);
    }
  }

  TEST_CASE("symmetric matvec is self-adjoint") {
    auto m = Mesh::unit_square(9);
    const auto k = assemble_mass(*m);
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<double> x(k.n), y(k.n);
      for (auto& v : x) v = g(rng);
      for (auto& v : y) v = g(rng);
      const double a = dot(x, matvec(k, y));
      const double b = dot(y, matvec(k, x));
      CHECK(std::abs(a - b) <= 1e-12 * std::abs(a));
    }
  }

  TEST_CASE("cholesky agrees with cg") {
    auto m = Mesh::unit_square(12);
    std::vector<double> q(m->num_nodes(), 1.3);
    const auto a = restrict_interior(*m, assemble_stiffness(*m, q));
    std::vector<double> b(a.n);
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = std::sin(0.3 * i);
    const auto x1 = CholeskyFactor(a).solve(b);
    const auto x2 = cg_solve(a, b, CgOptions{1e-13, 0});
    for (std::size_t i = 0; i < b.size(); ++i) CHECK(x1[i] == doctest::Approx(x2[i]).epsilon(1e-9));
  }

  TEST_CASE("cholesky rejects indefinite matrices") {
    CHECK_THROWS_AS(CholeskyFactor(diagonal_matrix({1.0, -1.0})), SolverError);
  }
}
