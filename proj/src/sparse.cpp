#include "coeffid/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

namespace coeffid {

CsrMatrix CsrMatrix::identity(std::size_t n) {
  CsrMatrix m;
  m.n = n;
  m.row_ptr.resize(n + 1);
  m.col_idx.resize(n);
  m.vals.assign(n, 1.0);
  for (std::size_t i = 0; i <= n; ++i) m.row_ptr[i] = static_cast<int>(i);
  for (std::size_t i = 0; i < n; ++i) m.col_idx[i] = static_cast<int>(i);
  return m;
}

CsrMatrix CsrMatrix::from_pattern(std::span<const int> row_ptr, std::span<const int> col_idx) {
  CsrMatrix m;
  m.n = row_ptr.size() - 1;
  m.row_ptr.assign(row_ptr.begin(), row_ptr.end());
  m.col_idx.assign(col_idx.begin(), col_idx.end());
  m.vals.assign(col_idx.size(), 0.0);
  return m;
}

long CsrMatrix::find(std::size_t i, std::size_t j) const {
  const auto first = col_idx.begin() + row_ptr[i];
  const auto last = col_idx.begin() + row_ptr[i + 1];
  const auto it = std::lower_bound(first, last, static_cast<int>(j));
  if (it == last || *it != static_cast<int>(j)) return -1;
  return static_cast<long>(it - col_idx.begin());
}

double CsrMatrix::at(std::size_t i, std::size_t j) const {
  const long k = find(i, j);
  return k < 0 ? 0.0 : vals[k];
}

std::vector<double> CsrMatrix::diagonal() const {
  std::vector<double> d(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) d[i] = at(i, i);
  return d;
}

void matvec(const CsrMatrix& a, std::span<const double> x, std::span<double> y) {
  if (x.size() != a.n || y.size() != a.n) {
    throw std::invalid_argument("matvec: dimension mismatch (matrix " + std::to_string(a.n) +
                                ", vector " + std::to_string(x.size()) + ")");
  }
  for (std::size_t i = 0; i < a.n; ++i) {
    double s = 0.0;
    for (int k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) s += a.vals[k] * x[a.col_idx[k]];
    y[i] = s;
  }
}

std::vector<double> matvec(const CsrMatrix& a, std::span<const double> x) {
  std::vector<double> y(a.n);
  matvec(a, x, y);
  return y;
}

CsrMatrix add_scaled(const CsrMatrix& a, double s, const CsrMatrix& b) {
  if (a.n != b.n || a.col_idx != b.col_idx) {
    throw std::invalid_argument("add_scaled: matrices have different patterns");
  }
  CsrMatrix c = a;
  for (std::size_t k = 0; k < c.vals.size(); ++k) c.vals[k] += s * b.vals[k];
  return c;
}

CsrMatrix restrict_to(const CsrMatrix& a, std::span<const int> keep, std::span<const int> map) {
  CsrMatrix r;
  r.n = keep.size();
  r.row_ptr.assign(r.n + 1, 0);
  for (std::size_t ii = 0; ii < keep.size(); ++ii) {
    const int i = keep[ii];
    for (int k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
      const int jj = map[a.col_idx[k]];
      if (jj < 0) continue;
      r.col_idx.push_back(jj);
      r.vals.push_back(a.vals[k]);
    }
    r.row_ptr[ii + 1] = static_cast<int>(r.col_idx.size());
  }
  return r;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

CgStats cg_solve_into(const CsrMatrix& a, std::span<const double> b, std::span<double> x,
                      const CgOptions& opts) {
  const std::size_t n = a.n;
  if (b.size() != n || x.size() != n) throw std::invalid_argument("cg_solve: dimension mismatch");
  if (!(opts.rel_tol > 0.0)) throw std::invalid_argument("cg_solve: rel_tol must be positive");
  const std::size_t max_iters = opts.max_iters > 0 ? opts.max_iters : 10 * std::max<std::size_t>(n, 1);

  CgStats stats;
  const double bnorm = norm2(b);
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    return stats;
  }
  const double target = opts.rel_tol * bnorm;

  std::vector<double> inv_diag = a.diagonal();
  for (double& d : inv_diag) {
    if (!(d > 0.0)) throw std::invalid_argument("cg_solve: nonpositive diagonal entry");
    d = 1.0 / d;
  }

  std::vector<double> r(n), z(n), p(n), ap(n);
  auto true_residual = [&]() {
    matvec(a, x, ap);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ap[i];
    return norm2(r);
  };

  double rnorm = true_residual();
  while (true) {
    if (rnorm <= target) {
      stats.residual = rnorm;
      return stats;
    }
    // (re)start the recurrence from the true residual
    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    p = z;
    double rz = dot(r, z);
    while (rnorm > target) {
      if (stats.iterations >= max_iters) {
        throw SolverError("cg_solve: no convergence after " + std::to_string(stats.iterations) +
                              " iterations, relative residual " + std::to_string(rnorm / bnorm),
                          rnorm, stats.iterations);
      }
      matvec(a, p, ap);
      const double pap = dot(p, ap);
      if (!(pap > 0.0)) {
        throw SolverError("cg_solve: matrix is not positive definite", rnorm, stats.iterations);
      }
      const double alpha = rz / pap;
      for (std::size_t i = 0; i < n; ++i) {
        x[i] += alpha * p[i];
        r[i] -= alpha * ap[i];
      }
      ++stats.iterations;
      rnorm = norm2(r);
      for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
      const double rz_new = dot(r, z);
      const double beta = rz_new / rz;
      rz = rz_new;
      for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    rnorm = true_residual();
  }
}

std::vector<double> cg_solve(const CsrMatrix& a, std::span<const double> b, const CgOptions& opts) {
  std::vector<double> x(a.n, 0.0);
  cg_solve_into(a, b, x, opts);
  return x;
}

struct CholeskyFactor::Impl {
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>, Eigen::Lower> llt;
};

CholeskyFactor::CholeskyFactor(const CsrMatrix& a) : n_(a.n) {
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(a.nnz());
  for (std::size_t i = 0; i < a.n; ++i) {
    for (int k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
      if (a.col_idx[k] <= static_cast<int>(i)) entries.emplace_back(i, a.col_idx[k], a.vals[k]);
    }
  }
  Eigen::SparseMatrix<double> m(a.n, a.n);
  m.setFromTriplets(entries.begin(), entries.end());
  auto impl = std::make_shared<Impl>();
  impl->llt.compute(m);
  if (impl->llt.info() != Eigen::Success) {
    throw SolverError("cholesky: matrix is not positive definite", 0.0, 0);
  }
  impl_ = std::move(impl);
}

void CholeskyFactor::solve_into(std::span<const double> b, std::span<double> x) const {
  if (b.size() != n_ || x.size() != n_) throw std::invalid_argument("cholesky: size mismatch");
  if (n_ == 0) return;
  Eigen::Map<const Eigen::VectorXd> bv(b.data(), static_cast<Eigen::Index>(n_));
  Eigen::Map<Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(n_));
  xv = impl_->llt.solve(bv);
}

std::vector<double> CholeskyFactor::solve(std::span<const double> b) const {
  std::vector<double> x(n_);
  solve_into(b, x);
  return x;
}

}  // namespace coeffid
