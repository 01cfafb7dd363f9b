#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

namespace coeffid {

/// Square matrix in compressed-row form. Columns are sorted and unique per row.
struct CsrMatrix {
  std::size_t n = 0;
  std::vector<int> row_ptr;
  std::vector<int> col_idx;
  std::vector<double> vals;

  static CsrMatrix identity(std::size_t n);
  /// Zero-valued matrix with the given pattern.
  static CsrMatrix from_pattern(std::span<const int> row_ptr, std::span<const int> col_idx);

  std::size_t nnz() const { return vals.size(); }
  /// Entry (i, j), zero if not stored.
  double at(std::size_t i, std::size_t j) const;
  /// Slot of (i, j) in vals; -1 if not in the pattern.
  long find(std::size_t i, std::size_t j) const;
  std::vector<double> diagonal() const;
};

std::vector<double> matvec(const CsrMatrix& a, std::span<const double> x);
void matvec(const CsrMatrix& a, std::span<const double> x, std::span<double> y);

/// A + s*B for matrices with identical patterns.
CsrMatrix add_scaled(const CsrMatrix& a, double s, const CsrMatrix& b);

/// Principal submatrix on the given (sorted) index set; map[i] is the new index of i or -1.
CsrMatrix restrict_to(const CsrMatrix& a, std::span<const int> keep, std::span<const int> map);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

struct CgOptions {
  double rel_tol = 1e-10;
  /// 0 means 10 * n.
  std::size_t max_iters = 0;
};

/// Thrown when CG exhausts its iteration budget.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double residual, std::size_t iterations)
      : std::runtime_error(what), residual_(residual), iterations_(iterations) {}
  double residual() const { return residual_; }
  std::size_t iterations() const { return iterations_; }

 private:
  double residual_;
  std::size_t iterations_;
};

struct CgStats {
  std::size_t iterations = 0;
  double residual = 0.0;  ///< ||Ax - b|| of the recurrence at exit
};

/// Jacobi-preconditioned conjugate gradients for SPD systems.
/// Stops when ||Ax - b|| <= rel_tol * ||b||.
std::vector<double> cg_solve(const CsrMatrix& a, std::span<const double> b,
                             const CgOptions& opts = {});

/// Same, starting from `x` (warm start) and overwriting it with the solution.
CgStats cg_solve_into(const CsrMatrix& a, std::span<const double> b, std::span<double> x,
                      const CgOptions& opts = {});

/// Sparse Cholesky factorization with a fill-reducing ordering, for repeated solves
/// with one SPD matrix. Copies share the factor.
class CholeskyFactor {
 public:
  CholeskyFactor() = default;
  /// Throws SolverError if `a` is not numerically positive definite.
  explicit CholeskyFactor(const CsrMatrix& a);

  std::size_t size() const { return n_; }
  std::vector<double> solve(std::span<const double> b) const;
  void solve_into(std::span<const double> b, std::span<double> x) const;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
  std::size_t n_ = 0;
};

}  // namespace coeffid
