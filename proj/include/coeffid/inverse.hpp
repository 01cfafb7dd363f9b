#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "coeffid/fe_function.hpp"
#include "coeffid/forward.hpp"
#include "coeffid/sparse.hpp"

namespace coeffid {

/// Pointwise bounds c0 <= q <= c1 of the admissible set.
struct AdmissibleBox {
  double c0 = 0.5;
  double c1 = 5.0;

  void validate() const;
  bool contains(std::span<const double> q) const;
};

void project_box(std::span<double> q, const AdmissibleBox& box);
FeFunction project_box(const FeFunction& q, const AdmissibleBox& box);

/// Symmetric positive semidefinite map on nodal vectors.
class LinearOperator {
 public:
  virtual ~LinearOperator() = default;
  virtual void apply(std::span<const double> v, std::span<double> out) const = 0;
};

/// Reduced objective q -> J(q) over nodal coefficient values.
class Objective {
 public:
  virtual ~Objective() = default;
  virtual std::size_t size() const = 0;
  virtual double value(std::span<const double> q) const = 0;
  /// Returns J(q) and writes dJ/dq_j into grad.
  virtual double value_and_gradient(std::span<const double> q, std::span<double> grad) const = 0;
  /// Mesh carrying the nodal unknowns, if any; enables mesh-aware search metrics.
  virtual const Mesh* mesh() const { return nullptr; }
  /// Gauss-Newton model of the Hessian at q (misfit linearized, penalty exact), if available.
  virtual std::unique_ptr<LinearOperator> gauss_newton(std::span<const double>) const {
    return nullptr;
  }
};

struct EllipticInverseProblem {
  MeshPtr mesh;
  FeFunction z;  ///< noisy observation, zero trace
  ScalarField f;
  double gamma = 0.0;
  AdmissibleBox box;
};

struct ParabolicInverseProblem {
  MeshPtr mesh;
  TimeGrid grid;
  /// z_seq[k] observes time level first_observed + k.
  std::vector<FeFunction> z_seq;
  TimeField f;
  ScalarField u0;
  double gamma = 0.0;
  AdmissibleBox box;
};

/// J(q) = 1/2 ||u_h(q) - z||^2 + gamma/2 ||grad q||^2 with an adjoint gradient.
class EllipticObjective : public Objective {
 public:
  explicit EllipticObjective(EllipticInverseProblem problem);

  std::size_t size() const override { return problem_.mesh->num_nodes(); }
  double value(std::span<const double> q) const override;
  double value_and_gradient(std::span<const double> q, std::span<double> grad) const override;
  const Mesh* mesh() const override { return problem_.mesh.get(); }
  std::unique_ptr<LinearOperator> gauss_newton(std::span<const double> q) const override;

  const EllipticInverseProblem& problem() const { return problem_; }
  /// Data misfit and penalty parts of J separately.
  std::pair<double, double> parts(std::span<const double> q) const;

 private:
  EllipticInverseProblem problem_;
  EllipticSolver solver_;
  CsrMatrix mass_;
  CsrMatrix laplacian_;
};

/// J(q) = tau sum_{n >= N_sigma} ||U^n(q) - z_n||^2 + gamma/2 ||grad q||^2.
/// The misfit sum carries weight 1 (not 1/2).
class ParabolicObjective : public Objective {
 public:
  explicit ParabolicObjective(ParabolicInverseProblem problem);

  std::size_t size() const override { return problem_.mesh->num_nodes(); }
  double value(std::span<const double> q) const override;
  double value_and_gradient(std::span<const double> q, std::span<double> grad) const override;
  const Mesh* mesh() const override { return problem_.mesh.get(); }
  std::unique_ptr<LinearOperator> gauss_newton(std::span<const double> q) const override;

  const ParabolicInverseProblem& problem() const { return problem_; }
  std::pair<double, double> parts(std::span<const double> q) const;

 private:
  ParabolicInverseProblem problem_;
  ParabolicSolver solver_;
  CsrMatrix laplacian_;
};

double objective_elliptic(const EllipticInverseProblem& p, const FeFunction& q);
std::vector<double> gradient_elliptic(const EllipticInverseProblem& p, const FeFunction& q);
double objective_parabolic(const ParabolicInverseProblem& p, const FeFunction& q);
std::vector<double> gradient_parabolic(const ParabolicInverseProblem& p, const FeFunction& q);

/// Preconditioner r = B^{-1} g from which search directions are formed.
///   euclidean:    B = I
///   lumped_mass:  B = D, the lumped mass matrix
///   sobolev:      B = l^2 K_1 + D, an H1 inner product with length scale l
///   gauss_newton: B = Gauss-Newton Hessian at the current iterate, inverted approximately by
///                 a few CG steps preconditioned with the sobolev metric
/// L2 steps stall where grad u vanishes, since the misfit barely sees q there.
enum class SearchMetric { euclidean, lumped_mass, sobolev, gauss_newton };

struct OptimizerOptions {
  int max_iters = 100;
  double grad_rel_tol = 1e-6;
  double obj_rel_tol = 1e-10;
  double armijo_c = 1e-4;
  double backtrack_factor = 0.5;
  int max_backtracks = 40;
  /// Sup-norm length of the first trial step (coefficient units).
  double initial_step = 1.0;
  SearchMetric metric = SearchMetric::gauss_newton;
  double sobolev_length = 0.3;
  int inner_iters = 10;     ///< CG steps per Gauss-Newton direction
  double inner_tol = 0.1;   ///< relative residual at which those steps stop early

  void validate() const;
};

enum class Termination { gradient_tolerance, objective_stall, max_iterations, stagnation };
std::string_view to_string(Termination t);

struct OptimizeResult {
  FeFunction q_star;
  std::vector<double> objective_history;
  /// Gradient norms in the metric of B (sobolev for gauss_newton), so they are comparable.
  std::vector<double> grad_norm_history;
  int iterations = 0;
  Termination termination = Termination::max_iterations;
};

/// Called with (iteration, accepted iterate) after every accepted step and for the start point.
using IterateObserver = std::function<void(int, std::span<const double>)>;

/// Projected Polak-Ribiere+ nonlinear CG with Armijo backtracking on projected trial points.
OptimizeResult ncg_minimize(const Objective& objective, const FeFunction& q0,
                            const AdmissibleBox& box, const OptimizerOptions& opts = {},
                            const IterateObserver& observer = {});

}  // namespace coeffid
