#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "coeffid/fe_function.hpp"
#include "coeffid/forward.hpp"
#include "coeffid/inverse.hpp"
#include "coeffid/problems.hpp"

namespace coeffid {

struct NoiseSpec {
  double epsilon = 0.0;  ///< relative level: perturbation = epsilon * sup|u| * N(0,1)
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;  ///< sweep point index; decorrelates points with one seed
};

/// Deterministic generator for one (seed, stream) pair.
std::mt19937_64 make_rng(const NoiseSpec& noise);

// ---------------------------------------------------------------------------
// Reference (fine-grid, noise-free) solutions

struct EllipticReference {
  MeshPtr mesh;
  FeFunction q;  ///< I_h q_exact on the fine mesh
  FeFunction u;
  double sup_abs = 0.0;
};

EllipticReference solve_reference_elliptic(const ScalarField& q_exact, const ScalarField& f,
                                           int fine_cells, int dim);

struct ParabolicReference {
  MeshPtr mesh;
  TimeGrid grid;
  FeFunction q;
  std::map<int, std::vector<double>> states;  ///< nodal fine states kept by index
  double sup_abs = 0.0;                       ///< max over all nodes and time levels

  std::span<const double> state(int fine_step) const;
};

/// Fine steps needed to synthesize data and evaluate metrics for a coarse grid.
std::set<int> required_fine_steps(const TimeGrid& fine, const TimeGrid& coarse);

ParabolicReference solve_reference_parabolic(const ProblemDefinition& def,
                                             const std::set<int>& keep);

// ---------------------------------------------------------------------------
// Data synthesis

/// Noisy observation on `coarse`: fine solution plus eps*sup|u|*xi per fine node, sampled at
/// coarse nodes, boundary forced to zero.
FeFunction synthesize_elliptic(const EllipticReference& ref, const MeshPtr& coarse,
                               const NoiseSpec& noise);
FeFunction synthesize_elliptic(const ScalarField& q_exact, const ScalarField& f, int fine_cells,
                               const MeshPtr& coarse, const NoiseSpec& noise);

/// Observations z_n for n = N_sigma..N of `grid`: noisy fine snapshots averaged over
/// (t_{n-1}, t_n], then sampled at coarse nodes.
std::vector<FeFunction> synthesize_parabolic(const ParabolicReference& ref, const MeshPtr& coarse,
                                             const TimeGrid& grid, const NoiseSpec& noise);

// ---------------------------------------------------------------------------
// Error metrics and diagnostics

/// ||q* - I_h q_exact|| in the coarse mass norm.
double error_q(const FeFunction& q_star, const ScalarField& q_exact);
/// ||u_h(q*) - u_ref|| with the reference sampled on the coarse mesh.
double error_u_elliptic(const FeFunction& q_star, const ScalarField& f,
                        const EllipticReference& ref);
/// (tau sum_{n >= N_sigma} ||U^n(q*) - u_ref(t_n)||^2)^(1/2).
double error_u_parabolic(const FeFunction& q_star, const ProblemDefinition& def,
                         const TimeGrid& grid, const ParabolicReference& ref);

struct WeightedError {
  double weighted = 0.0;    ///< sum_T w_T int_T (q_exact - q*)^2
  double max_weight = 0.0;  ///< max_T w_T
  double e_q_ref = 0.0;     ///< ||q_exact - q*|| on the reference mesh
};

/// Weighted L2 error with w = q|grad u|^2 + f u evaluated per reference element.
WeightedError weighted_error_elliptic(const FeFunction& q_star, const ScalarField& q_exact,
                                      const ScalarField& f, const EllipticReference& ref);

/// Parabolic analogue: mean over observed levels n of
/// sum_T w_T^n int_T ((q_exact - q*)/q_exact)^2, w^n = q|grad u(t_n)|^2 + (f - u_t) u(t_n).
WeightedError weighted_error_parabolic(const FeFunction& q_star, const ProblemDefinition& def,
                                       const TimeGrid& grid, const ParabolicReference& ref);

struct PositivityProfile {
  double min_ratio = 0.0;   ///< min_T w_T / dist(centroid, boundary)^beta
  double min_weight = 0.0;  ///< min_T w_T
  double max_weight = 0.0;
  std::size_t argmin_element = 0;
  Point argmin_centroid;
};

PositivityProfile positivity_profile(const ScalarField& q_exact, const ScalarField& f,
                                     const EllipticReference& ref, double beta);
/// Minimum over the observed levels of the reference grid; u_t is the backward difference.
/// The reference must keep those levels and their predecessors (see observed_fine_steps).
PositivityProfile positivity_profile(const ProblemDefinition& def, const ParabolicReference& ref,
                                     double beta);
std::set<int> observed_fine_steps(const TimeGrid& fine);

/// True if element e of the mesh has a vertex at a corner of the unit square.
bool touches_corner(const Mesh& mesh, std::size_t e);

/// Least-squares slope of log(e) against log(eps).
double fit_rate(std::span<const std::pair<double, double>> points);

// ---------------------------------------------------------------------------
// Sweeps

struct SweepConfig {
  ProblemDefinition problem;
  std::vector<double> epsilons;  ///< strictly descending
  std::uint64_t seed = 0;
  AdmissibleBox box;
  OptimizerOptions optimizer;
  std::vector<double> betas = {0.0, 2.0};
  unsigned jobs = 0;  ///< worker threads; 0 = hardware concurrency

  void validate() const;
};

/// Discretization chosen for one noise level.
struct PointPlan {
  std::size_t index = 0;
  double epsilon = 0.0;
  double gamma = 0.0;
  int n_space = 0;
  int n_time = 0;  ///< 0 for elliptic problems
};

/// gamma ~ eps^2, h ~ eps^(1/2), tau ~ eps, rounded to grids nested in the data grids.
std::vector<PointPlan> plan_sweep(const SweepConfig& config);

/// Divisor d >= min_value of `total` nearest to target (ties to the smaller),
/// restricted to divisors accepted by `ok`.
int nearest_divisor(int total, double target, int min_value = 1,
                    const std::function<bool(int)>& ok = {});

struct SweepRow {
  PointPlan plan;
  double tau = 0.0;
  double e_q = 0.0;
  double e_u = 0.0;
  double weighted_error = 0.0;
  double max_weight = 0.0;
  double e_q_ref = 0.0;
  int iterations = 0;
  double wall_seconds = 0.0;
  Termination termination = Termination::max_iterations;
  bool objective_decreasing = true;  ///< strictly, along the accepted iterates
  bool iterates_feasible = true;
  double initial_objective = 0.0;
  double final_objective = 0.0;
  bool failed = false;
  std::string failure;
  std::vector<double> q_star;  ///< nodal reconstruction
};

struct SweepDiagnostics {
  std::vector<std::pair<double, PositivityProfile>> positivity;  ///< (beta, profile)
  double reference_sup = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;  ///< in the order of config.epsilons
  SweepDiagnostics diagnostics;

  double rate_e_q() const;
  double rate_e_u() const;
  bool any_failed() const;
};

SweepResult run_sweep(const SweepConfig& config);

}  // namespace coeffid
