#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "coeffid/fe_function.hpp"

namespace coeffid {

/// Everything that defines one benchmark: exact coefficient, data, and the
/// discretization anchors used by noise-level sweeps.
struct ProblemDefinition {
  std::string id;
  std::string summary;  ///< one-line human description including the q formula
  int dim = 1;
  bool parabolic = false;

  ScalarField q_exact;
  TimeField source;      ///< f(x, t); elliptic problems ignore t
  ScalarField initial;   ///< u0, parabolic only
  double final_time = 0.0;
  double sigma = 0.0;    ///< observation window [T - sigma, T]

  int fine_cells = 0;    ///< cells per side of the data-generation mesh
  int fine_steps = 0;    ///< time steps of the data-generation grid

  // sweep anchors: gamma = gamma0 (eps/eps0)^2, h = h0 (eps/eps0)^(1/2), tau = tau0 (eps/eps0)
  double eps0 = 0.0;
  double gamma0 = 0.0;
  double h0 = 0.0;
  double tau0 = 0.0;
  std::vector<double> epsilons;
  double initial_guess = 0.0;  ///< constant starting coefficient
};

/// ell1d, ell2d, par1d, par2d.
std::vector<std::string> builtin_problem_ids();
/// Throws std::invalid_argument on an unknown id.
ProblemDefinition builtin_problem(std::string_view id);

}  // namespace coeffid
