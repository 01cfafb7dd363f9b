#include "coeffid/problems.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace coeffid {

namespace {

constexpr double pi = std::numbers::pi;

const std::vector<double> kDefaultNoiseLevels = {5e-2, 3e-2, 1e-2, 5e-3, 3e-3, 1e-3, 5e-4};

ProblemDefinition ell1d() {
  ProblemDefinition p;
  p.id = "ell1d";
  p.summary = "elliptic, Omega=(0,1), q(x)=2+sin(2*pi*x), f=1, data mesh h=1/3200";
  p.dim = 1;
  p.q_exact = [](const Point& x) { return 2.0 + std::sin(2.0 * pi * x.x); };
  p.source = [](const Point&, double) { return 1.0; };
  p.fine_cells = 3200;
  p.eps0 = 5e-2;
  p.gamma0 = 5e-8;
  p.h0 = 2.5e-2;
  p.epsilons = kDefaultNoiseLevels;
  p.initial_guess = 2.0;
  return p;
}

ProblemDefinition ell2d() {
  ProblemDefinition p;
  p.id = "ell2d";
  p.summary = "elliptic, Omega=(0,1)^2, q(x,y)=1+y(1-y)sin(pi*x), f=1, data mesh h=1/200";
  p.dim = 2;
  p.q_exact = [](const Point& x) { return 1.0 + x.y * (1.0 - x.y) * std::sin(pi * x.x); };
  p.source = [](const Point&, double) { return 1.0; };
  p.fine_cells = 200;
  p.eps0 = 5e-2;
  p.gamma0 = 5e-6;
  p.h0 = 1.0 / 12.0;
  p.epsilons = kDefaultNoiseLevels;
  p.initial_guess = 1.5;
  return p;
}

ProblemDefinition par1d() {
  ProblemDefinition p;
  p.id = "par1d";
  p.summary =
      "parabolic, Omega=(0,1), T=0.1, sigma=0, q(x)=2+sin(2*pi*x)exp(-2(1-x)), "
      "u0=sin(pi*x), f=4x(1-x), data grid h=1/1600 tau=1/8000";
  p.dim = 1;
  p.parabolic = true;
  p.q_exact = [](const Point& x) {
    return 2.0 + std::sin(2.0 * pi * x.x) * std::exp(-2.0 * (1.0 - x.x));
  };
  p.source = [](const Point& x, double) { return 4.0 * x.x * (1.0 - x.x); };
  p.initial = [](const Point& x) { return std::sin(pi * x.x); };
  p.final_time = 0.1;
  p.sigma = 0.0;
  p.fine_cells = 1600;
  p.fine_steps = 800;
  p.eps0 = 5e-2;
  p.gamma0 = 1e-7;
  p.h0 = 2.5e-2;
  p.tau0 = 1.0 / 400.0;
  p.epsilons = kDefaultNoiseLevels;
  p.initial_guess = 2.0;
  return p;
}

ProblemDefinition par2d() {
  ProblemDefinition p;
  p.id = "par2d";
  p.summary =
      "parabolic, Omega=(0,1)^2, T=0.1, sigma=0, q(x,y)=1+(1-x)x sin(pi*y), "
      "u0=4x(1-x), f=1, data grid h=1/200 tau=1/12800";
  p.dim = 2;
  p.parabolic = true;
  p.q_exact = [](const Point& x) { return 1.0 + (1.0 - x.x) * x.x * std::sin(pi * x.y); };
  p.source = [](const Point&, double) { return 1.0; };
  p.initial = [](const Point& x) { return 4.0 * x.x * (1.0 - x.x); };
  p.final_time = 0.1;
  p.sigma = 0.0;
  p.fine_cells = 200;
  p.fine_steps = 1280;
  p.eps0 = 5e-2;
  p.gamma0 = 1e-6;
  p.h0 = 1.0 / 12.0;
  p.tau0 = 1.0 / 1600.0;
  p.epsilons = kDefaultNoiseLevels;
  p.initial_guess = 1.5;
  return p;
}

}  // namespace

std::vector<std::string> builtin_problem_ids() { return {"ell1d", "ell2d", "par1d", "par2d"}; }

ProblemDefinition builtin_problem(std::string_view id) {
  if (id == "ell1d") return ell1d();
  if (id == "ell2d") return ell2d();
  if (id == "par1d") return par1d();
  if (id == "par2d") return par2d();
  throw std::invalid_argument("unknown builtin problem '" + std::string(id) + "'");
}

}  // namespace coeffid
