#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "coeffid/inverse.hpp"

namespace coeffid {

/// Directional derivatives g^T d against central differences (J(q+sd) - J(q-sd)) / 2s.
/// For each direction the smallest mismatch over s = 1e-3 .. 1e-8 is kept (the plateau).
struct GradientCheck {
  std::vector<double> mismatch;  ///< per direction, relative to |g^T d|
  double worst = 0.0;
};

GradientCheck check_gradient(const Objective& objective, std::span<const double> q,
                             int directions, std::uint64_t seed);

/// Wraps an objective and negates its gradient. Used as a negative control.
class SignFlippedObjective : public Objective {
 public:
  explicit SignFlippedObjective(const Objective& inner) : inner_(inner) {}
  std::size_t size() const override { return inner_.size(); }
  double value(std::span<const double> q) const override { return inner_.value(q); }
  double value_and_gradient(std::span<const double> q, std::span<double> grad) const override;

 private:
  const Objective& inner_;
};

/// Gradient check on the 1D elliptic benchmark (n = 25, noisy data, gamma > 0).
GradientCheck elliptic_gradient_check(int directions, std::uint64_t seed, bool flip_sign = false);
/// Gradient check on the 1D parabolic benchmark (n = 25, N = 100).
GradientCheck parabolic_gradient_check(int directions, std::uint64_t seed, bool flip_sign = false);

struct OrderStudy {
  std::vector<double> steps;   ///< h or tau
  std::vector<double> errors;
  double rate = 0.0;           ///< least-squares slope of log(error) against log(step)
};

/// q = 1, f = 1 on (0,1): exact L2 error of u_h against x(1-x)/2 for h = 1/8 .. 1/128.
OrderStudy elliptic_order_study();
/// Heat decay u = exp(-pi^2 t) sin(pi x) with h = 1/256 and tau = 1/10 .. 1/160 up to T = 0.3.
OrderStudy parabolic_time_order_study();

/// Sample standard deviation of the synthetic noise on the 1D elliptic data mesh,
/// divided by its nominal value eps * sup|u|.
double elliptic_noise_std_ratio(double epsilon, std::uint64_t seed);
/// Same for time-averaged parabolic data with m fine steps per interval, divided by
/// eps * sup|u| / sqrt(m).
double parabolic_noise_std_ratio(double epsilon, std::uint64_t seed, int steps_per_interval);

struct CheckOutcome {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// The built-in verification suite behind `coeffid verify`.
std::vector<CheckOutcome> run_verification(bool flip_gradient_sign = false);

}  // namespace coeffid
