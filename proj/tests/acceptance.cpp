// Acceptance checks for the shipped benchmark configs. Prints one PASS/FAIL line per
// criterion and exits nonzero if any selected criterion fails.
//
//   coeffid_acceptance            all criteria
//   coeffid_acceptance 1 2 8      a subset

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "coeffid/config.hpp"
#include "coeffid/experiment.hpp"
#include "coeffid/report.hpp"
#include "coeffid/verification.hpp"

using namespace coeffid;

namespace {

struct Verdict {
  bool passed = false;
  std::string detail;
};

struct Run {
  SweepConfig config;
  SweepResult result;
  double seconds = 0.0;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

SweepConfig load(const std::string& name) {
  return parse_config_file(std::string(COEFFID_CONFIG_DIR) + "/" + name + ".json");
}

// Sweeps are shared between criteria, so each config runs once per process.
const Run& sweep(const std::string& name) {
  static std::map<std::string, Run> cache;
  auto it = cache.find(name);
  if (it == cache.end()) {
    Run r;
    r.config = load(name);
    const auto start = std::chrono::steady_clock::now();
    r.result = run_sweep(r.config);
    r.seconds = seconds_since(start);
    it = cache.emplace(name, std::move(r)).first;
  }
  return it->second;
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

bool in(double v, double lo, double hi) { return v >= lo && v <= hi; }

Verdict c1_gradients() {
  const auto start = std::chrono::steady_clock::now();
  const auto e = elliptic_gradient_check(12, 2024);
  const auto p = parabolic_gradient_check(12, 2025);
  const double t = seconds_since(start);
  const bool ok = e.worst <= 1e-5 && p.worst <= 1e-5 && t < 30.0;
  return {ok, "12 directions each; worst mismatch elliptic " + fmt("%.2e", e.worst) + ", parabolic " +
                  fmt("%.2e", p.worst) + " (need <= 1e-5); " + fmt("%.1f s", t)};
}

Verdict c2_orders() {
  const auto start = std::chrono::steady_clock::now();
  const auto e = elliptic_order_study();
  const auto p = parabolic_time_order_study();
  const double t = seconds_since(start);
  const bool ok = std::abs(e.rate - 2.0) <= 0.1 && std::abs(p.rate - 1.0) <= 0.1 && t < 30.0;
  return {ok, "elliptic L2 rate " + fmt("%.3f", e.rate) + " (need 2 +- 0.1), backward Euler rate " +
                  fmt("%.3f", p.rate) + " (need 1 +- 0.1); " + fmt("%.1f s", t)};
}

Verdict c3_ell1d() {
  const auto& r = sweep("ell1d");
  const double rq = r.result.rate_e_q(), ru = r.result.rate_e_u();
  double eq_1e2 = std::nan("");
  for (const auto& row : r.result.rows) {
    if (row.plan.epsilon == 1e-2 && !row.failed) eq_1e2 = row.e_q;
  }
  const double ratio = eq_1e2 / 8.08e-2;
  const bool ok = !r.result.any_failed() && in(rq, 0.55, 0.95) && in(ru, 0.90, 1.40) &&
                  in(ratio, 1.0 / 3.0, 3.0) && r.seconds < 120.0;
  return {ok, "rate e_q " + fmt("%.3f", rq) + " (need [0.55, 0.95]), rate e_u " + fmt("%.3f", ru) +
                  " (need [0.90, 1.40]), e_q(1e-2) " + fmt("%.3e", eq_1e2) + " (x" + fmt("%.2f", ratio) +
                  " of 8.08e-2); " + fmt("%.1f s", r.seconds)};
}

Verdict c4_par1d() {
  const auto& r = sweep("par1d");
  const double rq = r.result.rate_e_q();
  const bool ok = !r.result.any_failed() && in(rq, 0.50, 0.95) && r.seconds < 300.0;
  return {ok, "rate e_q " + fmt("%.3f", rq) + " (need [0.50, 0.95]); " + fmt("%.1f s", r.seconds)};
}

Verdict c5_ell2d() {
  const auto& r = sweep("ell2d_reduced");
  const double rq = r.result.rate_e_q();
  const bool ok = !r.result.any_failed() && in(rq, 0.50, 0.95) && r.seconds < 600.0;
  return {ok, "fine mesh " + std::to_string(r.config.problem.fine_cells) + ", rate e_q " +
                  fmt("%.3f", rq) + " (need [0.50, 0.95]); " + fmt("%.1f s", r.seconds)};
}

Verdict c6_par2d() {
  const auto& r = sweep("par2d_truncated");
  const double rq = r.result.rate_e_q();
  bool decreasing = !r.result.any_failed();
  std::string eqs;
  for (std::size_t k = 0; k < r.result.rows.size(); ++k) {
    const auto& row = r.result.rows[k];
    if (k > 0 && !(row.e_q < r.result.rows[k - 1].e_q)) decreasing = false;
    eqs += (k ? " " : "") + fmt("%.2e", row.e_q);
  }
  const bool ok = decreasing && rq >= 0.40 && r.seconds < 900.0;
  return {ok, std::string("e_q ") + eqs + (decreasing ? " (strictly decreasing)" : " (NOT decreasing)") +
                  ", rate " + fmt("%.3f", rq) + " (need >= 0.40); " + fmt("%.1f s", r.seconds)};
}

Verdict c7_optimizer() {
  bool ok = true;
  int rows = 0, worst_iters = 0;
  std::string bad;
  for (const char* name : {"ell1d", "par1d", "ell2d_reduced", "par2d_truncated"}) {
    const auto& r = sweep(name);
    const bool box_ok = r.config.box.c0 == 0.5 && r.config.box.c1 == 5.0;
    for (const auto& row : r.result.rows) {
      ++rows;
      worst_iters = std::max(worst_iters, row.iterations);
      const bool row_ok = !row.failed && row.objective_decreasing && row.iterates_feasible &&
                          row.iterations <= 100 && box_ok;
      if (!row_ok) {
        ok = false;
        bad += std::string(" ") + name + "@" + fmt("%.0e", row.plan.epsilon);
      }
    }
  }
  return {ok, std::to_string(rows) + " runs, strict decrease, iterates in [0.5, 5], max iterations " +
                  std::to_string(worst_iters) + (bad.empty() ? "" : "; violations:" + bad)};
}

Verdict c8_diagnostics() {
  const auto& e1 = sweep("ell1d");
  double min_w = std::nan("");
  for (const auto& [beta, p] : e1.result.diagnostics.positivity) {
    if (beta == 0.0) min_w = p.min_weight;
  }
  bool bound = true;
  double worst = 0.0;
  for (const auto& row : e1.result.rows) {
    const double cap = row.max_weight * row.e_q_ref * row.e_q_ref;
    worst = std::max(worst, row.weighted_error / cap);
    if (row.failed || !(row.weighted_error <= cap * 1.05)) bound = false;
  }
  const auto& e2 = sweep("ell2d_reduced");
  bool corner = false;
  Point at{};
  const auto mesh = Mesh::unit_square(e2.config.problem.fine_cells);
  for (const auto& [beta, p] : e2.result.diagnostics.positivity) {
    if (beta == 0.0) {
      corner = touches_corner(*mesh, p.argmin_element);
      at = p.argmin_centroid;
    }
  }
  const bool ok = min_w > 0.0 && bound && corner;
  return {ok, "1D min weight " + fmt("%.3e", min_w) + ", weighted / (max_w e_q^2) up to " +
                  fmt("%.3f", worst) + " (need <= 1.05), 2D argmin at (" + fmt("%.4f", at.x) + ", " +
                  fmt("%.4f", at.y) + ")" + (corner ? " touches a corner" : " away from the corners")};
}

Verdict c9_determinism() {
  bool ok = true;
  std::string detail;
  for (const auto& [name, jobs] : {std::pair<std::string, unsigned>{"ell1d", 3}, {"par1d", 2}}) {
    const auto& base = sweep(name);
    auto config = base.config;
    config.jobs = jobs;
    const bool same = rows_csv(run_sweep(config)) == rows_csv(base.result);
    config.jobs = 1;
    const bool same1 = rows_csv(run_sweep(config)) == rows_csv(base.result);
    ok = ok && same && same1;
    detail += (detail.empty() ? "" : ", ") + name + " jobs {default, 1, " + std::to_string(jobs) +
              "}: " + (same && same1 ? "identical" : "DIFFERENT");
  }
  return {ok, "rows.csv " + detail};
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<int, std::function<Verdict()>> criteria = {
      {1, c1_gradients}, {2, c2_orders},     {3, c3_ell1d},      {4, c4_par1d},      {5, c5_ell2d},
      {6, c6_par2d},     {7, c7_optimizer}, {8, c8_diagnostics}, {9, c9_determinism}};

  std::set<int> selected;
  for (int i = 1; i < argc; ++i) {
    const int k = std::atoi(argv[i]);
    if (!criteria.count(k)) {
      std::fprintf(stderr, "unknown criterion '%s' (expected 1..9)\n", argv[i]);
      return 2;
    }
    selected.insert(k);
  }
  if (selected.empty()) {
    for (const auto& [k, f] : criteria) selected.insert(k);
  }

  bool all = true;
  for (int k : selected) {
    Verdict v;
    try {
      v = criteria.at(k)();
    } catch (const std::exception& ex) {
      v = {false, std::string("threw: ") + ex.what()};
    }
    std::printf("criterion %d  %s  %s\n", k, v.passed ? "PASS" : "FAIL", v.detail.c_str());
    std::fflush(stdout);
    all = all && v.passed;
  }
  return all ? 0 : 1;
}
