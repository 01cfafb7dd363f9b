#include <clocale>
#include <filesystem>
#include <fstream>

#include "coeffid/config.hpp"
#include "coeffid/report.hpp"
#include "doctest.h"

using namespace coeffid;

namespace {

std::string error_path(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const ConfigError& e) {
    return e.path();
  }
  return "<no error>";
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("builtin elliptic defaults") {
    const auto c = parse_config_text(R"({"example": "ell1d"})");
    CHECK(c.problem.id == "ell1d");
    CHECK(c.problem.q_exact({0.25, 0.0}) == doctest::Approx(3.0));
    CHECK(c.problem.source({0.3, 0.0}, 0.0) == 1.0);
    CHECK(c.problem.fine_cells == 3200);
    CHECK(c.problem.eps0 == 5e-2);
    CHECK(c.problem.gamma0 == 5e-8);
    CHECK(c.problem.h0 == 2.5e-2);
    CHECK(c.epsilons.size() == 7);
  }

  TEST_CASE("builtin parabolic defaults") {
    const auto c = parse_config_text(R"({"example": "par1d"})");
    CHECK(c.problem.parabolic);
    CHECK(c.problem.final_time == 0.1);
    CHECK(c.problem.sigma == 0.0);
    CHECK(c.problem.initial({0.5, 0.0}) == doctest::Approx(1.0));
    CHECK(c.problem.source({0.5, 0.0}, 0.0) == doctest::Approx(1.0));
    CHECK(c.problem.q_exact({0.25, 0.0}) == doctest::Approx(2.0 + std::exp(-1.5)));
  }

  TEST_CASE("overrides") {
    const auto c = parse_config_text(R"({
      "example": "par2d", "seed": 7, "epsilons": [1e-2, 5e-3],
      "fine": {"cells": 100, "steps": 640}, "time": {"sigma": 0.05},
      "optimizer": {"max_iters": 30, "metric": "sobolev"}, "box": {"c0": 0.6, "c1": 4},
      "jobs": 2})");
    CHECK(c.seed == 7);
    CHECK(c.epsilons == std::vector<double>{1e-2, 5e-3});
    CHECK(c.problem.fine_cells == 100);
    CHECK(c.problem.fine_steps == 640);
    CHECK(c.problem.sigma == 0.05);
    CHECK(c.optimizer.max_iters == 30);
    CHECK(c.optimizer.metric == SearchMetric::sobolev);
    CHECK(c.box.c0 == 0.6);
    CHECK(c.jobs == 2);
  }

  TEST_CASE("errors name the offending key") {
    CHECK(error_path(R"({"example": "ell1d", "epsilons": []})") == "epsilons");
    CHECK(error_path(R"({"example": "ell1d", "epsilons": [1e-2, "x"]})") == "epsilons[1]");
    CHECK(error_path(R"({"example": "ell1d", "epsilons": [1e-3, 1e-2]})") == "epsilons[1]");
    CHECK(error_path(R"({"example": "nope"})") == "example");
    CHECK(error_path(R"({"seed": 1})") == "example");
    CHECK(error_path(R"({"example": "ell1d", "optimizer": {"max_iters": -1}})") == "optimizer.max_iters");
    CHECK(error_path(R"({"example": "ell1d", "optimizer": {"metric": "newton"}})") == "optimizer.metric");
    CHECK(error_path(R"({"example": "ell1d", "optimizer": {"typo": 1}})") == "optimizer.typo");
    CHECK(error_path(R"({"example": "ell1d", "anchors": {"gamma0": 0}})") == "anchors.gamma0");
    CHECK(error_path(R"({"example": "ell1d", "time": {"sigma": 0}})") == "time");
    CHECK(error_path(R"({"example": "par1d", "time": {"sigma": 0.2}})") == "time.sigma");
    CHECK(error_path(R"({"example": "ell1d", "unknown": 1})") == "unknown");
    CHECK(error_path(R"({"example": "ell1d", "initial_guess": 9})") == "initial_guess");
    CHECK(error_path("{not json") == "");
  }

  TEST_CASE("inconsistent grids are configuration errors") {
    // fine mesh 7 has no divisor near the planned coarse mesh sizes besides 7 itself, which
    // is fine; an unrepresentable window is not
    CHECK_THROWS_AS(parse_config_text(R"({"example": "par1d", "time": {"sigma": 0.0333}})"), ConfigError);
  }

  TEST_CASE("resolved config round-trips") {
    const auto a = parse_config_text(R"({"example": "par1d", "seed": 3, "epsilons": [3e-2, 1e-3],
                                         "optimizer": {"metric": "lumped_mass", "inner_tol": 0.2}})");
    const auto text = config_to_json(a);
    const auto b = parse_config_text(text);
    CHECK(config_to_json(b) == text);
    CHECK(b.seed == 3);
    CHECK(b.optimizer.metric == SearchMetric::lumped_mass);
    // a manifest is accepted as a config
    CHECK(config_to_json(parse_config_text("{\"tool\": \"coeffid\", \"config\": " + text + "}")) == text);
  }

  TEST_CASE("config files") {
    const auto dir = std::filesystem::temp_directory_path() / "coeffid_cli_test";
    std::filesystem::create_directories(dir);
    {
      std::ofstream(dir / "c.json") << R"({"example": "ell2d", "fine": {"cells": 100}})";
    }
    CHECK(parse_config_file(dir / "c.json").problem.fine_cells == 100);
    CHECK_THROWS_AS(parse_config_file(dir / "missing.json"), ConfigError);
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("numbers are formatted without the locale") {
    CHECK(format_number(0.5) == "5.000000000e-01");
    CHECK(format_number(-1234.5) == "-1.234500000e+03");
    CHECK(format_number(std::nan("")) == "nan");
    std::setlocale(LC_NUMERIC, "de_DE.UTF-8");  // may not exist; harmless then
    CHECK(format_number(0.25) == "2.500000000e-01");
    std::setlocale(LC_NUMERIC, "C");
  }

  TEST_CASE("csv layout") {
    SweepResult r;
    SweepRow row;
    row.plan = {0, 1e-2, 2e-9, 80, 0};
    row.e_q = 0.07;
    row.e_u = 1.6e-4;
    row.iterations = 42;
    row.termination = Termination::gradient_tolerance;
    row.wall_seconds = 1.234;
    r.rows.push_back(row);
    SweepRow failed = row;
    failed.plan.epsilon = 5e-3;
    failed.failed = true;
    failed.failure = "boom, with comma";
    r.rows.push_back(failed);

    const auto csv = rows_csv(r);
    CHECK(csv.rfind("epsilon,gamma,n_space,n_time,tau,e_q,e_u,weighted_error,max_weight,iterations,"
                    "termination,status\n", 0) == 0);
    CHECK(csv.find("1.000000000e-02,2.000000000e-09,80,0,") != std::string::npos);
    CHECK(csv.find("gradient_tolerance,ok") != std::string::npos);
    CHECK(csv.find(",failed\n") != std::string::npos);
    CHECK(csv.find("1.234") == std::string::npos);  // wall time lives elsewhere
    CHECK(timings_csv(r).find("1.234000000e+00") != std::string::npos);
    CHECK(rates_csv(r) == "metric,rate\ne_q,nan\ne_u,nan\n");
    CHECK(optimizer_csv(r).find("boom  with comma") != std::string::npos);
  }

  TEST_CASE("outputs land in the directory") {
    const auto dir = std::filesystem::temp_directory_path() / "coeffid_out_test";
    std::filesystem::remove_all(dir);
    const auto c = parse_config_text(R"({"example": "ell1d", "epsilons": [1e-2]})");
    SweepResult r;
    r.rows.resize(1);
    write_run_outputs(dir, c, r);
    for (const char* f : {"rows.csv", "rates.csv", "manifest.json", "diagnostics/timings.csv",
                          "diagnostics/optimizer.csv", "diagnostics/positivity.csv"}) {
      CHECK(std::filesystem::exists(dir / f));
    }
    // the manifest is itself a runnable configuration
    CHECK(config_to_json(parse_config_file(dir / "manifest.json")) == config_to_json(c));
    std::filesystem::remove_all(dir);
    CHECK_THROWS_AS(write_run_outputs("/dev/null/sub", c, r), IoError);
  }
}
