#include "coeffid/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "coeffid/config.hpp"
#include "json.hpp"

namespace coeffid {

namespace {

double rate_or_nan(const SweepResult& result, bool of_q) {
  std::size_t ok = 0;
  for (const auto& r : result.rows) ok += r.failed ? 0 : 1;
  if (ok < 2) return std::nan("");
  try {
    return of_q ? result.rate_e_q() : result.rate_e_u();
  } catch (const std::invalid_argument&) {
    return std::nan("");
  }
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  out.close();
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::scientific, 9);
  return std::string(buf, res.ptr);
}

std::string rows_csv(const SweepResult& result) {
  std::ostringstream out;
  out << "epsilon,gamma,n_space,n_time,tau,e_q,e_u,weighted_error,max_weight,iterations,"
         "termination,status\n";
  for (const auto& r : result.rows) {
    out << format_number(r.plan.epsilon) << ',' << format_number(r.plan.gamma) << ','
        << r.plan.n_space << ',' << r.plan.n_time << ',' << format_number(r.tau) << ',';
    if (r.failed) {
      out << "nan,nan,nan,nan," << r.iterations << ",none,failed\n";
      continue;
    }
    out << format_number(r.e_q) << ',' << format_number(r.e_u) << ','
        << format_number(r.weighted_error) << ',' << format_number(r.max_weight) << ','
        << r.iterations << ',' << to_string(r.termination) << ",ok\n";
  }
  return out.str();
}

std::string rates_csv(const SweepResult& result) {
  return "metric,rate\ne_q," + format_number(rate_or_nan(result, true)) + "\ne_u," +
         format_number(rate_or_nan(result, false)) + "\n";
}

std::string timings_csv(const SweepResult& result) {
  std::ostringstream out;
  out << "epsilon,wall_seconds\n";
  for (const auto& r : result.rows) {
    out << format_number(r.plan.epsilon) << ',' << format_number(r.wall_seconds) << '\n';
  }
  return out.str();
}

std::string optimizer_csv(const SweepResult& result) {
  std::ostringstream out;
  out << "epsilon,iterations,termination,initial_objective,final_objective,"
         "objective_decreasing,iterates_feasible,e_q_reference_mesh,failure\n";
  for (const auto& r : result.rows) {
    std::string failure = r.failure;
    for (char& c : failure) {
      if (c == ',' || c == '\n' || c == '"') c = ' ';
    }
    out << format_number(r.plan.epsilon) << ',' << r.iterations << ',' << to_string(r.termination)
        << ',' << format_number(r.initial_objective) << ',' << format_number(r.final_objective)
        << ',' << (r.objective_decreasing ? 1 : 0) << ',' << (r.iterates_feasible ? 1 : 0) << ','
        << format_number(r.e_q_ref) << ',' << failure << '\n';
  }
  return out.str();
}

std::string positivity_csv(const SweepResult& result) {
  std::ostringstream out;
  out << "beta,min_ratio,min_weight,max_weight,argmin_element,argmin_x,argmin_y\n";
  for (const auto& [beta, p] : result.diagnostics.positivity) {
    out << format_number(beta) << ',' << format_number(p.min_ratio) << ','
        << format_number(p.min_weight) << ',' << format_number(p.max_weight) << ','
        << p.argmin_element << ',' << format_number(p.argmin_centroid.x) << ','
        << format_number(p.argmin_centroid.y) << '\n';
  }
  return out.str();
}

std::string manifest_json(const SweepConfig& config, const SweepResult& result) {
  using nlohmann::json;
  json doc;
  doc["tool"] = "coeffid";
  doc["version"] = std::string(kToolVersion);
  doc["seed"] = config.seed;
  doc["config"] = json::parse(config_to_json(config));
  json rows = json::array();
  for (const auto& r : result.rows) {
    json row = {{"index", r.plan.index},       {"epsilon", r.plan.epsilon},
                {"gamma", r.plan.gamma},       {"n_space", r.plan.n_space},
                {"n_time", r.plan.n_time},     {"tau", r.tau},
                {"noise_stream", r.plan.index}, {"status", r.failed ? "failed" : "ok"}};
    if (r.failed) {
      row["failure"] = r.failure;
    } else {
      row["e_q"] = r.e_q;
      row["e_u"] = r.e_u;
      row["weighted_error"] = r.weighted_error;
      row["iterations"] = r.iterations;
      row["termination"] = std::string(to_string(r.termination));
    }
    rows.push_back(row);
  }
  doc["rows"] = rows;
  const auto finite_or_null = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  doc["rates"] = {{"e_q", finite_or_null(rate_or_nan(result, true))},
                  {"e_u", finite_or_null(rate_or_nan(result, false))}};
  return doc.dump(2) + "\n";
}

void write_run_outputs(const std::filesystem::path& dir, const SweepConfig& config,
                       const SweepResult& result) {
  std::error_code ec;
  std::filesystem::create_directories(dir / "diagnostics", ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  write_file(dir / "rows.csv", rows_csv(result));
  write_file(dir / "rates.csv", rates_csv(result));
  write_file(dir / "manifest.json", manifest_json(config, result));
  write_file(dir / "diagnostics" / "timings.csv", timings_csv(result));
  write_file(dir / "diagnostics" / "optimizer.csv", optimizer_csv(result));
  write_file(dir / "diagnostics" / "positivity.csv", positivity_csv(result));
}

}  // namespace coeffid
