#include "coeffid/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace coeffid {

namespace {

using nlohmann::json;

std::string join(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

class Reader {
 public:
  Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(path_, "expected an object");
  }

  bool has(const char* key) const { return node_.contains(key); }
  std::string child_path(const char* key) const { return join(path_, key); }

  Reader object(const char* key) const {
    used_.push_back(key);
    return Reader(node_.at(key), join(path_, key));
  }

  double number(const char* key, double fallback) const {
    if (!has(key)) return fallback;
    used_.push_back(key);
    const auto& v = node_.at(key);
    if (!v.is_number()) throw ConfigError(join(path_, key), "expected a number");
    return v.get<double>();
  }

  long long integer(const char* key, long long fallback) const {
    if (!has(key)) return fallback;
    used_.push_back(key);
    const auto& v = node_.at(key);
    if (!v.is_number_integer()) throw ConfigError(join(path_, key), "expected an integer");
    return v.get<long long>();
  }

  std::string string(const char* key) const {
    used_.push_back(key);
    const auto& v = node_.at(key);
    if (!v.is_string()) throw ConfigError(join(path_, key), "expected a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const char* key) const {
    used_.push_back(key);
    const auto& v = node_.at(key);
    if (!v.is_array()) throw ConfigError(join(path_, key), "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) {
        throw ConfigError(join(path_, key) + "[" + std::to_string(i) + "]", "expected a number");
      }
      out.push_back(v[i].get<double>());
    }
    return out;
  }

  /// Rejects keys that no accessor asked for.
  void finish() const {
    for (const auto& [key, value] : node_.items()) {
      if (std::find(used_.begin(), used_.end(), key) == used_.end()) {
        throw ConfigError(join(path_, key), "unknown key");
      }
    }
  }

 private:
  const json& node_;
  std::string path_;
  mutable std::vector<std::string> used_;
};

int positive_int(const Reader& r, const char* key, int fallback) {
  const long long v = r.integer(key, fallback);
  if (v < 1 || v > 1'000'000'000) throw ConfigError(r.child_path(key), "must be a positive integer");
  return static_cast<int>(v);
}

double positive(const Reader& r, const char* key, double fallback) {
  const double v = r.number(key, fallback);
  if (!(v > 0.0)) throw ConfigError(r.child_path(key), "must be positive");
  return v;
}

SearchMetric parse_metric(const std::string& s, const std::string& path) {
  if (s == "euclidean") return SearchMetric::euclidean;
  if (s == "lumped_mass") return SearchMetric::lumped_mass;
  if (s == "sobolev") return SearchMetric::sobolev;
  if (s == "gauss_newton") return SearchMetric::gauss_newton;
  throw ConfigError(path, "unknown metric '" + s +
                              "' (expected euclidean, lumped_mass, sobolev or gauss_newton)");
}

const char* metric_name(SearchMetric m) {
  switch (m) {
    case SearchMetric::euclidean: return "euclidean";
    case SearchMetric::lumped_mass: return "lumped_mass";
    case SearchMetric::sobolev: return "sobolev";
    case SearchMetric::gauss_newton: return "gauss_newton";
  }
  return "gauss_newton";
}

void parse_optimizer(const Reader& r, OptimizerOptions& o) {
  o.max_iters = positive_int(r, "max_iters", o.max_iters);
  o.grad_rel_tol = positive(r, "grad_rel_tol", o.grad_rel_tol);
  o.obj_rel_tol = positive(r, "obj_rel_tol", o.obj_rel_tol);
  o.armijo_c = positive(r, "armijo_c", o.armijo_c);
  o.backtrack_factor = positive(r, "backtrack_factor", o.backtrack_factor);
  if (!(o.backtrack_factor < 1.0)) {
    throw ConfigError(r.child_path("backtrack_factor"), "must lie in (0, 1)");
  }
  o.max_backtracks = positive_int(r, "max_backtracks", o.max_backtracks);
  o.initial_step = positive(r, "initial_step", o.initial_step);
  if (r.has("metric")) o.metric = parse_metric(r.string("metric"), r.child_path("metric"));
  o.sobolev_length = positive(r, "sobolev_length", o.sobolev_length);
  o.inner_iters = positive_int(r, "inner_iters", o.inner_iters);
  o.inner_tol = positive(r, "inner_tol", o.inner_tol);
  r.finish();
}

SweepConfig parse_document(const json& doc) {
  if (doc.is_object() && doc.contains("config") && !doc.contains("example")) {
    return parse_document(doc.at("config"));
  }
  const Reader r(doc, "");
  if (!r.has("example")) throw ConfigError("example", "missing key");
  const std::string id = r.string("example");

  SweepConfig c;
  try {
    c.problem = builtin_problem(id);
  } catch (const std::invalid_argument&) {
    std::string known;
    for (const auto& k : builtin_problem_ids()) known += (known.empty() ? "" : ", ") + k;
    throw ConfigError("example", "unknown example '" + id + "' (expected one of " + known + ")");
  }
  auto& p = c.problem;

  const long long seed = r.integer("seed", 0);
  if (seed < 0) throw ConfigError("seed", "must be nonnegative");
  c.seed = static_cast<std::uint64_t>(seed);

  c.epsilons = r.has("epsilons") ? r.numbers("epsilons") : p.epsilons;
  if (c.epsilons.empty()) throw ConfigError("epsilons", "needs at least one noise level");
  for (std::size_t i = 0; i < c.epsilons.size(); ++i) {
    const std::string at = "epsilons[" + std::to_string(i) + "]";
    if (!(c.epsilons[i] > 0.0)) throw ConfigError(at, "must be positive");
    if (i > 0 && !(c.epsilons[i] < c.epsilons[i - 1])) {
      throw ConfigError(at, "noise levels must be strictly descending");
    }
  }

  if (r.has("anchors")) {
    const Reader a = r.object("anchors");
    p.eps0 = positive(a, "eps0", p.eps0);
    p.gamma0 = positive(a, "gamma0", p.gamma0);
    p.h0 = positive(a, "h0", p.h0);
    if (p.parabolic) p.tau0 = positive(a, "tau0", p.tau0);
    a.finish();
  }
  if (r.has("fine")) {
    const Reader f = r.object("fine");
    p.fine_cells = positive_int(f, "cells", p.fine_cells);
    if (p.fine_cells < 2) throw ConfigError(f.child_path("cells"), "must be at least 2");
    if (p.parabolic) p.fine_steps = positive_int(f, "steps", p.fine_steps);
    f.finish();
  }
  if (r.has("time")) {
    if (!p.parabolic) throw ConfigError("time", "only parabolic examples have a time interval");
    const Reader t = r.object("time");
    p.final_time = positive(t, "final", p.final_time);
    p.sigma = t.number("sigma", p.sigma);
    if (!(p.sigma >= 0.0 && p.sigma < p.final_time)) {
      throw ConfigError(t.child_path("sigma"), "must satisfy 0 <= sigma < final");
    }
    t.finish();
  }
  p.initial_guess = r.number("initial_guess", p.initial_guess);
  if (r.has("box")) {
    const Reader b = r.object("box");
    c.box.c0 = b.number("c0", c.box.c0);
    c.box.c1 = b.number("c1", c.box.c1);
    b.finish();
    if (!(c.box.c0 > 0.0 && c.box.c0 < c.box.c1)) {
      throw ConfigError("box", "needs 0 < c0 < c1");
    }
  }
  if (!(p.initial_guess >= c.box.c0 && p.initial_guess <= c.box.c1)) {
    throw ConfigError("initial_guess", "must lie in the admissible box");
  }
  if (r.has("optimizer")) parse_optimizer(r.object("optimizer"), c.optimizer);
  if (r.has("betas")) c.betas = r.numbers("betas");
  if (r.has("jobs")) {
    const long long jobs = r.integer("jobs", 0);
    if (jobs < 0 || jobs > 4096) throw ConfigError("jobs", "must be in 0..4096");
    c.jobs = static_cast<unsigned>(jobs);
  }
  r.finish();

  try {
    c.validate();
    plan_sweep(c);
  } catch (const std::invalid_argument& ex) {
    throw ConfigError("", ex.what());
  }
  return c;
}

}  // namespace

SweepConfig parse_config_text(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& ex) {
    throw ConfigError("", std::string("malformed JSON: ") + ex.what());
  }
  return parse_document(doc);
}

SweepConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string config_to_json(const SweepConfig& c, int indent) {
  const auto& p = c.problem;
  json doc;
  doc["example"] = p.id;
  doc["seed"] = c.seed;
  doc["epsilons"] = c.epsilons;
  doc["anchors"] = {{"eps0", p.eps0}, {"gamma0", p.gamma0}, {"h0", p.h0}};
  doc["fine"] = {{"cells", p.fine_cells}};
  if (p.parabolic) {
    doc["anchors"]["tau0"] = p.tau0;
    doc["fine"]["steps"] = p.fine_steps;
    doc["time"] = {{"final", p.final_time}, {"sigma", p.sigma}};
  }
  doc["initial_guess"] = p.initial_guess;
  doc["box"] = {{"c0", c.box.c0}, {"c1", c.box.c1}};
  const auto& o = c.optimizer;
  doc["optimizer"] = {{"max_iters", o.max_iters},
                      {"grad_rel_tol", o.grad_rel_tol},
                      {"obj_rel_tol", o.obj_rel_tol},
                      {"armijo_c", o.armijo_c},
                      {"backtrack_factor", o.backtrack_factor},
                      {"max_backtracks", o.max_backtracks},
                      {"initial_step", o.initial_step},
                      {"metric", metric_name(o.metric)},
                      {"sobolev_length", o.sobolev_length},
                      {"inner_iters", o.inner_iters},
                      {"inner_tol", o.inner_tol}};
  doc["betas"] = c.betas;
  return doc.dump(indent);
}

}  // namespace coeffid
