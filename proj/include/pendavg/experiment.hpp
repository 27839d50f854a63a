#pragma once
// Experiment configuration (JSON) and the deterministic CSV/JSON formats
// emitted by the command-line front end.

#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pendavg/averaging.hpp"
#include "pendavg/continuation.hpp"
#include "pendavg/error.hpp"
#include "pendavg/pendulum.hpp"
#include "pendavg/zeros.hpp"

namespace pendavg {

inline const std::vector<double> kDefaultEpsilonLadder{1e-2, 5e-3, 2.5e-3, 1e-3};

/// Serialized form of a PerturbationSpec plus the search and verification knobs.
///
/// JSON schema (all keys optional, unknown keys rejected):
///   f1, f2        string   perturbation expressions
///   mode          string   "mode1" | "mode2"
///   p, q          integer  resonance, coprime
///   r1, r2        number   annulus radii, 0 < r1 < r2
///   tol           number   quadrature tolerance
///   newton_tol    number   zero residual tolerance
///   seeds         integer  polar seed grid is seeds x seeds
///   det_threshold number   simplicity threshold on |det|
///   dedup_radius  number
///   eps           number[] epsilon ladder for verification (empty: no shooting)
///   out           string   output directory
///   jobs          integer  worker threads for the zero search
struct ExperimentConfig {
  std::string f1 = "0";
  std::string f2 = "0";
  std::string mode = "mode1";
  int p = 1;
  int q = 1;
  double r1 = 1e-2;
  double r2 = 50.0;
  double tol = 1e-12;
  double newton_tol = 1e-11;
  int seeds = 24;
  double det_threshold = 1e-8;
  double dedup_radius = 1e-6;
  std::vector<double> eps = kDefaultEpsilonLadder;
  std::string out;
  int jobs = 1;

  void validate() const {
    parse_mode(mode);
    Resonance(p, q);
    zero_options().validate();
    if (!(tol > 0.0)) throw ConfigError("tol must be positive");
    for (double e : eps)
      if (!std::isfinite(e) || e == 0.0) throw ConfigError("epsilon values must be finite and nonzero");
  }

  ZeroSearchOptions zero_options() const {
    ZeroSearchOptions o;
    o.r1 = r1;
    o.r2 = r2;
    o.radial_seeds = o.angular_seeds = seeds;
    o.zero_tolerance = newton_tol;
    o.simplicity_threshold = det_threshold;
    o.dedup_radius = dedup_radius;
    o.jobs = jobs;
    return o;
  }

  PerturbationSpec spec() const {
    validate();
    return make_spec(f1, f2, parse_mode(mode), p, q);
  }
};

/// Forcing of the first worked example: F1 = 0, F2 = (1 - th1^2) sin(w1 tau).
inline ExperimentConfig preset_corollary1() {
  ExperimentConfig c;
  c.f1 = "0";
  c.f2 = "(1 - th1^2) * sin(w1 * tau)";
  c.mode = "mode1";
  c.r1 = 0.1;
  c.r2 = 10.0;
  return c;
}

/// Forcing of the second worked example: F1 = th2' + th1^2 cos(w2 tau), F2 = 0.
inline ExperimentConfig preset_corollary2() {
  ExperimentConfig c;
  c.f1 = "th2d + th1^2 * cos(w2 * tau)";
  c.f2 = "0";
  c.mode = "mode2";
  c.r1 = 0.1;
  c.r2 = 40.0;
  return c;
}

inline ExperimentConfig preset(const std::string& name) {
  if (name == "corollary1") return preset_corollary1();
  if (name == "corollary2") return preset_corollary2();
  throw ConfigError("unknown preset '" + name + "' (expected corollary1 or corollary2)");
}

namespace detail {

template <class T>
T read_field(const nlohmann::json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("config key '") + key + "' has the wrong type");
  }
}

}  // namespace detail

/// Overlays the keys present in `j` onto `base`.
inline ExperimentConfig merge_config(ExperimentConfig base, const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> known{"f1",   "f2",           "mode",         "p",   "q",   "r1",   "r2",  "tol",
                                           "newton_tol", "seeds", "det_threshold", "dedup_radius", "eps", "out", "jobs"};
  for (const auto& item : j.items())
    if (!known.count(item.key())) throw ConfigError("unknown config key '" + item.key() + "'");
  using detail::read_field;
  if (j.contains("f1")) base.f1 = read_field<std::string>(j, "f1");
  if (j.contains("f2")) base.f2 = read_field<std::string>(j, "f2");
  if (j.contains("mode")) base.mode = read_field<std::string>(j, "mode");
  if (j.contains("p")) base.p = read_field<int>(j, "p");
  if (j.contains("q")) base.q = read_field<int>(j, "q");
  if (j.contains("r1")) base.r1 = read_field<double>(j, "r1");
  if (j.contains("r2")) base.r2 = read_field<double>(j, "r2");
  if (j.contains("tol")) base.tol = read_field<double>(j, "tol");
  if (j.contains("newton_tol")) base.newton_tol = read_field<double>(j, "newton_tol");
  if (j.contains("seeds")) base.seeds = read_field<int>(j, "seeds");
  if (j.contains("det_threshold")) base.det_threshold = read_field<double>(j, "det_threshold");
  if (j.contains("dedup_radius")) base.dedup_radius = read_field<double>(j, "dedup_radius");
  if (j.contains("eps")) base.eps = read_field<std::vector<double>>(j, "eps");
  if (j.contains("out")) base.out = read_field<std::string>(j, "out");
  if (j.contains("jobs")) base.jobs = read_field<int>(j, "jobs");
  return base;
}

inline ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return merge_config(std::move(base), j);
}

inline nlohmann::json to_json(const ExperimentConfig& c) {
  return {{"f1", c.f1}, {"f2", c.f2},         {"mode", c.mode},
          {"p", c.p},   {"q", c.q},           {"r1", c.r1},
          {"r2", c.r2}, {"tol", c.tol},       {"newton_tol", c.newton_tol},
          {"seeds", c.seeds}, {"det_threshold", c.det_threshold}, {"dedup_radius", c.dedup_radius},
          {"eps", c.eps}, {"out", c.out},     {"jobs", c.jobs}};
}

/// Comma-separated reals; empty text gives an empty list.
inline std::vector<double> parse_number_list(const std::string& text, const char* what) {
  std::vector<double> values;
  if (text.find_first_not_of(" \t") == std::string::npos) return values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw ConfigError(std::string("invalid number '") + item + "' in " + what);
    }
    if (item.find_first_not_of(" \t", used) != std::string::npos)
      throw ConfigError(std::string("invalid number '") + item + "' in " + what);
    values.push_back(v);
  }
  return values;
}

// ---------------------------------------------------------------------------
// Formatting

/// 17 significant digits, '.' decimal separator regardless of locale.
inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s(buf);
  for (char& ch : s)
    if (ch == ',') ch = '.';
  return s;
}

inline std::string state_csv_header() { return "tau,th1,th1d,th2,th2d\n"; }

inline void append_state_row(std::string& out, double tau, const State4& s) {
  out += format_real(tau) + ',' + format_real(s.th1) + ',' + format_real(s.th1d) + ',' + format_real(s.th2) + ',' +
         format_real(s.th2d) + '\n';
}

inline nlohmann::json to_json(const State4& s) { return nlohmann::json::array({s.th1, s.th1d, s.th2, s.th2d}); }
inline nlohmann::json to_json(const Vec2& v) { return nlohmann::json::array({v(0), v(1)}); }

inline nlohmann::json to_json(const ZeroResult& z) {
  return {{"alpha", to_json(z.alpha_star)},
          {"residual", z.residual},
          {"jacobian", {{z.jacobian(0, 0), z.jacobian(0, 1)}, {z.jacobian(1, 0), z.jacobian(1, 1)}}},
          {"det", z.det},
          {"simple", z.simple},
          {"iterations", z.iterations}};
}

inline nlohmann::json zeros_report(const ExperimentConfig& config, const ZeroSearch& search,
                                   const std::vector<OrbitClass>& classes) {
  nlohmann::json zeros = nlohmann::json::array();
  for (const auto& z : search.zeros) zeros.push_back(to_json(z));
  nlohmann::json cls = nlohmann::json::array();
  for (const auto& c : classes) cls.push_back(c.members);
  nlohmann::json report{{"mode", config.mode},
                        {"p", config.p},
                        {"q", config.q},
                        {"f1", config.f1},
                        {"f2", config.f2},
                        {"annulus", {config.r1, config.r2}},
                        {"zeros", zeros},
                        {"orbit_classes", cls},
                        {"orbit_class_count", classes.size()},
                        {"identically_zero", search.identically_zero}};
  if (search.identically_zero)
    report["message"] = "identically zero averaged function, no isolated zeros";
  return report;
}

inline nlohmann::json to_json(const PeriodicOrbit& o) {
  return {{"epsilon", o.epsilon},
          {"period", o.period},
          {"initial_state", to_json(o.initial_state)},
          {"predicted_initial", to_json(o.predicted_initial)},
          {"residual", o.residual},
          {"distance_to_prediction", o.distance_to_prediction},
          {"iterations", o.iterations},
          {"condition", o.condition}};
}

inline std::string trajectory_csv(const PeriodicOrbit& o) {
  std::string out = state_csv_header();
  for (const auto& [tau, s] : o.samples) append_state_row(out, tau, s);
  return out;
}

}  // namespace pendavg
