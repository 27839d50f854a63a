#pragma once
// Implementations of the pendavg subcommands. Each returns its output text so
// that the executable only handles argument parsing and exit codes.

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "pendavg/averaging.hpp"
#include "pendavg/constants.hpp"
#include "pendavg/continuation.hpp"
#include "pendavg/experiment.hpp"
#include "pendavg/zeros.hpp"

namespace pendavg::cli {

struct OutputFile {
  std::string name;
  std::string contents;
};

inline void write_files(const std::string& dir, const std::vector<OutputFile>& files) {
  if (dir.empty()) return;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir + "': " + ec.message());
  for (const auto& f : files) {
    const auto path = std::filesystem::path(dir) / f.name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    out << f.contents;
  }
}

/// Mode frequencies and periods, one `name,value` line each.
inline std::string cmd_freqs() {
  std::string out;
  out += "omega1," + format_real(constants::omega1) + '\n';
  out += "omega2," + format_real(constants::omega2) + '\n';
  out += "T1," + format_real(constants::period1) + '\n';
  out += "T2," + format_real(constants::period2) + '\n';
  return out;
}

/// n x n grid over [a1min, a1max] x [a2min, a2max], a1 varying slowest.
inline std::vector<Vec2> grid_points(double a1min, double a1max, double a2min, double a2max, int n) {
  if (n < 1) throw ConfigError("grid size must be at least 1");
  std::vector<Vec2> pts;
  for (int i = 0; i < n; ++i) {
    const double a1 = n == 1 ? a1min : a1min + (a1max - a1min) * i / (n - 1);
    for (int j = 0; j < n; ++j) {
      const double a2 = n == 1 ? a2min : a2min + (a2max - a2min) * j / (n - 1);
      pts.emplace_back(a1, a2);
    }
  }
  return pts;
}

/// CSV `a1,a2,g1,g2` of the canonical averaged function at each point.
inline std::string cmd_average(const ExperimentConfig& config, const std::vector<Vec2>& points) {
  const auto spec = config.spec();
  std::string out = "a1,a2,g1,g2\n";
  for (const auto& a : points) {
    const Vec2 g = mode_averaged(spec, a, config.tol).canonical;
    out += format_real(a(0)) + ',' + format_real(a(1)) + ',' + format_real(g(0)) + ',' + format_real(g(1)) + '\n';
  }
  return out;
}

struct ZerosOutcome {
  ZeroSearch search;
  std::vector<OrbitClass> classes;
  nlohmann::json report;
};

inline ZerosOutcome cmd_zeros(const ExperimentConfig& config) {
  const auto spec = config.spec();
  ZerosOutcome outcome;
  outcome.search = find_zeros(make_averaged_system(spec, config.tol), config.zero_options());
  outcome.classes = antipodal_pairing(outcome.search.zeros, std::max(config.dedup_radius, 1e-6));
  outcome.report = zeros_report(config, outcome.search, outcome.classes);
  return outcome;
}

struct VerifyOutcome {
  nlohmann::json report;
  std::vector<OutputFile> trajectories;
  int verified = 0;
  int failed = 0;
};

/// Zero search followed by shooting from one representative of every orbit
/// class at every epsilon. Shooting failures are recorded and the run continues.
inline VerifyOutcome cmd_verify(const ExperimentConfig& config, const ShootingOptions& shooting = {}) {
  const auto spec = config.spec();
  const ZerosOutcome zeros = cmd_zeros(config);
  VerifyOutcome outcome;
  outcome.report = zeros.report;
  nlohmann::json orbits = nlohmann::json::array();
  for (std::size_t c = 0; c < zeros.classes.size(); ++c) {
    const auto& zero = zeros.search.zeros[zeros.classes[c].members.front()];
    const auto checks = verify_zero(spec, zero.alpha_star, config.eps, shooting);
    for (std::size_t e = 0; e < checks.size(); ++e) {
      const auto& v = checks[e];
      nlohmann::json rec{{"orbit_class", c}, {"alpha", to_json(v.alpha_star)}, {"epsilon", v.epsilon}};
      if (v.orbit) {
        const std::string name = "orbit_" + std::to_string(c) + "_eps_" + std::to_string(e) + ".csv";
        rec["orbit"] = to_json(*v.orbit);
        rec["trajectory_csv"] = config.out.empty() ? nlohmann::json(nullptr) : nlohmann::json(name);
        rec["error"] = nullptr;
        outcome.trajectories.push_back({name, trajectory_csv(*v.orbit)});
        ++outcome.verified;
      } else {
        rec["orbit"] = nullptr;
        rec["trajectory_csv"] = nullptr;
        rec["error"] = v.error;
        ++outcome.failed;
      }
      orbits.push_back(std::move(rec));
    }
  }
  outcome.report["orbits"] = std::move(orbits);
  outcome.report["verified"] = outcome.verified;
  outcome.report["failed"] = outcome.failed;
  return outcome;
}

/// Samples the closed-form unperturbed orbit at tau = i p T / n, i = 0..n-1.
inline std::string cmd_orbit(ModeId mode, const Vec2& alpha, int n_samples, int p = 1) {
  if (n_samples < 1) throw ConfigError("sample count must be at least 1");
  if (p < 1) throw ConfigError("p must be a positive integer");
  const double period = p * mode_period(mode);
  std::string out = state_csv_header();
  for (int i = 0; i < n_samples; ++i) {
    const double tau = period * i / n_samples;
    append_state_row(out, tau, unperturbed_orbit(mode, alpha, tau));
  }
  return out;
}

}  // namespace pendavg::cli
