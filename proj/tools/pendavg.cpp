// pendavg: averaged bifurcation functions of the forced double pendulum,
// their simple zeros, and shooting verification on the full system.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "pendavg/commands.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Flags {
  std::optional<std::string> preset;
  std::optional<std::string> config;
  std::optional<std::string> mode;
  std::optional<int> p, q, jobs, seeds;
  std::optional<std::string> f1, f2, eps, out;
  std::optional<double> r1, r2, tol, newton_tol;
  std::optional<std::string> alpha;
  std::optional<std::string> grid;
  int samples = 257;
};

void add_experiment_flags(CLI::App* cmd, Flags& f, bool with_preset) {
  if (with_preset) cmd->add_option("preset", f.preset, "Preset experiment: corollary1 | corollary2");
  cmd->add_option("--config", f.config, "JSON experiment file; flags override its values");
  cmd->add_option("--mode", f.mode, "Resonant mode: mode1 | mode2");
  cmd->add_option("--p", f.p, "Resonance numerator p");
  cmd->add_option("--q", f.q, "Resonance denominator q");
  cmd->add_option("--f1", f.f1, "Perturbation F1(tau, th1, th1d, th2, th2d)");
  cmd->add_option("--f2", f.f2, "Perturbation F2(tau, th1, th1d, th2, th2d)");
  cmd->add_option("--r1", f.r1, "Inner radius of the zero-search annulus");
  cmd->add_option("--r2", f.r2, "Outer radius of the zero-search annulus");
  cmd->add_option("--tol", f.tol, "Quadrature tolerance");
  cmd->add_option("--newton-tol", f.newton_tol, "Residual tolerance of the zero finder");
  cmd->add_option("--seeds", f.seeds, "Polar seed grid size (seeds x seeds)");
  cmd->add_option("--eps", f.eps, "Comma-separated epsilon list for shooting (empty: none)");
  cmd->add_option("--out", f.out, "Output directory");
  cmd->add_option("--jobs", f.jobs, "Worker threads for the zero search");
}

pendavg::ExperimentConfig resolve(const Flags& f) {
  pendavg::ExperimentConfig c = f.preset ? pendavg::preset(*f.preset) : pendavg::ExperimentConfig{};
  if (f.config) c = pendavg::load_config(*f.config, c);
  if (f.mode) c.mode = *f.mode;
  if (f.p) c.p = *f.p;
  if (f.q) c.q = *f.q;
  if (f.f1) c.f1 = *f.f1;
  if (f.f2) c.f2 = *f.f2;
  if (f.r1) c.r1 = *f.r1;
  if (f.r2) c.r2 = *f.r2;
  if (f.tol) c.tol = *f.tol;
  if (f.newton_tol) c.newton_tol = *f.newton_tol;
  if (f.seeds) c.seeds = *f.seeds;
  if (f.eps) c.eps = pendavg::parse_number_list(*f.eps, "--eps");
  if (f.out) c.out = *f.out;
  if (f.jobs) c.jobs = *f.jobs;
  c.validate();
  return c;
}

pendavg::Vec2 parse_alpha(const std::optional<std::string>& text) {
  if (!text) throw pendavg::ConfigError("--alpha A1,A2 is required");
  const auto v = pendavg::parse_number_list(*text, "--alpha");
  if (v.size() != 2) throw pendavg::ConfigError("--alpha expects exactly two comma-separated numbers");
  return {v[0], v[1]};
}

void emit(const std::string& text) { std::cout << text << std::flush; }

void setup_logging() {
  auto logger = spdlog::stderr_logger_st("pendavg");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* level = std::getenv("PENDAVG_LOG")) spdlog::set_level(spdlog::level::from_str(level));
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Averaging-theory periodic orbits of the forced double pendulum"};
  app.require_subcommand(1);
  Flags f;

  auto* freqs = app.add_subcommand("freqs", "Print normal-mode frequencies and periods");
  auto* average = app.add_subcommand("average", "Evaluate the averaged function at a point or on a grid (CSV)");
  add_experiment_flags(average, f, true);
  average->add_option("--alpha", f.alpha, "Single point A1,A2");
  average->add_option("--grid", f.grid, "Grid A1MIN,A1MAX,A2MIN,A2MAX,N");
  auto* zeros = app.add_subcommand("zeros", "Find simple zeros of the averaged function (JSON)");
  add_experiment_flags(zeros, f, true);
  auto* verify = app.add_subcommand("verify", "Find zeros and verify them by shooting (JSON + CSV)");
  add_experiment_flags(verify, f, true);
  auto* orbit = app.add_subcommand("orbit", "Sample the closed-form unperturbed orbit (CSV)");
  orbit->add_option("--mode", f.mode, "mode1 | mode2")->required();
  orbit->add_option("--alpha", f.alpha, "Orbit amplitude A1,A2")->required();
  orbit->add_option("--samples", f.samples, "Number of samples over one period");
  orbit->add_option("--p", f.p, "Resonance numerator p (samples cover p periods)");
  auto* cor1 = app.add_subcommand("corollary1", "Full pipeline on the first worked example");
  auto* cor2 = app.add_subcommand("corollary2", "Full pipeline on the second worked example");
  for (auto* cmd : {cor1, cor2}) add_experiment_flags(cmd, f, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (freqs->parsed()) {
      emit(pendavg::cli::cmd_freqs());
    } else if (average->parsed()) {
      const auto config = resolve(f);
      std::vector<pendavg::Vec2> points;
      if (f.grid) {
        const auto g = pendavg::parse_number_list(*f.grid, "--grid");
        if (g.size() != 5 || g[4] < 1 || g[4] != static_cast<int>(g[4]))
          throw pendavg::ConfigError("--grid expects A1MIN,A1MAX,A2MIN,A2MAX,N with integer N >= 1");
        points = pendavg::cli::grid_points(g[0], g[1], g[2], g[3], static_cast<int>(g[4]));
      } else {
        points.push_back(parse_alpha(f.alpha));
      }
      const auto csv = pendavg::cli::cmd_average(config, points);
      pendavg::cli::write_files(config.out, {{"average.csv", csv}});
      emit(csv);
    } else if (zeros->parsed()) {
      const auto config = resolve(f);
      const auto outcome = pendavg::cli::cmd_zeros(config);
      const std::string text = outcome.report.dump(2) + "\n";
      pendavg::cli::write_files(config.out, {{"zeros.json", text}});
      spdlog::info("{} zeros, {} orbit classes", outcome.search.zeros.size(), outcome.classes.size());
      emit(text);
    } else if (verify->parsed() || cor1->parsed() || cor2->parsed()) {
      if (cor1->parsed()) f.preset = "corollary1";
      if (cor2->parsed()) f.preset = "corollary2";
      const auto config = resolve(f);
      const auto outcome = pendavg::cli::cmd_verify(config);
      const std::string text = outcome.report.dump(2) + "\n";
      auto files = outcome.trajectories;
      files.push_back({"verify.json", text});
      pendavg::cli::write_files(config.out, files);
      emit(text);
      if (outcome.failed > 0) {
        spdlog::error("{} shooting case(s) failed", outcome.failed);
        return kExitNumerical;
      }
    } else if (orbit->parsed()) {
      emit(pendavg::cli::cmd_orbit(pendavg::parse_mode(*f.mode), parse_alpha(f.alpha), f.samples, f.p.value_or(1)));
    }
  } catch (const pendavg::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const pendavg::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
  return 0;
}
