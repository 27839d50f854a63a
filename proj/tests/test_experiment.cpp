#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "pendavg/commands.hpp"
#include "pendavg/experiment.hpp"

using namespace pendavg;

TEST(Presets, PinnedValues) {
  const auto c1 = preset("corollary1");
  EXPECT_EQ(c1.f1, "0");
  EXPECT_EQ(c1.f2, "(1 - th1^2) * sin(w1 * tau)");
  EXPECT_EQ(c1.mode, "mode1");
  EXPECT_EQ(c1.r1, 0.1);
  EXPECT_EQ(c1.r2, 10.0);
  const auto c2 = preset("corollary2");
  EXPECT_EQ(c2.f1, "th2d + th1^2 * cos(w2 * tau)");
  EXPECT_EQ(c2.mode, "mode2");
  EXPECT_EQ(c2.r2, 40.0);
  EXPECT_EQ(c2.eps, kDefaultEpsilonLadder);
  EXPECT_THROW(preset("corollary3"), ConfigError);
}

TEST(Config, MergeOverridesOnlyPresentKeys) {
  const auto c = merge_config(preset_corollary1(), nlohmann::json{{"r2", 5.0}, {"eps", {1e-3}}, {"jobs", 2}});
  EXPECT_EQ(c.r2, 5.0);
  EXPECT_EQ(c.eps, std::vector<double>{1e-3});
  EXPECT_EQ(c.jobs, 2);
  EXPECT_EQ(c.f2, preset_corollary1().f2);
}

TEST(Config, RejectsUnknownKeysAndWrongTypes) {
  EXPECT_THROW(merge_config({}, nlohmann::json{{"radius", 1}}), ConfigError);
  EXPECT_THROW(merge_config({}, nlohmann::json{{"p", "one"}}), ConfigError);
  EXPECT_THROW(merge_config({}, nlohmann::json::array()), ConfigError);
}

TEST(Config, ValidationErrors) {
  auto c = preset_corollary1();
  c.mode = "mode3";
  EXPECT_THROW(c.validate(), ConfigError);
  c = preset_corollary1();
  c.p = 2;
  c.q = 4;
  EXPECT_THROW(c.validate(), ConfigError);
  c = preset_corollary1();
  c.r1 = 20;
  EXPECT_THROW(c.validate(), ConfigError);
  c = preset_corollary1();
  c.eps = {1e-3, 0.0};
  EXPECT_THROW(c.validate(), ConfigError);
  c = preset_corollary1();
  c.f2 = "sin(tau";
  EXPECT_THROW(c.spec(), ConfigError);
}

TEST(Config, FileRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "pendavg_config_test";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "c.json").string();
  const auto original = preset_corollary2();
  std::ofstream(path) << to_json(original).dump(2);
  const auto loaded = load_config(path);
  EXPECT_EQ(to_json(loaded), to_json(original));
  std::ofstream(path) << "{ not json";
  EXPECT_THROW(load_config(path), ConfigError);
  EXPECT_THROW(load_config((dir / "missing.json").string()), ConfigError);
  std::filesystem::remove_all(dir);
}

TEST(NumberList, Parsing) {
  EXPECT_EQ(parse_number_list("1e-2, 5e-3,1", "x"), (std::vector<double>{1e-2, 5e-3, 1}));
  EXPECT_TRUE(parse_number_list("", "x").empty());
  EXPECT_THROW(parse_number_list("1,,2", "x"), ConfigError);
  EXPECT_THROW(parse_number_list("1,abc", "x"), ConfigError);
  EXPECT_THROW(parse_number_list("1.5x", "x"), ConfigError);
}

TEST(Format, SeventeenDigitsRoundTrip) {
  EXPECT_EQ(format_real(0.1), "0.10000000000000001");
  EXPECT_EQ(format_real(-2.0), "-2");
  for (double v : {1.0 / 3.0, 8.2093772238162471, -27.31370849898476, 1e-300}) EXPECT_EQ(std::stod(format_real(v)), v);
}

TEST(Commands, AverageCsvIsDeterministic) {
  const auto c = preset_corollary1();
  const auto pts = cli::grid_points(-1, 1, -1, 1, 3);
  ASSERT_EQ(pts.size(), 9u);
  const auto a = cli::cmd_average(c, pts);
  EXPECT_EQ(a, cli::cmd_average(c, pts));
  EXPECT_EQ(a.substr(0, 12), "a1,a2,g1,g2\n");
  EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 10);
}

TEST(Commands, ZerosReport) {
  const auto out = cli::cmd_zeros(preset_corollary1());
  EXPECT_EQ(out.report["zeros"].size(), 4u);
  EXPECT_EQ(out.report["orbit_class_count"], 2);
  EXPECT_FALSE(out.report["identically_zero"].get<bool>());
  EXPECT_EQ(out.report.dump(), cli::cmd_zeros(preset_corollary1()).report.dump());

  auto degenerate = preset_corollary1();
  degenerate.f2 = "0";
  const auto d = cli::cmd_zeros(degenerate);
  EXPECT_TRUE(d.report["identically_zero"].get<bool>());
  EXPECT_EQ(d.report["message"], "identically zero averaged function, no isolated zeros");
}

TEST(Commands, VerifyWritesOneTrajectoryPerClassAndEpsilon) {
  auto c = preset_corollary2();
  c.eps = {1e-3};
  const auto out = cli::cmd_verify(c);
  EXPECT_EQ(out.verified, 1);
  EXPECT_EQ(out.failed, 0);
  ASSERT_EQ(out.trajectories.size(), 1u);
  EXPECT_EQ(out.trajectories[0].name, "orbit_0_eps_0.csv");
  EXPECT_EQ(out.trajectories[0].contents.rfind("tau,th1,th1d,th2,th2d\n", 0), 0u);
}

TEST(Commands, OrbitCsv) {
  const auto csv = cli::cmd_orbit(ModeId::Mode1, {1, 0}, 4);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
  EXPECT_THROW(cli::cmd_orbit(ModeId::Mode1, {1, 0}, 0), ConfigError);
}
