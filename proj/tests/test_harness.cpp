#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "geosep/harness.hpp"

using namespace geosep;
namespace fs = std::filesystem;

namespace {

std::size_t count_lines(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  std::string line;
  while (std::getline(in, line)) ++n;
  return n;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("geosep_test_" + name);
  fs::remove_all(p);
  return p;
}

ExperimentConfig small_config(const std::string& out) {
  ExperimentConfig c;
  c.grids.j_min = 5;
  c.grids.j_max = 7;
  c.outputs.directory = out;
  return c;
}

std::string without_timestamp(const RunReport& r) { return report_json(r, false); }

}  // namespace

// ---- configuration ----

TEST(Config, DefaultsDescribeTheStandardScene) {
  const ExperimentConfig c;
  ASSERT_EQ(c.scene.points.size(), 1u);
  EXPECT_EQ(c.scene.points[0].x, -0.4);
  EXPECT_EQ(c.scene.points[0].y, 0.3);
  EXPECT_EQ(c.scene.curve, CurveKind::circle);
  EXPECT_EQ(c.scene.radius, 0.5);
  EXPECT_EQ(c.grids.j_max, 10);
  EXPECT_NO_THROW(validate(c));
}

TEST(Config, RoundTripOfRandomConfigs) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-0.9, 0.9), w(0.0, 10.0);
  std::uniform_int_distribution<int> k(0, 3), n(0, 5), small(1, 40);
  for (int trial = 0; trial < 100; ++trial) {
    ExperimentConfig c;
    c.scene.points.clear();
    for (int i = n(rng); i > 0; --i) c.scene.points.push_back({u(rng), u(rng)});
    c.scene.point_weight = w(rng);
    c.scene.curve = static_cast<CurveKind>(k(rng));
    c.scene.center = {u(rng) / 3, u(rng) / 3};
    c.scene.radius = w(rng) / 30;
    for (int i = n(rng); i > 0; --i) c.scene.control.push_back({u(rng), u(rng)});
    c.scene.rho = w(rng) / 11;
    c.scene.curve_weight = w(rng);
    c.algorithm.epsilon = w(rng) / 1000;
    c.algorithm.override_epsilon = trial % 2;
    c.algorithm.orient_samples = small(rng);
    c.algorithm.wf_samples = small(rng);
    c.algorithm.seed = rng();
    c.algorithm.threads = small(rng);
    c.algorithm.parallel = trial % 3 == 0;
    c.grids.j_min = small(rng);
    c.grids.j_max = small(rng);
    c.outputs.directory = "out/run_" + std::to_string(trial);
    EXPECT_EQ(parse_config(serialize(c)), c) << serialize(c);
  }
}

TEST(Config, ParseErrorsNameTheLine) {
  try {
    parse_config("[scene]\nradius = 0.5\nradius = abc\n");
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_config("[scene]\nwidth = 2\n"), std::invalid_argument);
  EXPECT_THROW(parse_config("radius = 2\n"), std::invalid_argument);
  EXPECT_THROW(parse_config("[extras]\n"), std::invalid_argument);
  EXPECT_THROW(parse_config("[algorithm]\nparallel = maybe\n"), std::invalid_argument);
  EXPECT_THROW(parse_config("[scene]\npoints = 0.1 0.2; 0.3\n"), std::invalid_argument);
  const ExperimentConfig c = parse_config("# comment\n[scene]\npoints = 0.1 0.2; -0.3 0.4\n\n[grids]\nj_max = 8\n");
  ASSERT_EQ(c.scene.points.size(), 2u);
  EXPECT_EQ(c.scene.points[1].x, -0.3);
  EXPECT_EQ(c.grids.j_max, 8);
}

TEST(Config, EmptySceneIsDegenerate) {
  ExperimentConfig c;
  c.scene.points.clear();
  c.scene.curve = CurveKind::none;
  try {
    run_experiment(c);
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("degenerate scene"), std::string::npos);
  }
}

TEST(Config, Validation) {
  ExperimentConfig c;
  c.grids.j_min = 2;
  EXPECT_THROW(validate(c), std::invalid_argument);
  c = {};
  c.grids.j_max = 11;
  EXPECT_THROW(validate(c), std::invalid_argument);
  c = {};
  c.algorithm.epsilon = 0.1;
  EXPECT_THROW(validate(c), std::invalid_argument);
  c.algorithm.override_epsilon = true;
  EXPECT_NO_THROW(validate(c));
  c = {};
  c.scene.points.push_back(c.scene.points.front());
  EXPECT_THROW(validate(c), std::invalid_argument);
  c = {};
  c.scene.radius = 0.95;
  EXPECT_THROW(validate(c), std::invalid_argument);
  c = {};
  c.scene.curve = CurveKind::line;
  c.scene.rho = 1.5;
  EXPECT_THROW(validate(c), std::invalid_argument);
}

// ---- runs ----

TEST(Run, RecordsCoverTheConfiguredScales) {
  const RunReport r = run_experiment(small_config("unused"));
  ASSERT_EQ(r.records.size(), 3u);
  for (std::size_t k = 0; k < r.records.size(); ++k) {
    EXPECT_EQ(r.records[k].j, 5 + static_cast<int>(k));
    EXPECT_EQ(r.records[k].T1_ps.size(), r.records[k].T1 * r.config.algorithm.orient_samples);
    EXPECT_EQ(r.records[k].T2_ps.size(), r.records[k].T2);
  }
  EXPECT_FALSE(std::isnan(r.records[2].residual_error));
  EXPECT_TRUE(std::isnan(r.records[0].residual_error));
}

TEST(Run, DeterministicAcrossRunsAndParallelism) {
  const ExperimentConfig a = small_config("unused");
  const RunReport ra = run_experiment(a);
  EXPECT_EQ(without_timestamp(ra), without_timestamp(run_experiment(a)));
  ExperimentConfig b = a;
  b.algorithm.parallel = true;
  b.algorithm.threads = 8;
  RunReport rb = run_experiment(b);
  EXPECT_EQ(without_timestamp(rb), without_timestamp(run_experiment(b)));
  // Same numbers once the parallelism settings are aligned.
  rb.config = a;
  rb.config_hash = ra.config_hash;
  EXPECT_EQ(without_timestamp(ra), without_timestamp(rb));
}

TEST(Run, TimestampIsTheOnlyVolatileField) {
  const ExperimentConfig a = small_config("unused");
  RunReport r = run_experiment(a);
  const std::string full = report_json(r);
  EXPECT_NE(full.find("\"timestamp\""), std::string::npos);
  EXPECT_EQ(report_json(r, false).find("\"timestamp\""), std::string::npos);
  EXPECT_NE(full.find("\"schema_version\": 1"), std::string::npos);
  EXPECT_EQ(r.config_hash, config_hash(a));
}

TEST(Output, FilesAndRowCounts) {
  const fs::path dir = temp_dir("output");
  const RunReport r = run_and_write(small_config(dir.string()));
  EXPECT_TRUE(fs::exists(dir / "report.json"));
  EXPECT_EQ(count_lines(dir / "report.csv"), 1 + r.records.size());
  EXPECT_EQ(count_lines(dir / "ratio.csv"), 1 + r.records.size());
  EXPECT_EQ(count_lines(dir / "wf_point.csv"), 1 + r.wf_point.size());
  EXPECT_EQ(count_lines(dir / "wf_curve.csv"), 1 + r.wf_curve.size());
  for (const ScaleRecord& s : r.records) {
    const std::string j = std::to_string(s.j);
    EXPECT_EQ(count_lines(dir / ("t1_j" + j + ".csv")), 1 + s.T1 * r.config.algorithm.orient_samples);
    EXPECT_EQ(count_lines(dir / ("t2_j" + j + ".csv")), 1 + s.T2);
  }
  EXPECT_EQ(read_file(dir / "report.json"), report_json(r));
  fs::remove_all(dir);
}

TEST(Output, EmptySetsGiveHeaderOnlyCsv) {
  RunReport r;
  ScaleRecord s;
  s.j = 6;
  r.records.push_back(s);
  const fs::path dir = temp_dir("empty");
  emit_plot_data(r, dir);
  EXPECT_EQ(read_file(dir / "t1_j6.csv"), "j,b1,b2,theta,tag\n");
  EXPECT_EQ(read_file(dir / "t2_j6.csv"), "j,b1,b2,theta,tag\n");
  EXPECT_EQ(count_lines(dir / "ratio.csv"), 2u);
  fs::remove_all(dir);
}

TEST(Output, UnwritableDirectoryIsAnError) {
  const fs::path blocker = temp_dir("blocker");
  std::ofstream(blocker) << "a file, not a directory";
  ExperimentConfig c = small_config((blocker / "sub").string());
  EXPECT_THROW(run_and_write(c), std::runtime_error);
  fs::remove(blocker);
}

TEST(Run, DefaultSceneSeparationRatioDecreases) {
  ExperimentConfig c;
  c.grids.j_max = 9;
  const RunReport r = run_experiment(c);
  ASSERT_EQ(r.records.size(), 5u);
  bool monotone = false;
  for (const CheckFlag& f : r.checks)
    if (f.name == "ratio_monotone") monotone = f.pass;
  EXPECT_TRUE(monotone) << report_csv(r);
}

TEST(Verify, FramesOnlySubsetPasses) {
  ExperimentConfig c;
  c.grids.j_min = 5;
  c.grids.j_max = 7;
  VerifyOptions o;
  o.frames_only = true;
  const std::vector<CheckResult> out = verify_suite(c, o);
  ASSERT_EQ(out.size(), 2u);
  for (const CheckResult& r : out) EXPECT_TRUE(r.pass) << r.name << ": " << r.detail;
}

TEST(Verify, AbstractEstimateHasNoViolations) {
  const CheckResult r = check_abstract_estimate();
  EXPECT_TRUE(r.pass) << r.detail;
}
