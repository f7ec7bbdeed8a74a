#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <string>

#include <CLI11.hpp>

#include "geosep/diagnostics.hpp"
#include "geosep/frames.hpp"
#include "geosep/harness.hpp"
#include "geosep/separation.hpp"

using namespace geosep;

namespace {

struct Flags {
  std::string config;
  std::string scales;
  double epsilon = -1;
  int oversample = 0;
  long long seed = -1;
  std::string out;
  bool parallel = false;
  bool override_epsilon = false;
  int threads = 0;
};

void add_flags(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config, "config file (key = value with sections)");
  app->add_option("--scales", f.scales, "scale range J_MIN..J_MAX");
  app->add_option("--epsilon", f.epsilon, "thresholding parameter");
  app->add_option("--oversample", f.oversample, "spatial period of the torus model");
  app->add_option("--seed", f.seed, "random seed");
  app->add_option("--out", f.out, "output directory");
  app->add_option("--threads", f.threads, "worker threads");
  app->add_flag("--parallel", f.parallel, "run scales concurrently");
  app->add_flag("--override-epsilon", f.override_epsilon, "allow epsilon in [1/64, 1/4)");
}

ExperimentConfig build_config(const Flags& f) {
  ExperimentConfig c = f.config.empty() ? ExperimentConfig{} : load_config(f.config);
  if (!f.scales.empty()) {
    const auto dots = f.scales.find("..");
    if (dots == std::string::npos) throw std::invalid_argument("--scales expects J_MIN..J_MAX");
    c.grids.j_min = std::stoi(f.scales.substr(0, dots));
    c.grids.j_max = std::stoi(f.scales.substr(dots + 2));
  }
  if (f.epsilon >= 0) c.algorithm.epsilon = f.epsilon;
  if (f.oversample > 0) c.grids.oversample = f.oversample;
  if (f.seed >= 0) c.algorithm.seed = static_cast<std::uint64_t>(f.seed);
  if (!f.out.empty()) c.outputs.directory = f.out;
  if (f.threads > 0) c.algorithm.threads = f.threads;
  if (f.parallel) c.algorithm.parallel = true;
  if (f.override_epsilon) c.algorithm.override_epsilon = true;
  validate(c);
  return c;
}

int print_checks(const std::vector<CheckResult>& checks) {
  int failed = 0;
  for (const CheckResult& c : checks) {
    std::printf("%s criterion %d (%s): %s\n", c.pass ? "PASS" : "FAIL", c.id, c.name.c_str(), c.detail.c_str());
    if (!c.pass) ++failed;
  }
  std::printf("%zu checks, %d failed\n", checks.size(), failed);
  return failed ? 1 : 0;
}

void print_records(const RunReport& r) {
  std::printf("%3s %8s %8s %6s %6s %10s %10s %10s %10s %10s\n", "j", "t1", "t2", "|T1|", "|T2|", "ratio", "mu_c",
              "delta", "dps_P", "dps_C");
  for (const ScaleRecord& s : r.records)
    std::printf("%3d %8.4f %8.4f %6zu %6zu %10.4g %10.4g %10.4g %10.4g %10.4g\n", s.j, s.t1, s.t2, s.T1, s.T2,
                s.separation_ratio, s.mu_c, s.delta1 + s.delta2, s.dps_point, s.dps_curve);
}

int cmd_simulate(const ExperimentConfig& c) {
  std::filesystem::create_directories(c.outputs.directory);
  const std::filesystem::path path = std::filesystem::path(c.outputs.directory) / "targets.csv";
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "j,norm_P,norm_C\n";
  std::printf("%3s %12s %12s\n", "j", "||P_j||", "||C_j||");
  for (int j = c.grids.j_min; j <= c.grids.j_max; ++j) {
    const ScaleTargets t = make_targets(c, j, c.algorithm.threads);
    std::printf("%3d %12.6g %12.6g\n", j, norm(t.P), norm(t.C));
    out << j << "," << norm(t.P) << "," << norm(t.C) << "\n";
  }
  return 0;
}

int cmd_coherence(const ExperimentConfig& c) {
  std::printf("%3s %8s %12s\n", "j", "|T2|", "mu_c");
  const FrameOptions opt{c.algorithm.order, c.algorithm.threads};
  for (int j = c.grids.j_min; j <= c.grids.j_max; ++j) {
    const ScaleTargets t = make_targets(c, j, c.algorithm.threads);
    const OneStepResult r =
        one_step_threshold(t.P + t.C, j, ThresholdParams{c.algorithm.epsilon, c.algorithm.override_epsilon}, opt);
    const auto T2 = r.curvelet.curvelet_indices(r.T2);
    const double mu = cluster_coherence(T2, j, c.grids.oversample, {c.algorithm.order, c.algorithm.threads});
    std::printf("%3d %8zu %12.6g\n", j, T2.size(), mu);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Geometric separation of points and curves by one-step thresholding"};
  app.require_subcommand(1);
  Flags f;
  auto* frames = app.add_subcommand("frames-check", "frame exactness and oracle checks");
  auto* simulate = app.add_subcommand("simulate", "build the filtered targets and print their norms");
  auto* separate = app.add_subcommand("separate", "run the separation and write the report");
  auto* coherence = app.add_subcommand("coherence", "cluster coherence of the curvelet clusters");
  auto* phasespace = app.add_subcommand("phasespace", "phase-space distances and point clouds");
  auto* abstract = app.add_subcommand("abstract-verify", "randomized check of the abstract error estimate");
  auto* verify = app.add_subcommand("verify", "run every acceptance check");
  auto* plot = app.add_subcommand("plot-data", "write the point clouds and the ratio table");
  for (CLI::App* s : {frames, simulate, separate, coherence, phasespace, abstract, verify, plot}) add_flags(s, f);
  CLI11_PARSE(app, argc, argv);

  try {
    const ExperimentConfig cfg = build_config(f);
    if (frames->parsed()) {
      VerifyOptions o;
      o.frames_only = true;
      return print_checks(verify_suite(cfg, o));
    }
    if (simulate->parsed()) return cmd_simulate(cfg);
    if (coherence->parsed()) return cmd_coherence(cfg);
    if (abstract->parsed()) return print_checks({check_abstract_estimate()});
    if (verify->parsed()) {
      RunReport r;
      const int status = print_checks(verify_suite(cfg, {}, &r));
      write_report(r, cfg.outputs.directory);
      emit_plot_data(r, cfg.outputs.directory);
      return status;
    }
    const RunReport r = run_and_write(cfg);
    if (separate->parsed()) {
      print_records(r);
      for (const CheckFlag& c : r.checks)
        std::printf("%-28s %s  measured %.4g (%s)\n", c.name.c_str(), c.pass ? "pass" : "FAIL", c.measured,
                    c.tolerance.c_str());
    } else if (phasespace->parsed()) {
      std::printf("%3s %8s %8s %12s %12s %10s\n", "j", "|T1ps|", "|T2ps|", "d(T1,WF_P)", "d(T2,WF_C)", "tube");
      for (const ScaleRecord& s : r.records)
        std::printf("%3d %8zu %8zu %12.5g %12.5g %10.4g\n", s.j, s.T1_ps.size(), s.T2_ps.size(), s.dps_point,
                    s.dps_curve, s.tube_fraction);
    }
    std::printf("report written to %s\n", cfg.outputs.directory.c_str());
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
