#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "geosep/diagnostics.hpp"
#include "geosep/grid.hpp"
#include "geosep/targets.hpp"

namespace geosep {

// ---- configuration -------------------------------------------------------

enum class CurveKind { none, circle, spline, line };
const char* to_string(CurveKind k);

struct SceneConfig {
  std::vector<Vec2> points{{-0.4, 0.3}};
  double point_weight = 1.0;
  CurveKind curve = CurveKind::circle;
  Vec2 center{0.15, -0.1};          // circle
  double radius = 0.5;              // circle
  std::vector<Vec2> control;        // spline control polygon
  double rho = 0.3;                 // line fragment half-length
  double curve_weight = 1.0;        // weight of the curve or line component
  bool operator==(const SceneConfig&) const = default;
};

struct AlgorithmConfig {
  double epsilon = 0.01;
  bool override_epsilon = false;
  int order = 3;
  int orient_samples = 8;    // orientations per wavelet in the phase projection
  int wf_samples = 32;       // samples of the curve wavefront set
  int offsing_probes = 8;    // probes away from the singular supports
  int residual_scale = 7;    // scale of the residual identity check
  int residual_probes = 16;
  std::uint64_t seed = 1;
  int threads = 1;
  bool parallel = false;     // run scales concurrently
  bool operator==(const AlgorithmConfig&) const = default;
};

struct GridConfig {
  int j_min = 5;
  int j_max = 10;
  int oversample = 2;
  bool operator==(const GridConfig&) const = default;
};

struct OutputConfig {
  std::string directory = "out";
  bool operator==(const OutputConfig&) const = default;
};

struct ExperimentConfig {
  SceneConfig scene;
  AlgorithmConfig algorithm;
  GridConfig grids;
  OutputConfig outputs;
  bool operator==(const ExperimentConfig&) const = default;
};

constexpr int kMinScale = 3;  // smallest scale with a full curvelet wedge set

// Plain-text key = value format with [scene], [algorithm], [grids] and
// [outputs] sections. Points are "x y" pairs separated by ';'. Unknown keys
// and malformed values are errors naming the line.
std::string serialize(const ExperimentConfig& cfg);
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

// Throws "degenerate scene" when there are no points and no curve, and on an
// invalid scale range, epsilon or sampling parameter.
void validate(const ExperimentConfig& cfg);

// Scene objects of a config.
PointConfig point_config(const ExperimentConfig& cfg);
Curve make_curve(const SceneConfig& s);  // circle or spline only

// Filtered targets at scale j.
struct ScaleTargets {
  SpectralImage P;
  SpectralImage C;
};
ScaleTargets make_targets(const ExperimentConfig& cfg, int j, int threads = 1);

// ---- report --------------------------------------------------------------

struct ProbeRecord {
  std::string kind;  // wf_point, wf_curve, off_singular
  PhasePoint p;
  std::vector<double> on_point_part;  // |<W_j, atom>| per scale
  std::vector<double> on_curve_part;  // |<C_j recovered, atom>| per scale
  std::vector<double> on_total;       // |<W_j + C_j, atom>| per scale
};

struct ScaleRecord {
  int j = 0;
  double t1 = 0.0, t2 = 0.0;
  std::size_t T1 = 0, T2 = 0;
  double norm_P = 0.0, norm_C = 0.0;
  double separation_ratio = 0.0;
  double mu_c = 0.0;
  double delta1 = 0.0, delta2 = 0.0;
  double cross_l1 = 0.0;          // sum over T1 of |<C_j, psi>|
  double dps_point = 0.0;         // NaN when T1 or WF(P) is empty
  double dps_curve = 0.0;         // NaN when T2 or WF(C) is empty
  double tube_fraction = 0.0;     // share of T2 in the tube around WF(C)
  double wf_point_margin = 0.0;   // min coefficient / t1 over WF(P); NaN without points
  double wf_curve_margin = 0.0;   // min coefficient / t2 over WF(C); NaN without a curve
  // Decay battery: |<P_j, psi>| and |<P_j, gamma>| at the first point,
  // |<C_j, psi>| and |<C_j, gamma>| (normal-aligned) at the first WF(C) sample.
  double wavelet_at_point = 0.0, curvelet_at_point = 0.0;
  double wavelet_at_curve = 0.0, curvelet_at_curve = 0.0;
  double residual_error = 0.0;    // NaN except at the residual scale
  PhaseSet T1_ps, T2_ps;
};

struct CheckFlag {
  std::string name;
  double measured = 0.0;
  std::string tolerance;
  bool pass = false;
  std::string note;
};

struct RunReport {
  static constexpr int kSchemaVersion = 1;
  ExperimentConfig config;
  std::string config_hash;
  std::string code_version;
  std::string timestamp;
  std::vector<ScaleRecord> records;
  std::vector<ProbeRecord> probes;
  PhaseSet wf_point, wf_curve;
  // Fitted log2 slopes against j (NaN when undefined).
  double slope_norm = 0.0, slope_delta = 0.0, slope_cross = 0.0;
  double slope_wavelet_point = 0.0, slope_wavelet_curve = 0.0;
  double slope_curvelet_point = 0.0, slope_curvelet_curve = 0.0;
  double ratio_spearman = 0.0;
  std::vector<CheckFlag> checks;
};

// Builds targets, runs the one-step separation at every scale and collects
// the diagnostics. Deterministic given the config. Throws before any scale
// runs on an invalid config.
RunReport run_experiment(const ExperimentConfig& cfg);
// run_experiment followed by write_report and emit_plot_data into the
// configured directory (created if needed; unwritable is an error).
RunReport run_and_write(const ExperimentConfig& cfg);

std::string report_json(const RunReport& r, bool with_timestamp = true);
std::string report_csv(const RunReport& r);
void write_report(const RunReport& r, const std::filesystem::path& dir);
// Point clouds wf_point.csv, wf_curve.csv, t1_j<j>.csv, t2_j<j>.csv with
// columns j,b1,b2,theta,tag, and ratio.csv with one row per scale.
void emit_plot_data(const RunReport& r, const std::filesystem::path& dir);

std::string config_hash(const ExperimentConfig& cfg);  // FNV-1a of serialize(cfg)
const char* code_version();

// ---- verification --------------------------------------------------------

struct CheckResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;  // measured values and tolerances
};

struct VerifyOptions {
  bool frames_only = false;
  int determinism_j_max = 7;  // scales j_min..this for the determinism runs
};

// Individual checks, also run by verify_suite.
CheckResult check_frame_exactness();
CheckResult check_oracles(int j_lo, int j_hi);
CheckResult check_abstract_estimate();

// Runs the acceptance checks; the report of the main run is returned
// through `report` when given.
std::vector<CheckResult> verify_suite(const ExperimentConfig& cfg, const VerifyOptions& opt = {},
                                      RunReport* report = nullptr);

}  // namespace geosep
