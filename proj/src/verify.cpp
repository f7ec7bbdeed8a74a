#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "geosep/frames.hpp"
#include "geosep/harness.hpp"
#include "geosep/separation.hpp"
#include "geosep/windows.hpp"

namespace geosep {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Tolerances of the acceptance checks.
constexpr double kCalderonTol = 1e-10;
constexpr double kPartitionTol = 1e-8;
constexpr double kWaveletReconTol = 1e-6;
constexpr double kCurveletReconTol = 1e-3;
constexpr double kWaveletCoeffTol = 1e-6;
constexpr double kCurveletCoeffTol = 1e-5;
constexpr double kBesselTol = 1e-8;
constexpr double kPointSlope = 0.5, kSlopeBand = 0.1;
constexpr double kCurveletCurveSlope = 0.25;
constexpr double kCrossGramSlope = -0.25 + 0.05;
constexpr double kMaterializedTol = 1e-8;
constexpr double kResidualTol = 1e-5;

std::string num(double v) {
  std::ostringstream o;
  o.precision(4);
  o << v;
  return o.str();
}

// Spectrum of a few weighted spikes in [-0.6, 0.6]^2, restricted to scale j.
SpectralImage random_sources(const FreqGrid& g, int j, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> pos(-0.6, 0.6), amp(-1.0, 1.0);
  SpectralImage f(g);
  for (int k = 0; k < 6; ++k) {
    const double x = pos(rng), y = pos(rng), a = amp(rng);
    for (int i2 = 0; i2 < g.size; ++i2)
      for (int i1 = 0; i1 < g.size; ++i1) f.at(i1, i2) += a * std::polar(1.0, -(x * g.xi(i1) + y * g.xi(i2)));
  }
  return filtered_piece(f, j);
}

CheckResult frame_exactness_impl() {
  CheckResult c{1, "frame exactness", true, ""};
  double cal = 0;
  for (int k = 0; k <= 4000; ++k) {
    const double r = std::pow(2.0, 1.0 + 16.0 * k / 4000);
    cal = std::max(cal, std::abs(calderon_sum(r, -2, 20).value - 1.0));
  }
  double part = 0;
  for (int s = 3; s <= 10; ++s)
    for (int k = 0; k < 2000; ++k) {
      const double om = kPi * k / 2000;
      double sum = 0;
      for (int l = 0; l < wedge_count(s); ++l) sum += std::pow(wedge_window(s, l, om), 2);
      part = std::max(part, std::abs(sum - 1.0));
    }
  const int j = 6;
  const FreqGrid g = FreqGrid::for_scale(j);
  double wrec = 0, crec = 0;
  for (int seed = 0; seed < 10; ++seed) {
    std::mt19937_64 rng(1000 + seed);
    const SpectralImage f = random_sources(g, j, rng);
    const double n = norm(f);
    wrec = std::max(wrec, norm(wavelet_synthesis(wavelet_analysis(f, j), nullptr, g) - f) / n);
    crec = std::max(crec, norm(curvelet_synthesis(curvelet_analysis(f, j), nullptr, g) - f) / n);
  }
  c.pass = cal <= kCalderonTol && part <= kPartitionTol && wrec <= kWaveletReconTol && crec <= kCurveletReconTol;
  c.detail = "calderon " + num(cal) + " (<= 1e-10), partition " + num(part) + " (<= 1e-8), wavelet recon " +
             num(wrec) + " (<= 1e-6), curvelet recon " + num(crec) + " (<= 1e-3) at j=6, 10 seeds";
  return c;
}

// Indices drawn uniformly among coefficients with |c| >= 1% of the largest.
template <class Index>
std::vector<Index> significant_sample(const CoefficientTable& t, int scale, int n, std::mt19937_64& rng) {
  double top = 0;
  for (const auto& b : t.blocks)
    if (b.scale == scale)
      for (std::size_t i = 0; i < b.values.size(); ++i)
        if (b.is_valid(i)) top = std::max(top, std::abs(b.values[i]));
  std::vector<Index> pool;
  for (const auto& b : t.blocks) {
    if (b.scale != scale) continue;
    for (std::size_t i = 0; i < b.values.size(); ++i) {
      if (!b.is_valid(i) || std::abs(b.values[i]) < 0.01 * top) continue;
      if constexpr (std::is_same_v<Index, WaveletIndex>)
        pool.push_back({b.scale, b.k1_of(i), b.k2_of(i)});
      else
        pool.push_back({b.scale, b.wedge, b.k1_of(i), b.k2_of(i)});
    }
  }
  std::vector<Index> out;
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  for (int k = 0; k < n && !pool.empty(); ++k) out.push_back(pool[pick(rng)]);
  return out;
}

CheckResult oracle_impl(int j_lo, int j_hi) {
  CheckResult c{2, "oracle equivalence", true, ""};
  double werr = 0, cerr = 0;
  for (int j = j_lo; j <= j_hi; ++j) {
    std::mt19937_64 rng(500 + j);
    const FreqGrid g = FreqGrid::for_scale(j);
    const SpectralImage f = random_sources(g, j, rng);
    const CoefficientTable wt = wavelet_analysis(f, j), ct = curvelet_analysis(f, j);
    for (const WaveletIndex& i : significant_sample<WaveletIndex>(wt, j, 20, rng)) {
      const cd ref = inner(f, wavelet_atom(g, i));
      werr = std::max(werr, std::abs(wt.at(i) - ref) / std::abs(ref));
    }
    for (const CurveletIndex& i : significant_sample<CurveletIndex>(ct, j, 20, rng)) {
      const cd ref = inner(f, curvelet_atom(g, i));
      cerr = std::max(cerr, std::abs(ct.at(i) - ref) / std::abs(ref));
    }
  }
  // Circle against 2 pi R J0(R |xi|) e^{-i c.xi}.
  const FreqGrid g = FreqGrid::for_scale(7);
  const Vec2 ctr{0.15, -0.1};
  const double R = 0.5;
  const SpectralImage C = curve_spectrum(Curve::circle(ctr, R), 1.0, g, g.half_width());
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> node(0, g.size - 1);
  double berr = 0;
  for (int k = 0; k < 100;) {
    const int i1 = node(rng), i2 = node(rng);
    const double x1 = g.xi(i1), x2 = g.xi(i2), r = std::hypot(x1, x2);
    if (r == 0 || r > g.half_width()) continue;
    const cd ref = 2 * kPi * R * std::cyl_bessel_j(0.0, R * r) * std::polar(1.0, -(ctr.x * x1 + ctr.y * x2));
    berr = std::max(berr, std::abs(C.at(i1, i2) - ref) / std::max(std::abs(ref), 1e-6 * 2 * kPi * R));
    ++k;
  }
  c.pass = werr <= kWaveletCoeffTol && cerr <= kCurveletCoeffTol && berr <= kBesselTol;
  c.detail = "wavelet " + num(werr) + " (<= 1e-6), curvelet " + num(cerr) + " (<= 1e-5) over j=" +
             std::to_string(j_lo) + ".." + std::to_string(j_hi) + ", bessel " + num(berr) + " (<= 1e-8)";
  return c;
}

CheckResult decay_battery(const RunReport& r) {
  CheckResult c{3, "decay-law battery", true, ""};
  std::vector<std::pair<int, double>> cg;
  for (const ScaleRecord& s : r.records)
    cg.push_back({s.j, std::abs(cross_gram({s.j, 0, 0, 0}, {s.j, 0, 0}, FreqGrid::for_scale(s.j)))});
  const double cg_slope = decay_slope(cg);
  // Subbands three scales apart share no frequency node: the grid inner
  // product of the atoms is exactly zero.
  double far = 0;
  for (int j = 5; j <= 7; ++j) {
    const FreqGrid g = FreqGrid::for_scale(j + 3);
    far = std::max(far, std::abs(inner(curvelet_atom(g, {j, 1, 0, 0}), wavelet_atom(g, {j + 3, 0, 0}))));
    far = std::max(far, std::abs(inner(curvelet_atom(g, {j + 3, 2, 1, 0}), wavelet_atom(g, {j, 0, 0}))));
  }
  const bool wp = std::abs(r.slope_wavelet_point - kPointSlope) <= kSlopeBand;
  const bool wc = std::abs(r.slope_wavelet_curve) <= kSlopeBand;
  const bool cp = std::abs(r.slope_curvelet_point - kPointSlope) <= kSlopeBand;
  const bool cc = std::abs(r.slope_curvelet_curve - kCurveletCurveSlope) <= kSlopeBand;
  const bool cgok = cg_slope <= kCrossGramSlope;
  c.pass = wp && wc && cp && cc && cgok && far == 0.0;
  auto mark = [](bool ok) { return ok ? "" : " [fail]"; };
  c.detail = "wavelet@point " + num(r.slope_wavelet_point) + " (0.5+-0.1)" + mark(wp) + ", wavelet@curve " +
             num(r.slope_wavelet_curve) + " (|.|<=0.1)" + mark(wc) + ", curvelet@point " +
             num(r.slope_curvelet_point) + " (0.5+-0.1)" + mark(cp) + ", curvelet@curve " +
             num(r.slope_curvelet_curve) + " (0.25+-0.1)" + mark(cc) + ", cross-gram " + num(cg_slope) +
             " (<= -0.2)" + mark(cgok) + ", |ds|>=3 coupling " + num(far) + " (== 0)" + mark(far == 0.0);
  return c;
}

const CheckFlag& flag(const RunReport& r, const std::string& name) {
  for (const CheckFlag& f : r.checks)
    if (f.name == name) return f;
  throw std::runtime_error("report lacks check " + name);
}

CheckResult from_flags(int id, const std::string& title, const RunReport& r,
                       const std::vector<std::string>& names) {
  CheckResult c{id, title, true, ""};
  for (const std::string& n : names) {
    const CheckFlag& f = flag(r, n);
    c.pass = c.pass && f.pass;
    if (!c.detail.empty()) c.detail += ", ";
    c.detail += n + " " + num(f.measured) + " (" + f.tolerance + ")" + (f.pass ? "" : " [fail]");
    if (!f.note.empty()) c.detail += " {" + f.note + "}";
  }
  return c;
}

double gap_threshold(const CoefficientTable& t, double quantile) {
  std::vector<double> a;
  for (const auto& b : t.blocks)
    for (std::size_t i = 0; i < b.values.size(); ++i)
      if (b.is_valid(i)) a.push_back(std::abs(b.values[i]));
  std::sort(a.begin(), a.end());
  const std::size_t k = std::min(a.size() - 2, static_cast<std::size_t>(quantile * a.size()));
  return 0.5 * (a[k] + a[k + 1]);
}

CheckResult abstract_impl() {
  CheckResult c{6, "abstract error estimate", true, ""};
  std::mt19937_64 rng(20240);
  std::uniform_int_distribution<int> dd(2, 16);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> nrm(0.0, 1.0);
  auto vec = [&](int d) {
    Eigen::VectorXd v(d);
    for (int i = 0; i < d; ++i) v[i] = nrm(rng);
    return v;
  };
  int violations = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int d = dd(rng);
    std::uniform_int_distribution<int> nn(d + 1, 64);
    const int n1 = std::max(nn(rng), 2 * (d / 2) + 1), n2 = std::max(nn(rng), 2 * (d / 2) + 1);
    const AbstractFrame p1 = rotated(harmonic_frame(d, n1), rng);
    const AbstractFrame p2 = rotated(harmonic_frame(d, n2, trial), rng);
    const Eigen::VectorXd s1 = vec(d), s2 = vec(d);
    if (!error_bound(p1, p2, s1, s2, u(rng), u(rng)).holds()) ++violations;
  }

  const int j = 4;
  const FreqGrid g = FreqGrid::for_scale(j);
  const AbstractFrame phi1 = materialize(FrameKind::wavelet, j, g);
  const AbstractFrame phi2 = materialize(FrameKind::curvelet, j, g);
  std::uniform_real_distribution<double> pos(-0.5, 0.5), q(0.5, 0.97), rad(0.2, 0.45);
  double worst = 0;
  int mismatched = 0;
  for (int trial = 0; trial < 20; ++trial) {
    SpectralImage full = point_spectrum({{{pos(rng), pos(rng)}}, 1.0}, g, g.half_width());
    full += curve_spectrum(Curve::circle({0.3 * pos(rng), 0.3 * pos(rng)}, rad(rng)), 1.0, g, g.half_width());
    const SpectralImage f = filtered_piece(full, j);
    const double t1 = gap_threshold(wavelet_analysis(f, j), q(rng));
    const double t2 = gap_threshold(one_step_threshold(f, j, t1, 0.0).curvelet, q(rng));
    const OneStepResult r = one_step_threshold(f, j, t1, t2);
    const Eigen::VectorXd S = spatial_vector(f);
    const AbstractResult a = abstract_one_step(phi1, phi2, S, t1, t2);
    if (flatten(r.wavelet, r.T1) != a.T1 || flatten(r.curvelet, r.T2) != a.T2) ++mismatched;
    worst = std::max({worst, (spatial_vector(r.W) - a.S1).norm() / S.norm(),
                      (spatial_vector(r.C) - a.S2).norm() / S.norm()});
  }
  c.pass = violations == 0 && mismatched == 0 && worst <= kMaterializedTol;
  c.detail = "violations " + std::to_string(violations) + "/200 (== 0), materialized set mismatches " +
             std::to_string(mismatched) + "/20, max part difference " + num(worst) + " (<= 1e-8)";
  return c;
}

CheckResult residual_identity(const RunReport& r) {
  CheckResult c{9, "residual identity", false, ""};
  const int js = r.config.algorithm.residual_scale;
  for (const ScaleRecord& s : r.records)
    if (s.j == js) {
      c.pass = s.residual_error <= kResidualTol;
      c.detail = "max probe error " + num(s.residual_error) + " at j=" + std::to_string(js) + " (<= 1e-5)";
      return c;
    }
  c.detail = "residual scale " + std::to_string(js) + " not in the run";
  return c;
}

std::string canonical(RunReport r) {
  r.config.algorithm.threads = 1;
  r.config.algorithm.parallel = false;
  r.config_hash = config_hash(r.config);
  return report_json(r, false);
}

CheckResult determinism(const ExperimentConfig& cfg, int j_max) {
  CheckResult c{10, "determinism", true, ""};
  ExperimentConfig small = cfg;
  small.grids.j_max = std::min(cfg.grids.j_max, std::max(j_max, cfg.grids.j_min));
  ExperimentConfig serial = small, wide = small;
  serial.algorithm.threads = 1;
  serial.algorithm.parallel = false;
  wide.algorithm.threads = 8;
  wide.algorithm.parallel = true;
  const std::string s1 = report_json(run_experiment(serial), false);
  const std::string s2 = report_json(run_experiment(serial), false);
  const RunReport w1 = run_experiment(wide);
  const std::string w1s = report_json(w1, false);
  const std::string w2s = report_json(run_experiment(wide), false);
  const bool same1 = s1 == s2, same8 = w1s == w2s;
  const bool across = canonical(run_experiment(serial)) == canonical(w1);
  c.pass = same1 && same8 && across;
  c.detail = std::string("j=") + std::to_string(small.grids.j_min) + ".." + std::to_string(small.grids.j_max) +
             ": parallelism 1 " + (same1 ? "identical" : "DIFFERENT") + ", parallelism 8 " +
             (same8 ? "identical" : "DIFFERENT") + ", 1 vs 8 " + (across ? "identical" : "DIFFERENT");
  return c;
}

}  // namespace

CheckResult check_frame_exactness() { return frame_exactness_impl(); }
CheckResult check_oracles(int j_lo, int j_hi) { return oracle_impl(j_lo, j_hi); }
CheckResult check_abstract_estimate() { return abstract_impl(); }

std::vector<CheckResult> verify_suite(const ExperimentConfig& cfg, const VerifyOptions& opt,
                                      RunReport* report) {
  validate(cfg);
  std::vector<CheckResult> out;
  out.push_back(check_frame_exactness());
  out.push_back(check_oracles(cfg.grids.j_min, cfg.grids.j_max));
  if (opt.frames_only) return out;

  const RunReport r = run_experiment(cfg);
  out.push_back(decay_battery(r));
  out.push_back(from_flags(4, "separation trend", r, {"ratio_trend"}));
  out.push_back(from_flags(5, "sufficient conditions", r,
                           {"mu_c_decreasing", "norm_growth", "delta_growth", "cross_growth"}));
  out.push_back(check_abstract_estimate());
  out.push_back(from_flags(7, "phase-space localization", r,
                           {"dps_point", "dps_curve", "wf_point_contained", "wf_curve_contained"}));
  out.push_back(from_flags(8, "wavefront probes", r,
                           {"probe_point_singular_on_W", "probe_point_smooth_on_C",
                            "probe_curve_singular_on_C", "probe_curve_smooth_on_W", "probe_off_singular"}));
  out.push_back(residual_identity(r));
  out.push_back(determinism(cfg, opt.determinism_j_max));
  std::sort(out.begin(), out.end(), [](const CheckResult& a, const CheckResult& b) { return a.id < b.id; });
  if (report) *report = r;
  return out;
}

}  // namespace geosep
