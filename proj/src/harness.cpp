#include "geosep/harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "geosep/frames.hpp"
#include "geosep/parallel.hpp"
#include "geosep/separation.hpp"

namespace geosep {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kPi = 3.14159265358979323846;

// ---- text helpers ----

std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string fmt_points(const std::vector<Vec2>& pts) {
  std::string s;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i) s += "; ";
    s += fmt(pts[i].x) + " " + fmt(pts[i].y);
  }
  return s;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

struct LineError {
  int line;
  std::string what;
};

double parse_double(const std::string& v, int line) {
  double x = 0;
  const char* end = v.data() + v.size();
  const auto r = std::from_chars(v.data(), end, x);
  if (r.ec != std::errc() || r.ptr != end || !std::isfinite(x))
    throw LineError{line, "expected a number, got '" + v + "'"};
  return x;
}

long long parse_int(const std::string& v, int line) {
  long long x = 0;
  const char* end = v.data() + v.size();
  const auto r = std::from_chars(v.data(), end, x);
  if (r.ec != std::errc() || r.ptr != end) throw LineError{line, "expected an integer, got '" + v + "'"};
  return x;
}

std::uint64_t parse_u64(const std::string& v, int line) {
  std::uint64_t x = 0;
  const char* end = v.data() + v.size();
  const auto r = std::from_chars(v.data(), end, x);
  if (r.ec != std::errc() || r.ptr != end) throw LineError{line, "expected an unsigned integer, got '" + v + "'"};
  return x;
}

bool parse_bool(const std::string& v, int line) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw LineError{line, "expected true or false, got '" + v + "'"};
}

std::vector<double> parse_numbers(const std::string& v, int line) {
  std::vector<double> out;
  std::istringstream in(v);
  std::string tok;
  while (in >> tok) out.push_back(parse_double(tok, line));
  return out;
}

Vec2 parse_pair(const std::string& v, int line) {
  const std::vector<double> n = parse_numbers(v, line);
  if (n.size() != 2) throw LineError{line, "expected 'x y', got '" + v + "'"};
  return {n[0], n[1]};
}

std::vector<Vec2> parse_points(const std::string& v, int line) {
  std::vector<Vec2> out;
  if (trim(v).empty()) return out;
  std::size_t start = 0;
  while (true) {
    const std::size_t semi = v.find(';', start);
    out.push_back(parse_pair(trim(v.substr(start, semi - start)), line));
    if (semi == std::string::npos) break;
    start = semi + 1;
  }
  return out;
}

CurveKind parse_curve_kind(const std::string& v, int line) {
  for (CurveKind k : {CurveKind::none, CurveKind::circle, CurveKind::spline, CurveKind::line})
    if (v == to_string(k)) return k;
  throw LineError{line, "unknown curve kind '" + v + "'"};
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return !v.empty();
}

double slope_or_nan(const std::vector<std::pair<int, double>>& s) {
  try {
    return decay_slope(s);
  } catch (const std::invalid_argument&) {
    return kNaN;
  }
}

}  // namespace

const char* to_string(CurveKind k) {
  switch (k) {
    case CurveKind::none: return "none";
    case CurveKind::circle: return "circle";
    case CurveKind::spline: return "spline";
    case CurveKind::line: return "line";
  }
  return "?";
}

// ---- configuration ----

std::string serialize(const ExperimentConfig& c) {
  std::ostringstream o;
  const SceneConfig& s = c.scene;
  o << "[scene]\n"
    << "points = " << fmt_points(s.points) << "\n"
    << "point_weight = " << fmt(s.point_weight) << "\n"
    << "curve = " << to_string(s.curve) << "\n"
    << "center = " << fmt(s.center.x) << " " << fmt(s.center.y) << "\n"
    << "radius = " << fmt(s.radius) << "\n"
    << "control = " << fmt_points(s.control) << "\n"
    << "rho = " << fmt(s.rho) << "\n"
    << "curve_weight = " << fmt(s.curve_weight) << "\n\n";
  const AlgorithmConfig& a = c.algorithm;
  o << "[algorithm]\n"
    << "epsilon = " << fmt(a.epsilon) << "\n"
    << "override_epsilon = " << (a.override_epsilon ? "true" : "false") << "\n"
    << "order = " << a.order << "\n"
    << "orient_samples = " << a.orient_samples << "\n"
    << "wf_samples = " << a.wf_samples << "\n"
    << "offsing_probes = " << a.offsing_probes << "\n"
    << "residual_scale = " << a.residual_scale << "\n"
    << "residual_probes = " << a.residual_probes << "\n"
    << "seed = " << a.seed << "\n"
    << "threads = " << a.threads << "\n"
    << "parallel = " << (a.parallel ? "true" : "false") << "\n\n";
  o << "[grids]\n"
    << "j_min = " << c.grids.j_min << "\n"
    << "j_max = " << c.grids.j_max << "\n"
    << "oversample = " << c.grids.oversample << "\n\n";
  o << "[outputs]\n"
    << "directory = " << c.outputs.directory << "\n";
  return o.str();
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig c;
  std::istringstream in(text);
  std::string raw, section;
  int line = 0;
  try {
    while (std::getline(in, raw)) {
      ++line;
      const std::string s = trim(raw);
      if (s.empty() || s[0] == '#') continue;
      if (s.front() == '[') {
        if (s.back() != ']') throw LineError{line, "malformed section header"};
        section = s.substr(1, s.size() - 2);
        if (section != "scene" && section != "algorithm" && section != "grids" && section != "outputs")
          throw LineError{line, "unknown section [" + section + "]"};
        continue;
      }
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw LineError{line, "expected key = value"};
      const std::string k = trim(s.substr(0, eq)), v = trim(s.substr(eq + 1));
      if (section.empty()) throw LineError{line, "key '" + k + "' outside a section"};
      SceneConfig& sc = c.scene;
      AlgorithmConfig& al = c.algorithm;
      if (section == "scene") {
        if (k == "points") sc.points = parse_points(v, line);
        else if (k == "point_weight") sc.point_weight = parse_double(v, line);
        else if (k == "curve") sc.curve = parse_curve_kind(v, line);
        else if (k == "center") sc.center = parse_pair(v, line);
        else if (k == "radius") sc.radius = parse_double(v, line);
        else if (k == "control") sc.control = parse_points(v, line);
        else if (k == "rho") sc.rho = parse_double(v, line);
        else if (k == "curve_weight") sc.curve_weight = parse_double(v, line);
        else throw LineError{line, "unknown key '" + k + "' in [scene]"};
      } else if (section == "algorithm") {
        if (k == "epsilon") al.epsilon = parse_double(v, line);
        else if (k == "override_epsilon") al.override_epsilon = parse_bool(v, line);
        else if (k == "order") al.order = static_cast<int>(parse_int(v, line));
        else if (k == "orient_samples") al.orient_samples = static_cast<int>(parse_int(v, line));
        else if (k == "wf_samples") al.wf_samples = static_cast<int>(parse_int(v, line));
        else if (k == "offsing_probes") al.offsing_probes = static_cast<int>(parse_int(v, line));
        else if (k == "residual_scale") al.residual_scale = static_cast<int>(parse_int(v, line));
        else if (k == "residual_probes") al.residual_probes = static_cast<int>(parse_int(v, line));
        else if (k == "seed") al.seed = parse_u64(v, line);
        else if (k == "threads") al.threads = static_cast<int>(parse_int(v, line));
        else if (k == "parallel") al.parallel = parse_bool(v, line);
        else throw LineError{line, "unknown key '" + k + "' in [algorithm]"};
      } else if (section == "grids") {
        if (k == "j_min") c.grids.j_min = static_cast<int>(parse_int(v, line));
        else if (k == "j_max") c.grids.j_max = static_cast<int>(parse_int(v, line));
        else if (k == "oversample") c.grids.oversample = static_cast<int>(parse_int(v, line));
        else throw LineError{line, "unknown key '" + k + "' in [grids]"};
      } else {
        if (k == "directory") c.outputs.directory = v;
        else throw LineError{line, "unknown key '" + k + "' in [outputs]"};
      }
    }
  } catch (const LineError& e) {
    throw std::invalid_argument("config line " + std::to_string(e.line) + ": " + e.what);
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return parse_config(s.str());
}

void validate(const ExperimentConfig& c) {
  const SceneConfig& s = c.scene;
  const bool has_points = !s.points.empty() && s.point_weight != 0.0;
  const bool has_curve = s.curve != CurveKind::none && s.curve_weight != 0.0;
  if (!has_points && !has_curve) throw std::invalid_argument("degenerate scene: no points and no curve");
  if (!std::isfinite(s.point_weight) || !std::isfinite(s.curve_weight) || s.point_weight < 0 ||
      s.curve_weight < 0)
    throw std::invalid_argument("scene weights must be finite and non-negative");
  for (std::size_t i = 0; i < s.points.size(); ++i) {
    const Vec2 p = s.points[i];
    if (!(p.x >= -1 && p.x < 1 && p.y >= -1 && p.y < 1))
      throw std::invalid_argument("point " + std::to_string(i) + " outside [-1, 1)^2");
    for (std::size_t k = 0; k < i; ++k)
      if (p.x == s.points[k].x && p.y == s.points[k].y)
        throw std::invalid_argument("points must be pairwise distinct");
  }
  switch (s.curve) {
    case CurveKind::circle:
      if (!(s.radius > 0)) throw std::invalid_argument("circle radius must be positive");
      if (std::max(std::abs(s.center.x), std::abs(s.center.y)) + s.radius >= 1.0)
        throw std::invalid_argument("circle leaves the field of view [-1, 1)^2");
      break;
    case CurveKind::spline:
      make_curve(s);
      for (const Vec2& p : s.control)
        if (std::max(std::abs(p.x), std::abs(p.y)) >= 1.0)
          throw std::invalid_argument("spline control point outside the field of view");
      break;
    case CurveKind::line:
      if (!(s.rho > 0 && s.rho < 1)) throw std::invalid_argument("line half-length rho must lie in (0, 1)");
      break;
    case CurveKind::none: break;
  }
  const AlgorithmConfig& a = c.algorithm;
  validate_epsilon(a.epsilon, a.override_epsilon);
  if (a.order < 1 || a.order > 12) throw std::invalid_argument("window order must be in [1, 12]");
  if (a.orient_samples < 4) throw std::invalid_argument("orient_samples must be at least 4");
  if (a.wf_samples < 8) throw std::invalid_argument("wf_samples must be at least 8");
  if (a.offsing_probes < 0 || a.residual_probes < 0) throw std::invalid_argument("probe counts must be non-negative");
  if (a.threads < 1) throw std::invalid_argument("threads must be at least 1");
  const GridConfig& g = c.grids;
  if (g.j_min < kMinScale)
    throw std::invalid_argument("j_min must be at least " + std::to_string(kMinScale));
  if (g.j_max < g.j_min) throw std::invalid_argument("empty scale range");
  if (g.oversample < 2) throw std::invalid_argument("oversample must be at least 2");
  if (FreqGrid::for_scale(g.j_max, g.oversample).size > 4096)
    throw std::invalid_argument("scale ceiling exceeded: grid at j_max is larger than 4096^2");
  if (c.outputs.directory.empty()) throw std::invalid_argument("output directory must be set");
}

PointConfig point_config(const ExperimentConfig& c) { return {c.scene.points, c.scene.point_weight}; }

Curve make_curve(const SceneConfig& s) {
  if (s.curve == CurveKind::circle) return Curve::circle(s.center, s.radius);
  if (s.curve == CurveKind::spline) return Curve::spline(s.control);
  throw std::invalid_argument("scene has no closed curve");
}

ScaleTargets make_targets(const ExperimentConfig& c, int j, int threads) {
  const FreqGrid g = FreqGrid::for_scale(j, c.grids.oversample);
  const double r_max = std::min(g.half_width(), std::ldexp(1.0, j + 1));
  const int order = c.algorithm.order;
  ScaleTargets t{SpectralImage(g), SpectralImage(g)};
  if (!c.scene.points.empty()) t.P = filtered_piece(point_spectrum(point_config(c), g, r_max), j, order);
  switch (c.scene.curve) {
    case CurveKind::circle:
    case CurveKind::spline:
      t.C = filtered_piece(curve_spectrum(make_curve(c.scene), c.scene.curve_weight, g, r_max, 0, threads),
                           j, order);
      break;
    case CurveKind::line:
      t.C = filtered_piece(line_spectrum({c.scene.rho, c.scene.curve_weight}, g, r_max), j, order);
      break;
    case CurveKind::none: break;
  }
  return t;
}

// ---- experiment ----

namespace {

struct ScaleOutput {
  ScaleRecord rec;
  std::vector<double> on_point, on_curve, on_total;  // one per probe
};

struct Scene {
  PointConfig points;
  std::optional<Curve> curve;
  std::optional<LineFragment> line;
  PhaseSet wf_point, wf_curve;
};

Scene build_scene(const ExperimentConfig& c) {
  Scene s;
  s.points = point_config(c);
  s.wf_point = wavefront_set(s.points);
  if (c.scene.curve == CurveKind::circle || c.scene.curve == CurveKind::spline) {
    s.curve = make_curve(c.scene);
    s.wf_curve = wavefront_set(*s.curve, c.algorithm.wf_samples);
  } else if (c.scene.curve == CurveKind::line) {
    s.line = LineFragment{c.scene.rho, c.scene.curve_weight};
    s.wf_curve = wavefront_set(*s.line, c.algorithm.wf_samples);
  }
  return s;
}

double distance_to_supports(const Scene& s, Vec2 x) {
  double d = std::numeric_limits<double>::infinity();
  for (const Vec2& p : s.points.points) d = std::min(d, std::hypot(x.x - p.x, x.y - p.y));
  if (s.curve) d = std::min(d, closest_point(*s.curve, x).distance);
  if (s.line) d = std::min(d, std::hypot(x.x, std::max(0.0, std::abs(x.y) - s.line->rho)));
  return d;
}

// Probe points: WF(P), WF(C), then off-singular points drawn from the seed at
// distance >= 0.15 from every singular support, alternating wavelet and
// curvelet probes.
std::vector<ProbeRecord> build_probes(const ExperimentConfig& c, const Scene& s) {
  std::vector<ProbeRecord> out;
  for (const PhasePoint& p : s.wf_point) out.push_back({"wf_point", p, {}, {}, {}});
  for (const PhasePoint& p : s.wf_curve) out.push_back({"wf_curve", p, {}, {}, {}});
  std::mt19937_64 rng(c.algorithm.seed);
  std::uniform_real_distribution<double> pos(-0.8, 0.8), ang(0.0, kPi);
  for (int i = 0; i < c.algorithm.offsing_probes;) {
    const Vec2 x{pos(rng), pos(rng)};
    const double th = ang(rng);
    if (distance_to_supports(s, x) < 0.15) continue;
    out.push_back({"off_singular", {x, th, i % 2 == 0}, {}, {}, {}});
    ++i;
  }
  return out;
}

std::vector<CurveletIndex> largest_curvelets(const CoefficientTable& t, int n) {
  std::vector<std::pair<double, CurveletIndex>> all;
  for (const auto& b : t.blocks)
    for (std::size_t i = 0; i < b.values.size(); ++i)
      if (b.is_valid(i)) all.push_back({std::abs(b.values[i]), {b.scale, b.wedge, b.k1_of(i), b.k2_of(i)}});
  std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<CurveletIndex> out;
  for (int k = 0; k < n && k < static_cast<int>(all.size()); ++k) out.push_back(all[k].second);
  return out;
}

ScaleOutput run_scale(const ExperimentConfig& c, const Scene& scene,
                      const std::vector<ProbeRecord>& probes, int j, int threads) {
  const AlgorithmConfig& a = c.algorithm;
  const FrameOptions opt{a.order, threads};
  const ScaleTargets tg = make_targets(c, j, threads);
  const OneStepResult out =
      one_step_threshold(tg.P + tg.C, j, ThresholdParams{a.epsilon, a.override_epsilon}, opt);

  ScaleOutput so;
  ScaleRecord& r = so.rec;
  r.j = j;
  r.t1 = out.t1;
  r.t2 = out.t2;
  r.T1 = out.T1.count();
  r.T2 = out.T2.count();
  r.norm_P = norm(tg.P);
  r.norm_C = norm(tg.C);
  r.separation_ratio = separation_error(out, tg.P, tg.C);

  const CoefficientTable wP = wavelet_analysis(tg.P, j, opt);
  const CoefficientTable wC = wavelet_analysis(tg.C, j, opt);
  const CoefficientTable cC = curvelet_analysis(tg.C, j, opt);
  r.delta1 = wP.l1(&out.T1, true);
  r.delta2 = cC.l1(&out.T2, true);
  r.cross_l1 = wC.l1(&out.T1, false);

  const std::vector<WaveletIndex> T1 = out.wavelet.wavelet_indices(out.T1);
  const std::vector<CurveletIndex> T2 = out.curvelet.curvelet_indices(out.T2);
  r.mu_c = cluster_coherence(T2, j, c.grids.oversample, {a.order, threads});
  r.T1_ps = phase_projection(T1, a.orient_samples);
  r.T2_ps = phase_projection(T2);

  r.dps_point = (!r.T1_ps.empty() && !scene.wf_point.empty())
                    ? phase_distance(r.T1_ps, scene.wf_point, threads)
                    : kNaN;
  if (r.T2_ps.empty() || (!scene.curve && !scene.line)) {
    r.dps_curve = kNaN;
  } else if (scene.curve) {
    r.dps_curve = phase_distance(r.T2_ps, *scene.curve, threads);
  } else {
    r.dps_curve = phase_distance(r.T2_ps, wavefront_set(*scene.line, 4096), threads);
  }
  if (scene.curve || scene.line) {
    TubeSpec tube;
    tube.curve = scene.curve;
    tube.rho = c.scene.rho;
    tube.epsilon = a.epsilon;
    tube.eps_prime = a.epsilon / 2;
    tube.a = std::ldexp(1.0, -j);
    r.tube_fraction = tube_membership(r.T2_ps, tube);
  } else {
    r.tube_fraction = kNaN;
  }

  r.wf_point_margin = kNaN;
  for (const PhasePoint& p : scene.wf_point) {
    const double m = wavelet_coefficient_near(out.wavelet, j, p.b) / r.t1;
    r.wf_point_margin = std::isnan(r.wf_point_margin) ? m : std::min(r.wf_point_margin, m);
  }
  r.wf_curve_margin = kNaN;
  for (const PhasePoint& p : scene.wf_curve) {
    const double m = curvelet_coefficient_near(out.curvelet, j, p.b, p.theta) / r.t2;
    r.wf_curve_margin = std::isnan(r.wf_curve_margin) ? m : std::min(r.wf_curve_margin, m);
  }

  if (!scene.wf_point.empty()) {
    const Vec2 x = scene.wf_point.front().b;
    r.wavelet_at_point = std::abs(wavelet_probe(tg.P, j, x, a.order));
    r.curvelet_at_point = std::abs(curvelet_probe(tg.P, j, x, 0.0, a.order));
  } else {
    r.wavelet_at_point = r.curvelet_at_point = kNaN;
  }
  if (!scene.wf_curve.empty()) {
    const PhasePoint& p = scene.wf_curve.front();
    r.wavelet_at_curve = std::abs(wavelet_probe(tg.C, j, p.b, a.order));
    r.curvelet_at_curve = std::abs(curvelet_probe(tg.C, j, p.b, p.theta, a.order));
  } else {
    r.wavelet_at_curve = r.curvelet_at_curve = kNaN;
  }

  r.residual_error = kNaN;
  if (j == a.residual_scale && a.residual_probes > 0) {
    const std::vector<CurveletIndex> pr = largest_curvelets(out.curvelet, a.residual_probes);
    if (!pr.empty()) r.residual_error = residual_identity_check(out, tg.P, tg.C, pr, opt);
  }

  const SpectralImage total = out.W + out.C;
  so.on_point.resize(probes.size());
  so.on_curve.resize(probes.size());
  so.on_total.resize(probes.size());
  parallel_for(probes.size(), threads, [&](std::size_t i) {
    so.on_point[i] = probe_response(out.W, j, probes[i].p, a.order);
    so.on_curve[i] = probe_response(out.C, j, probes[i].p, a.order);
    so.on_total[i] = probe_response(total, j, probes[i].p, a.order);
  });
  return so;
}

std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<std::pair<int, double>> series_of(const std::vector<ScaleRecord>& recs,
                                              double ScaleRecord::*field) {
  std::vector<std::pair<int, double>> s;
  for (const ScaleRecord& r : recs) s.push_back({r.j, r.*field});
  return s;
}

std::vector<double> values_of(const std::vector<ScaleRecord>& recs, double ScaleRecord::*field) {
  std::vector<double> v;
  for (const ScaleRecord& r : recs) v.push_back(r.*field);
  return v;
}

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

std::string num(double v) { return std::isfinite(v) ? fmt(v) : "nan"; }

// Share of probes of a kind whose series classifies as `want`. Degenerate
// series count as misses.
double probe_share(const std::vector<ProbeRecord>& probes, const std::vector<int>& js,
                   const std::string& kind, std::vector<double> ProbeRecord::*part, ProbeClass want,
                   int& count) {
  count = 0;
  int hits = 0;
  for (const ProbeRecord& p : probes) {
    if (p.kind != kind) continue;
    ++count;
    std::vector<std::pair<int, double>> s;
    for (std::size_t k = 0; k < js.size(); ++k) s.push_back({js[k], (p.*part)[k]});
    try {
      if (probe_series(s).cls == want) ++hits;
    } catch (const std::invalid_argument&) {
    }
  }
  return count ? static_cast<double>(hits) / count : kNaN;
}

void summarize(RunReport& R) {
  const auto& recs = R.records;
  std::vector<std::pair<int, double>> total;
  std::vector<double> js_d, ratio;
  for (const ScaleRecord& r : recs) {
    total.push_back({r.j, r.norm_P + r.norm_C});
    js_d.push_back(r.j);
    ratio.push_back(r.separation_ratio);
  }
  std::vector<std::pair<int, double>> delta;
  for (const ScaleRecord& r : recs) delta.push_back({r.j, r.delta1 + r.delta2});
  R.slope_norm = slope_or_nan(total);
  R.slope_delta = slope_or_nan(delta);
  R.slope_cross = slope_or_nan(series_of(recs, &ScaleRecord::cross_l1));
  R.slope_wavelet_point = slope_or_nan(series_of(recs, &ScaleRecord::wavelet_at_point));
  R.slope_curvelet_point = slope_or_nan(series_of(recs, &ScaleRecord::curvelet_at_point));
  R.slope_wavelet_curve = slope_or_nan(series_of(recs, &ScaleRecord::wavelet_at_curve));
  R.slope_curvelet_curve = slope_or_nan(series_of(recs, &ScaleRecord::curvelet_at_curve));
  try {
    R.ratio_spearman = spearman(js_d, ratio);
  } catch (const std::invalid_argument&) {
    R.ratio_spearman = kNaN;
  }

  auto& ck = R.checks;
  ck.clear();
  const double first = ratio.empty() ? kNaN : ratio.front(), last = ratio.empty() ? kNaN : ratio.back();
  ck.push_back({"ratio_monotone", last / first, "strictly decreasing", strictly_decreasing(ratio), ""});
  ck.push_back({"ratio_trend", R.ratio_spearman, "spearman <= -0.8 and last/first <= 0.5",
                R.ratio_spearman <= -0.8 && last <= 0.5 * first,
                "last/first = " + num(last / first)});

  const std::vector<double> mu = values_of(recs, &ScaleRecord::mu_c);
  const bool mu_pos = std::all_of(mu.begin(), mu.end(), [](double v) { return v > 0; });
  ck.push_back({"mu_c_decreasing", mu.empty() ? kNaN : mu.back(), "strictly decreasing, positive",
                mu_pos && strictly_decreasing(mu), mu_pos ? "" : "T2 empty at some scale"});
  ck.push_back({"norm_growth", R.slope_norm, ">= 0.45", R.slope_norm >= 0.45, ""});
  ck.push_back({"delta_growth", R.slope_delta, "<= norm slope - 0.2",
                R.slope_delta <= R.slope_norm - 0.2, ""});
  ck.push_back({"cross_growth", R.slope_cross, "<= norm slope - 0.2",
                R.slope_cross <= R.slope_norm - 0.2,
                std::isnan(R.slope_cross) ? "cross term vanishes at some scale" : ""});

  for (auto [name, field] : {std::pair{"dps_point", &ScaleRecord::dps_point},
                             std::pair{"dps_curve", &ScaleRecord::dps_curve}}) {
    const std::vector<double> d = values_of(recs, field);
    const bool ok = all_finite(d) && strictly_decreasing(d) && d.back() <= 0.5 * d.front();
    ck.push_back({name, d.empty() ? kNaN : d.back() / d.front(),
                  "strictly decreasing, last/first <= 0.5", ok,
                  all_finite(d) ? "" : "undefined at some scale (empty set)"});
  }
  for (auto [name, field] : {std::pair{"wf_point_contained", &ScaleRecord::wf_point_margin},
                             std::pair{"wf_curve_contained", &ScaleRecord::wf_curve_margin}}) {
    double worst = kNaN;
    bool ok = true;
    for (const ScaleRecord& r : recs) {
      if (r.j < 7) continue;
      const double m = r.*field;
      worst = std::isnan(worst) ? m : std::min(worst, m);
      ok = ok && m >= 1.0;
    }
    ck.push_back({name, worst, "coefficient / threshold >= 1 at j >= 7", ok && std::isfinite(worst), ""});
  }

  if (recs.size() >= 4) {
    std::vector<int> js;
    for (const ScaleRecord& r : recs) js.push_back(r.j);
    int n = 0;
    const double pp = probe_share(R.probes, js, "wf_point", &ProbeRecord::on_point_part, ProbeClass::singular, n);
    const double pc = probe_share(R.probes, js, "wf_point", &ProbeRecord::on_curve_part, ProbeClass::smooth, n);
    const double cc = probe_share(R.probes, js, "wf_curve", &ProbeRecord::on_curve_part, ProbeClass::singular, n);
    const double cp = probe_share(R.probes, js, "wf_curve", &ProbeRecord::on_point_part, ProbeClass::smooth, n);
    ck.push_back({"probe_point_singular_on_W", pp, ">= 0.9", pp >= 0.9, ""});
    ck.push_back({"probe_point_smooth_on_C", pc, ">= 0.9", pc >= 0.9, ""});
    ck.push_back({"probe_curve_singular_on_C", cc, ">= 0.9", cc >= 0.9, ""});
    ck.push_back({"probe_curve_smooth_on_W", cp, ">= 0.9", cp >= 0.9, ""});
    double worst = -std::numeric_limits<double>::infinity();
    int off = 0;
    bool ok = true;
    for (const ProbeRecord& p : R.probes) {
      if (p.kind != "off_singular") continue;
      ++off;
      std::vector<std::pair<int, double>> s;
      for (std::size_t k = 0; k < js.size(); ++k) s.push_back({js[k], p.on_total[k]});
      const double sl = slope_or_nan(s);
      if (!(sl <= -1.0)) ok = false;
      worst = std::max(worst, sl);
    }
    ck.push_back({"probe_off_singular", off ? worst : kNaN, "slope <= -1", ok && off > 0, ""});
  }
}

}  // namespace

RunReport run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  const Scene scene = build_scene(cfg);
  RunReport R;
  R.config = cfg;
  R.config_hash = config_hash(cfg);
  R.code_version = code_version();
  R.timestamp = utc_timestamp();
  R.wf_point = scene.wf_point;
  R.wf_curve = scene.wf_curve;
  R.probes = build_probes(cfg, scene);

  const int n = cfg.grids.j_max - cfg.grids.j_min + 1;
  std::vector<ScaleOutput> outs(n);
  if (cfg.algorithm.parallel) {
    parallel_for(n, cfg.algorithm.threads, [&](std::size_t k) {
      outs[k] = run_scale(cfg, scene, R.probes, cfg.grids.j_min + static_cast<int>(k), 1);
    });
  } else {
    for (int k = 0; k < n; ++k)
      outs[k] = run_scale(cfg, scene, R.probes, cfg.grids.j_min + k, cfg.algorithm.threads);
  }
  for (ScaleOutput& o : outs) {
    for (std::size_t i = 0; i < R.probes.size(); ++i) {
      R.probes[i].on_point_part.push_back(o.on_point[i]);
      R.probes[i].on_curve_part.push_back(o.on_curve[i]);
      R.probes[i].on_total.push_back(o.on_total[i]);
    }
    R.records.push_back(std::move(o.rec));
  }
  summarize(R);
  return R;
}

RunReport run_and_write(const ExperimentConfig& cfg) {
  validate(cfg);
  const std::filesystem::path dir(cfg.outputs.directory);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  {
    std::ofstream probe(dir / ".write_test");
    if (ec || !probe) throw std::runtime_error("output directory is not writable: " + dir.string());
  }
  std::filesystem::remove(dir / ".write_test", ec);
  RunReport r = run_experiment(cfg);
  write_report(r, dir);
  emit_plot_data(r, dir);
  return r;
}

// ---- persistence ----

namespace {

nlohmann::ordered_json phase_json(const PhasePoint& p) {
  return {{"b1", p.b.x}, {"b2", p.b.y}, {"theta", p.theta}, {"omni", p.omni}};
}

nlohmann::ordered_json config_json(const ExperimentConfig& c) {
  using J = nlohmann::ordered_json;
  auto pts = [](const std::vector<Vec2>& v) {
    J a = J::array();
    for (const Vec2& p : v) a.push_back({p.x, p.y});
    return a;
  };
  const SceneConfig& s = c.scene;
  const AlgorithmConfig& a = c.algorithm;
  return {{"scene",
           {{"points", pts(s.points)},
            {"point_weight", s.point_weight},
            {"curve", to_string(s.curve)},
            {"center", {s.center.x, s.center.y}},
            {"radius", s.radius},
            {"control", pts(s.control)},
            {"rho", s.rho},
            {"curve_weight", s.curve_weight}}},
          {"algorithm",
           {{"epsilon", a.epsilon},
            {"override_epsilon", a.override_epsilon},
            {"order", a.order},
            {"orient_samples", a.orient_samples},
            {"wf_samples", a.wf_samples},
            {"offsing_probes", a.offsing_probes},
            {"residual_scale", a.residual_scale},
            {"residual_probes", a.residual_probes},
            {"seed", a.seed},
            {"threads", a.threads},
            {"parallel", a.parallel}}},
          {"grids", {{"j_min", c.grids.j_min}, {"j_max", c.grids.j_max}, {"oversample", c.grids.oversample}}},
          {"outputs", {{"directory", c.outputs.directory}}}};
}

void write_file(const std::filesystem::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << s;
  if (!out) throw std::runtime_error("write failed: " + p.string());
}

std::string phase_csv(const PhaseSet& s, int j, const std::string& tag) {
  std::string out = "j,b1,b2,theta,tag\n";
  for (const PhasePoint& p : s)
    out += std::to_string(j) + "," + fmt(p.b.x) + "," + fmt(p.b.y) + "," + (p.omni ? "nan" : fmt(p.theta)) +
           "," + tag + "\n";
  return out;
}

}  // namespace

std::string report_json(const RunReport& r, bool with_timestamp) {
  using J = nlohmann::ordered_json;
  J j;
  j["schema_version"] = RunReport::kSchemaVersion;
  J prov = {{"config_hash", r.config_hash}, {"seed", r.config.algorithm.seed}, {"code_version", r.code_version}};
  if (with_timestamp) prov["timestamp"] = r.timestamp;
  j["provenance"] = prov;
  j["config"] = config_json(r.config);
  J recs = J::array();
  for (const ScaleRecord& s : r.records) {
    recs.push_back({{"j", s.j},
                    {"t1", s.t1},
                    {"t2", s.t2},
                    {"T1", s.T1},
                    {"T2", s.T2},
                    {"norm_P", s.norm_P},
                    {"norm_C", s.norm_C},
                    {"separation_ratio", s.separation_ratio},
                    {"mu_c", s.mu_c},
                    {"delta1", s.delta1},
                    {"delta2", s.delta2},
                    {"cross_l1", s.cross_l1},
                    {"dps_point", s.dps_point},
                    {"dps_curve", s.dps_curve},
                    {"tube_fraction", s.tube_fraction},
                    {"wf_point_margin", s.wf_point_margin},
                    {"wf_curve_margin", s.wf_curve_margin},
                    {"wavelet_at_point", s.wavelet_at_point},
                    {"curvelet_at_point", s.curvelet_at_point},
                    {"wavelet_at_curve", s.wavelet_at_curve},
                    {"curvelet_at_curve", s.curvelet_at_curve},
                    {"residual_error", s.residual_error}});
  }
  j["records"] = recs;
  j["slopes"] = {{"norm", r.slope_norm},
                 {"delta", r.slope_delta},
                 {"cross", r.slope_cross},
                 {"wavelet_at_point", r.slope_wavelet_point},
                 {"wavelet_at_curve", r.slope_wavelet_curve},
                 {"curvelet_at_point", r.slope_curvelet_point},
                 {"curvelet_at_curve", r.slope_curvelet_curve},
                 {"ratio_spearman", r.ratio_spearman}};
  J probes = J::array();
  for (const ProbeRecord& p : r.probes)
    probes.push_back({{"kind", p.kind},
                      {"point", phase_json(p.p)},
                      {"on_point_part", p.on_point_part},
                      {"on_curve_part", p.on_curve_part},
                      {"on_total", p.on_total}});
  j["probes"] = probes;
  J checks = J::array();
  for (const CheckFlag& c : r.checks)
    checks.push_back({{"name", c.name},
                      {"measured", c.measured},
                      {"tolerance", c.tolerance},
                      {"pass", c.pass},
                      {"note", c.note}});
  j["checks"] = checks;
  return j.dump(2) + "\n";
}

std::string report_csv(const RunReport& r) {
  std::string out =
      "schema_version,j,t1,t2,T1,T2,norm_P,norm_C,separation_ratio,mu_c,delta1,delta2,cross_l1,"
      "dps_point,dps_curve,tube_fraction,wf_point_margin,wf_curve_margin,wavelet_at_point,"
      "curvelet_at_point,wavelet_at_curve,curvelet_at_curve,residual_error\n";
  for (const ScaleRecord& s : r.records) {
    out += std::to_string(RunReport::kSchemaVersion) + "," + std::to_string(s.j);
    for (double v : {s.t1, s.t2, double(s.T1), double(s.T2), s.norm_P, s.norm_C, s.separation_ratio, s.mu_c,
                     s.delta1, s.delta2, s.cross_l1, s.dps_point, s.dps_curve, s.tube_fraction,
                     s.wf_point_margin, s.wf_curve_margin, s.wavelet_at_point, s.curvelet_at_point,
                     s.wavelet_at_curve, s.curvelet_at_curve, s.residual_error})
      out += "," + num(v);
    out += "\n";
  }
  return out;
}

void write_report(const RunReport& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file(dir / "report.json", report_json(r));
  write_file(dir / "report.csv", report_csv(r));
}

void emit_plot_data(const RunReport& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file(dir / "wf_point.csv", phase_csv(r.wf_point, 0, "WF_P"));
  write_file(dir / "wf_curve.csv", phase_csv(r.wf_curve, 0, "WF_C"));
  std::string ratio = "j,separation_ratio\n";
  for (const ScaleRecord& s : r.records) {
    write_file(dir / ("t1_j" + std::to_string(s.j) + ".csv"), phase_csv(s.T1_ps, s.j, "T1"));
    write_file(dir / ("t2_j" + std::to_string(s.j) + ".csv"), phase_csv(s.T2_ps, s.j, "T2"));
    ratio += std::to_string(s.j) + "," + num(s.separation_ratio) + "\n";
  }
  write_file(dir / "ratio.csv", ratio);
}

std::string config_hash(const ExperimentConfig& cfg) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : serialize(cfg)) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

const char* code_version() { return "geosep 1.0.0"; }

}  // namespace geosep
