#include "geosep/diagnostics.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

#include "geosep/fft.hpp"
#include "geosep/parallel.hpp"
#include "geosep/windows.hpp"

namespace geosep {

namespace {

constexpr double kPi = std::numbers::pi;

void require_nonempty(const PhaseSet& s, const char* which) {
  if (s.empty()) throw std::invalid_argument(std::string("phase distance: ") + which + " set is empty");
}

// Minimizes f over one period of a closed curve: dense seeds, then Brent
// refinement in the brackets of the three best seeds.
template <class F>
std::pair<double, double> minimize_periodic(F f, double length, int seeds) {
  if (seeds < 8) throw std::invalid_argument("closest-point search needs at least 8 seeds");
  const double h = length / seeds;
  std::vector<double> v(seeds);
  for (int i = 0; i < seeds; ++i) v[i] = f(i * h);
  std::vector<int> order(seeds);
  std::iota(order.begin(), order.end(), 0);
  std::partial_sort(order.begin(), order.begin() + 3, order.end(),
                    [&](int a, int b) { return v[a] < v[b] || (v[a] == v[b] && a < b); });
  double best_t = order[0] * h, best_v = v[order[0]];
  for (int r = 0; r < 3; ++r) {
    const double c = order[r] * h;
    const auto [t, val] = boost::math::tools::brent_find_minima(
        [&](double t) { return f(t); }, c - h, c + h, std::numeric_limits<double>::digits / 2);
    if (val < best_v) {
      best_v = val;
      best_t = t;
    }
  }
  best_t = std::fmod(best_t, length);
  if (best_t < 0) best_t += length;
  return {best_t, best_v};
}

}  // namespace

// ---- phase space ----

double reduce_angle(double theta) {
  double t = std::fmod(theta, kPi);
  if (t < 0) t += kPi;
  if (t >= kPi) t = 0.0;
  return t;
}

double angle_distance(double a, double b) {
  const double d = std::abs(reduce_angle(a) - reduce_angle(b));
  return std::min(d, kPi - d);
}

double phase_metric(const PhasePoint& p, const PhasePoint& q) {
  const double dx = p.b.x - q.b.x, dy = p.b.y - q.b.y;
  const double da = (p.omni || q.omni) ? 0.0 : angle_distance(p.theta, q.theta);
  return std::sqrt(dx * dx + dy * dy + da * da);
}

double phase_distance(const PhaseSet& A, const PhaseSet& B, int threads) {
  require_nonempty(A, "first");
  require_nonempty(B, "second");
  std::vector<double> best(A.size());
  parallel_for(A.size(), threads, [&](std::size_t i) {
    double m = std::numeric_limits<double>::infinity();
    for (const PhasePoint& q : B) m = std::min(m, phase_metric(A[i], q));
    best[i] = m;
  });
  return *std::max_element(best.begin(), best.end());
}

double phase_distance(const PhaseSet& A, const Curve& curve, int threads) {
  require_nonempty(A, "first");
  std::vector<double> best(A.size());
  parallel_for(A.size(), threads, [&](std::size_t i) {
    const PhasePoint& a = A[i];
    auto f = [&](double t) {
      const Vec2 p = curve.point(t);
      PhasePoint q{p, curve.normal_angle(t), false};
      return phase_metric(a, q);
    };
    best[i] = minimize_periodic(f, curve.length(), 1024).second;
  });
  return *std::max_element(best.begin(), best.end());
}

PhaseSet phase_projection(const std::vector<WaveletIndex>& T1, int orient_samples) {
  if (orient_samples < 4) throw std::invalid_argument("orient_samples must be at least 4");
  PhaseSet out;
  out.reserve(T1.size() * orient_samples);
  for (const WaveletIndex& i : T1) {
    const Vec2 b = wavelet_position(i);
    for (int m = 0; m < orient_samples; ++m) out.push_back({b, kPi * m / orient_samples, false});
  }
  return out;
}

PhaseSet phase_projection(const std::vector<CurveletIndex>& T2) {
  PhaseSet out;
  out.reserve(T2.size());
  for (const CurveletIndex& i : T2) out.push_back({curvelet_position(i), wedge_angle(i.j, i.l), false});
  return out;
}

PhaseSet wavefront_set(const PointConfig& p) {
  PhaseSet out;
  for (const Vec2& x : p.points) out.push_back({x, 0.0, true});
  return out;
}

PhaseSet wavefront_set(const PointConfig& p, int samples) {
  if (samples < 1) throw std::invalid_argument("need at least one sample");
  PhaseSet out;
  for (const Vec2& x : p.points)
    for (int m = 0; m < samples; ++m) out.push_back({x, kPi * m / samples, false});
  return out;
}

PhaseSet wavefront_set(const Curve& c, int samples) {
  if (samples < 1) throw std::invalid_argument("need at least one sample");
  PhaseSet out;
  for (int i = 0; i < samples; ++i) {
    const double t = c.length() * i / samples;
    out.push_back({c.point(t), c.normal_angle(t), false});
  }
  return out;
}

PhaseSet wavefront_set(const LineFragment& w, int samples) {
  if (samples < 2) throw std::invalid_argument("need at least two samples");
  // The singular support of w2(x2 / rho) delta(x1) is {0} x [-rho, rho].
  PhaseSet out;
  for (int i = 0; i < samples; ++i) out.push_back({{0.0, -w.rho + 2 * w.rho * i / (samples - 1)}, 0.0, false});
  return out;
}

ClosestPoint closest_point(const Curve& c, Vec2 x, int seeds) {
  auto f = [&](double t) {
    const Vec2 p = c.point(t);
    return std::hypot(p.x - x.x, p.y - x.y);
  };
  const auto [t, d] = minimize_periodic(f, c.length(), seeds);
  return {t, d};
}

double TubeSpec::width() const { return c * std::pow(a, 1.0 - eps_prime); }
double TubeSpec::angular_cap() const { return std::sqrt(a); }

void validate(const TubeSpec& t) {
  if (!(t.c > 0)) throw std::invalid_argument("tube constant c must be positive");
  if (!(t.eps_prime > 0 && t.eps_prime < t.epsilon))
    throw std::invalid_argument("tube eps' must lie in (0, epsilon)");
  if (!(t.a > 0 && t.a <= 1)) throw std::invalid_argument("tube scale a must lie in (0, 1]");
  if (!t.curve && !(t.rho > 0)) throw std::invalid_argument("tube rho must be positive");
}

double tube_membership(const PhaseSet& S, const TubeSpec& tube) {
  validate(tube);
  if (S.empty()) return 0.0;
  const double w = tube.width(), cap = tube.angular_cap();
  std::size_t in = 0;
  for (const PhasePoint& p : S) {
    double dist, base;
    if (tube.curve) {
      const ClosestPoint cp = closest_point(*tube.curve, p.b);
      dist = cp.distance;
      base = tube.curve->normal_angle(cp.t);
    } else {
      dist = std::hypot(p.b.x, std::max(0.0, std::abs(p.b.y) - 2 * tube.rho));
      base = 0.0;
    }
    if (dist <= w && (p.omni || angle_distance(p.theta, base) <= cap)) ++in;
  }
  return static_cast<double>(in) / S.size();
}

// ---- statistics ----

double decay_slope(const std::vector<std::pair<int, double>>& series) {
  if (series.size() < 3) throw std::invalid_argument("decay slope needs at least 3 scales");
  double sx = 0, sy = 0;
  for (const auto& [j, v] : series) {
    if (!(v > 0)) throw std::invalid_argument("decay slope needs positive values (scale " + std::to_string(j) + ")");
    sx += j;
    sy += std::log2(v);
  }
  const double n = static_cast<double>(series.size());
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (const auto& [j, v] : series) {
    sxx += (j - mx) * (j - mx);
    sxy += (j - mx) * (std::log2(v) - my);
  }
  if (sxx == 0) throw std::invalid_argument("decay slope needs distinct scales");
  return sxy / sxx;
}

namespace {

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t k = i;
    while (k + 1 < idx.size() && v[idx[k + 1]] == v[idx[i]]) ++k;
    const double avg = 0.5 * (i + k) + 1.0;
    for (std::size_t m = i; m <= k; ++m) r[idx[m]] = avg;
    i = k + 1;
  }
  return r;
}

}  // namespace

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("spearman needs two equal series of length >= 2");
  const std::vector<double> rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0 || syy == 0) throw std::invalid_argument("spearman undefined for a constant series");
  return sxy / std::sqrt(sxx * syy);
}

// ---- coefficient diagnostics ----

double relative_sparsity(const CoefficientTable& coeffs, const IndexMask& T) {
  return coeffs.l1(&T, true);
}

namespace {

// Real, even kernel K(u) = <gamma, psi> as a function of the rotated offset
// u = R_{-theta}(b_psi - b_gamma) between a curvelet of scale s and a wavelet
// of scale sw, sampled on a centred n1 x n2 table.
struct CouplingKernel {
  int n1 = 0, n2 = 0;
  double h1 = 0, h2 = 0;
  double x1 = 0, x2 = 0;  // usable half extents
  std::vector<double> k;

  double at(int m1, int m2) const { return k[static_cast<std::size_t>(m2) * n1 + m1]; }

  // Catmull-Rom interpolation; 0 outside the usable box.
  double operator()(double u1, double u2) const {
    if (std::abs(u1) > x1 || std::abs(u2) > x2) return 0.0;
    const double p1 = u1 / h1 + n1 / 2, p2 = u2 / h2 + n2 / 2;
    const int i1 = static_cast<int>(std::floor(p1)), i2 = static_cast<int>(std::floor(p2));
    const double f1 = p1 - i1, f2 = p2 - i2;
    double w1[4], w2[4];
    catmull(f1, w1);
    catmull(f2, w2);
    double acc = 0.0;
    for (int b = 0; b < 4; ++b) {
      double row = 0.0;
      for (int a = 0; a < 4; ++a) row += w1[a] * at(i1 - 1 + a, i2 - 1 + b);
      acc += w2[b] * row;
    }
    return acc;
  }

  static void catmull(double t, double w[4]) {
    const double t2 = t * t, t3 = t2 * t;
    w[0] = 0.5 * (-t3 + 2 * t2 - t);
    w[1] = 0.5 * (3 * t3 - 5 * t2 + 2);
    w[2] = 0.5 * (-3 * t3 + 4 * t2 + t);
    w[3] = 0.5 * (t3 - t2);
  }
};

CouplingKernel coupling_kernel(int s, int sw, double reach1, double reach2, int order) {
  constexpr int kOversample = 8;  // table spacing relative to the Nyquist spacing
  const double rmax = std::ldexp(1.0, std::min(s, sw) + 1);
  const double dth = wedge_spacing(s);
  const double ext1 = rmax;
  const double ext2 = dth >= kPi / 2 ? rmax : rmax * std::sin(dth);
  CouplingKernel K;
  const int n = 4 * static_cast<int>(std::ceil(reach1 * kOversample / 2.0));  // multiples of 4
  const int nb = 4 * static_cast<int>(std::ceil(reach2 * kOversample / 2.0));
  K.n1 = n;
  K.n2 = nb;
  K.h1 = kPi / (kOversample * ext1);
  K.h2 = kPi / (kOversample * ext2);
  K.x1 = K.h1 * (n / 2 - 3);
  K.x2 = K.h2 * (nb / 2 - 3);
  const double d1 = 2 * kPi / (n * K.h1), d2 = 2 * kPi / (nb * K.h2);
  FftBuffer buf(static_cast<std::size_t>(n) * nb);
  buf.zero();
  const CurveletIndex eta{s, 0, 0, 0};
  const WaveletIndex lam{sw, 0, 0};
  for (int m2 = 0; m2 < nb; ++m2)
    for (int m1 = 0; m1 < n; ++m1) {
      const double xi1 = d1 * (m1 - n / 2), xi2 = d2 * (m2 - nb / 2);
      const cd v = curvelet_atom_value(eta, xi1, xi2, order) * std::conj(wavelet_atom_value(lam, xi1, xi2, order));
      buf[static_cast<std::size_t>(m2) * n + m1] = ((m1 + m2) % 2 ? -v : v);
    }
  fft2d(buf, nb, n, +1);
  const double scale = d1 * d2 / (4 * kPi * kPi);
  K.k.resize(static_cast<std::size_t>(n) * nb);
  for (int m2 = 0; m2 < nb; ++m2)
    for (int m1 = 0; m1 < n; ++m1) {
      const std::size_t i = static_cast<std::size_t>(m2) * n + m1;
      K.k[i] = ((m1 + m2) % 2 ? -1.0 : 1.0) * buf[i].real() * scale;
    }
  return K;
}

int wrap_index(int k, int n) {
  int m = (k + n / 2) % n;
  if (m < 0) m += n;
  return m;
}

}  // namespace

double cluster_coherence(const std::vector<CurveletIndex>& T2, int j, int oversample,
                         const CoherenceOptions& opt) {
  if (T2.empty()) return 0.0;
  if (!(opt.radial_reach > 0) || !(opt.transverse_reach > 0))
    throw std::invalid_argument("coherence reach must be positive");
  std::map<std::pair<int, int>, CouplingKernel> kernels;
  for (const CurveletIndex& e : T2)
    for (int sw = j - 1; sw <= j + 1; ++sw)
      if (std::abs(sw - e.j) <= 1 && !kernels.count({e.j, sw}))
        kernels.emplace(std::pair{e.j, sw}, coupling_kernel(e.j, sw, opt.radial_reach, opt.transverse_reach, opt.order));

  double best = 0.0;
  for (int sw = j - 1; sw <= j + 1; ++sw) {
    const int n = oversample << sw;  // wavelet lattice positions per axis on the torus
    const double step = std::ldexp(1.0, -sw);
    std::vector<double> acc(static_cast<std::size_t>(n) * n, 0.0);
    constexpr int kBands = 64;
    const int band = (n + kBands - 1) / kBands;
    // Each band owns a set of wrapped rows and adds contributions in T2 order,
    // so the sums do not depend on the thread count.
    parallel_for(kBands, opt.threads, [&](std::size_t bi) {
      const int r0 = static_cast<int>(bi) * band, r1 = std::min(n, r0 + band);
      if (r0 >= r1) return;
      for (const CurveletIndex& e : T2) {
        if (std::abs(sw - e.j) > 1) continue;
        const CouplingKernel& K = kernels.at({e.j, sw});
        const Vec2 b = curvelet_position(e);
        const double th = wedge_angle(e.j, e.l), c = std::cos(th), sn = std::sin(th);
        const double ymax = std::abs(sn) * K.x1 + std::abs(c) * K.x2;
        const int k2lo = static_cast<int>(std::ceil((b.y - ymax) / step));
        const int k2hi = static_cast<int>(std::floor((b.y + ymax) / step));
        for (int k2 = k2lo; k2 <= k2hi; ++k2) {
          const int row = wrap_index(k2, n);
          if (row < r0 || row >= r1) continue;
          const double dy = k2 * step - b.y;
          // |c dx + sn dy| <= x1 and |-sn dx + c dy| <= x2 as an interval in dx.
          double lo = -1e300, hi = 1e300;
          auto clip = [&](double a, double off, double lim) {
            if (std::abs(a) < 1e-15) {
              if (std::abs(off) > lim) hi = -1e300;
              return;
            }
            double p = (-lim - off) / a, q = (lim - off) / a;
            if (p > q) std::swap(p, q);
            lo = std::max(lo, p);
            hi = std::min(hi, q);
          };
          clip(c, sn * dy, K.x1);
          clip(-sn, c * dy, K.x2);
          if (lo > hi) continue;
          const int k1lo = static_cast<int>(std::ceil((b.x + lo) / step));
          const int k1hi = static_cast<int>(std::floor((b.x + hi) / step));
          double* out = acc.data() + static_cast<std::size_t>(row) * n;
          for (int k1 = k1lo; k1 <= k1hi; ++k1) {
            const double dx = k1 * step - b.x;
            out[wrap_index(k1, n)] += std::abs(K(c * dx + sn * dy, -sn * dx + c * dy));
          }
        }
      }
    });
    best = std::max(best, *std::max_element(acc.begin(), acc.end()));
  }
  return best;
}

double wavelet_coefficient_near(const CoefficientTable& t, int s, Vec2 b) {
  const CoefficientBlock* blk = t.find(s, -1);
  if (!blk) throw std::invalid_argument("no wavelet block at scale " + std::to_string(s));
  const int k1 = static_cast<int>(std::floor(std::ldexp(b.x, s)));
  const int k2 = static_cast<int>(std::floor(std::ldexp(b.y, s)));
  double best = 0.0;
  for (int a = 0; a < 2; ++a)
    for (int c = 0; c < 2; ++c)
      if (blk->contains(k1 + a, k2 + c)) best = std::max(best, std::abs(blk->values[blk->index(k1 + a, k2 + c)]));
  return best;
}

double curvelet_coefficient_near(const CoefficientTable& t, int s, Vec2 b, double theta) {
  const int nw = wedge_count(s);
  const int l0 = static_cast<int>(std::floor(reduce_angle(theta) / wedge_spacing(s))) % nw;
  double best = 0.0;
  for (int l : {l0, (l0 + 1) % nw}) {
    const CoefficientBlock* blk = t.find(s, l);
    if (!blk) throw std::invalid_argument("no curvelet block at scale " + std::to_string(s));
    const double th = wedge_angle(s, l);
    const double u1 = std::cos(th) * b.x + std::sin(th) * b.y;
    const double u2 = -std::sin(th) * b.x + std::cos(th) * b.y;
    const int k1 = static_cast<int>(std::floor(u1 / radial_step(s)));
    const int k2 = static_cast<int>(std::floor(u2 / transverse_step(s)));
    for (int a = 0; a < 2; ++a)
      for (int c = 0; c < 2; ++c)
        if (blk->contains(k1 + a, k2 + c))
          best = std::max(best, std::abs(blk->values[blk->index(k1 + a, k2 + c)]));
  }
  return best;
}

// ---- probes ----

const char* to_string(ProbeClass c) {
  switch (c) {
    case ProbeClass::singular: return "singular";
    case ProbeClass::smooth: return "smooth";
    case ProbeClass::inconclusive: return "inconclusive";
  }
  return "?";
}

ProbeClass classify_slope(double slope, double dead_zone) {
  if (slope > dead_zone) return ProbeClass::singular;
  if (slope < -dead_zone) return ProbeClass::smooth;
  return ProbeClass::inconclusive;
}

double probe_response(const SpectralImage& piece, int j, const PhasePoint& p, int order) {
  return p.omni ? std::abs(wavelet_probe(piece, j, p.b, order))
                : std::abs(curvelet_probe(piece, j, p.b, p.theta, order));
}

ProbeResult probe_series(std::vector<std::pair<int, double>> values) {
  if (values.size() < 4) throw std::invalid_argument("wavefront probe needs at least 4 scales");
  for (const auto& [j, v] : values)
    if (!(v > 0))
      throw std::invalid_argument("wavefront probe: degenerate series (zero response at scale " +
                                  std::to_string(j) + ")");
  ProbeResult r;
  r.values = std::move(values);
  r.slope = decay_slope(r.values);
  r.cls = classify_slope(r.slope);
  return r;
}

ProbeResult wavefront_probe(const std::vector<ScalePiece>& pieces, const PhasePoint& p, int order) {
  if (pieces.size() < 4) throw std::invalid_argument("wavefront probe needs at least 4 scales");
  std::vector<std::pair<int, double>> values;
  for (const ScalePiece& sp : pieces) {
    if (!sp.piece) throw std::invalid_argument("wavefront probe: missing piece");
    values.push_back({sp.j, probe_response(*sp.piece, sp.j, p, order)});
  }
  return probe_series(std::move(values));
}

}  // namespace geosep
