#include "geosep/targets.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "geosep/parallel.hpp"
#include "geosep/quadrature.hpp"

namespace geosep {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kTableSub = 64;  // arc-length table subintervals per spline segment

const GaussLegendre& gl8() {
  static const GaussLegendre q(8);
  return q;
}

}  // namespace

double point_constant() {
  return std::sqrt(2.0) * kPi * std::tgamma(0.25) / std::tgamma(0.75);
}

// ---- curves ----

Curve Curve::circle(Vec2 center, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("circle radius must be positive");
  Curve c;
  c.circle_ = true;
  c.center_ = center;
  c.radius_ = radius;
  c.length_ = 2 * kPi * radius;
  c.max_curvature_ = 1.0 / radius;
  return c;
}

Vec2 Curve::spline_eval(double u, int derivative) const {
  const int n = static_cast<int>(control_.size());
  u = std::fmod(u, static_cast<double>(n));
  if (u < 0) u += n;
  int i = std::min(static_cast<int>(u), n - 1);
  const double t = u - i;
  double b[4];
  if (derivative == 0) {
    b[0] = (1 - t) * (1 - t) * (1 - t);
    b[1] = 3 * t * t * t - 6 * t * t + 4;
    b[2] = -3 * t * t * t + 3 * t * t + 3 * t + 1;
    b[3] = t * t * t;
  } else if (derivative == 1) {
    b[0] = -3 * (1 - t) * (1 - t);
    b[1] = 9 * t * t - 12 * t;
    b[2] = -9 * t * t + 6 * t + 3;
    b[3] = 3 * t * t;
  } else {
    b[0] = 6 * (1 - t);
    b[1] = 18 * t - 12;
    b[2] = -18 * t + 6;
    b[3] = 6 * t;
  }
  Vec2 p;
  for (int k = 0; k < 4; ++k) {
    const Vec2& c = control_[(i + k) % n];
    p.x += b[k] * c.x / 6.0;
    p.y += b[k] * c.y / 6.0;
  }
  return p;
}

Curve Curve::spline(const std::vector<Vec2>& control) {
  if (control.size() < 4) throw std::invalid_argument("spline needs at least 4 control points");
  Curve c;
  c.circle_ = false;
  c.control_ = control;
  const int n = static_cast<int>(control.size());
  const auto& q = gl8();
  auto speed = [&](double u) {
    const Vec2 d = c.spline_eval(u, 1);
    return std::hypot(d.x, d.y);
  };
  c.table_u_.push_back(0.0);
  c.table_s_.push_back(0.0);
  double s = 0.0;
  const double h = 1.0 / kTableSub;
  for (int k = 0; k < n * kTableSub; ++k) {
    const double a = k * h;
    double piece = 0.0;
    for (std::size_t m = 0; m < q.x.size(); ++m) piece += q.w[m] * speed(a + 0.5 * h * (q.x[m] + 1));
    s += 0.5 * h * piece;
    c.table_u_.push_back(a + h);
    c.table_s_.push_back(s);
  }
  c.length_ = s;
  double kmax = 0.0, vmin = 1e300;
  for (int k = 0; k < n * kTableSub * 4; ++k) {
    const double u = k / (4.0 * kTableSub);
    const Vec2 d1 = c.spline_eval(u, 1), d2 = c.spline_eval(u, 2);
    const double v = std::hypot(d1.x, d1.y);
    vmin = std::min(vmin, v);
    if (v > 0) kmax = std::max(kmax, std::abs(d1.x * d2.y - d1.y * d2.x) / (v * v * v));
  }
  if (vmin < 1e-9) throw std::invalid_argument("spline has a degenerate (zero-speed) point");
  c.max_curvature_ = kmax;
  return c;
}

double Curve::u_of(double t) const {
  t = std::fmod(t, length_);
  if (t < 0) t += length_;
  auto it = std::upper_bound(table_s_.begin(), table_s_.end(), t);
  std::size_t k = std::max<std::ptrdiff_t>(1, it - table_s_.begin()) - 1;
  k = std::min(k, table_s_.size() - 2);
  const double u0 = table_u_[k], s0 = table_s_[k];
  const double ds = table_s_[k + 1] - s0;
  double u = u0 + (table_u_[k + 1] - u0) * (ds > 0 ? (t - s0) / ds : 0.0);
  const auto& q = gl8();
  for (int it2 = 0; it2 < 6; ++it2) {
    double len = 0.0;
    for (std::size_t m = 0; m < q.x.size(); ++m) {
      const Vec2 d = spline_eval(u0 + 0.5 * (u - u0) * (q.x[m] + 1), 1);
      len += q.w[m] * std::hypot(d.x, d.y);
    }
    len *= 0.5 * (u - u0);
    const Vec2 d = spline_eval(u, 1);
    const double step = (s0 + len - t) / std::hypot(d.x, d.y);
    u -= step;
    if (std::abs(step) < 1e-15) break;
  }
  return u;
}

Vec2 Curve::point(double t) const {
  if (circle_) {
    const double a = t / radius_;
    return {center_.x + radius_ * std::cos(a), center_.y + radius_ * std::sin(a)};
  }
  return spline_eval(u_of(t), 0);
}

Vec2 Curve::tangent(double t) const {
  if (circle_) {
    const double a = t / radius_;
    return {-std::sin(a), std::cos(a)};
  }
  const Vec2 d = spline_eval(u_of(t), 1);
  const double v = std::hypot(d.x, d.y);
  return {d.x / v, d.y / v};
}

double Curve::normal_angle(double t) const {
  const Vec2 tg = tangent(t);
  double a = std::atan2(tg.y, tg.x) + kPi / 2;
  a = std::fmod(a, kPi);
  if (a < 0) a += kPi;
  return a;
}

double Curve::speed_error(int probes) const {
  const double h = 1e-4 * std::min(1.0, length_);
  double worst = 0.0;
  for (int k = 0; k < probes; ++k) {
    const double t = length_ * (k + 0.5) / probes;
    const Vec2 a = point(t - h), b = point(t + h);
    worst = std::max(worst, std::abs(std::hypot(b.x - a.x, b.y - a.y) / (2 * h) - 1.0));
  }
  return worst;
}

int required_curve_nodes(const Curve& c, double r_max) {
  return std::max(16, static_cast<int>(std::ceil(kCurveNodeFactor * r_max * c.length() / (2 * kPi))));
}

SpectralImage curve_spectrum(const Curve& c, double weight, const FreqGrid& g, double r_max,
                             int nodes, int threads) {
  const int need = required_curve_nodes(c, r_max);
  if (nodes <= 0) nodes = need + need / 2;
  if (nodes < need)
    throw std::invalid_argument("curve quadrature under-resolved: " + std::to_string(nodes) +
                                " nodes given, at least " + std::to_string(need) + " required");
  std::vector<Vec2> tau(nodes);
  for (int m = 0; m < nodes; ++m) tau[m] = c.point(c.length() * m / nodes);
  const double wq = weight * c.length() / nodes;
  const double dxi = g.spacing();
  SpectralImage out(g);
  constexpr int kRefresh = 64;  // recompute the phase exactly every few steps
  parallel_for(static_cast<std::size_t>(g.size), threads, [&](std::size_t row) {
    const int i2 = static_cast<int>(row);
    const double x2 = g.xi(i2);
    if (std::abs(x2) > r_max) return;
    const double half = std::sqrt(std::max(0.0, r_max * r_max - x2 * x2));
    const int lo = std::max(0, static_cast<int>(std::ceil(half / -dxi)) + g.size / 2);
    const int hi = std::min(g.size - 1, static_cast<int>(std::floor(half / dxi)) + g.size / 2);
    if (lo > hi) return;
    const int len = hi - lo + 1;
    std::vector<cd> acc(len, 0.0);
    const double x1lo = g.xi(lo);
    for (int m = 0; m < nodes; ++m) {
      const cd step = std::polar(1.0, -tau[m].x * dxi);
      for (int start = 0; start < len; start += kRefresh) {
        cd z = std::polar(1.0, -(tau[m].x * (x1lo + start * dxi) + tau[m].y * x2));
        const int stop = std::min(len, start + kRefresh);
        for (int k = start; k < stop; ++k) {
          acc[k] += z;
          z *= step;
        }
      }
    }
    for (int k = 0; k < len; ++k) {
      const int i1 = lo + k;
      if (std::hypot(g.xi(i1), x2) <= r_max) out.at(i1, i2) = acc[k] * wq;
    }
  });
  return out;
}

cd curve_spectrum_at(const Curve& c, double weight, int nodes, double xi1, double xi2) {
  if (nodes < 1) throw std::invalid_argument("curve_spectrum_at: nodes must be positive");
  cd acc = 0.0;
  for (int m = 0; m < nodes; ++m) {
    const Vec2 p = c.point(c.length() * m / nodes);
    acc += std::polar(1.0, -(p.x * xi1 + p.y * xi2));
  }
  return acc * (weight * c.length() / nodes);
}

SpectralImage point_spectrum(const PointConfig& p, const FreqGrid& g, double r_max) {
  const double c = p.weight * point_constant();
  SpectralImage out(g);
  for (int i2 = 0; i2 < g.size; ++i2) {
    const double x2 = g.xi(i2);
    for (int i1 = 0; i1 < g.size; ++i1) {
      const double x1 = g.xi(i1);
      const double r = std::hypot(x1, x2);
      if (r == 0.0 || r > r_max) continue;
      cd s = 0.0;
      for (const Vec2& x : p.points) s += std::polar(1.0, -(x.x * x1 + x.y * x2));
      out.at(i1, i2) = s * (c / std::sqrt(r));
    }
  }
  return out;
}

// ---- line fragment ----

namespace {
double smooth_transition(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / x), b = std::exp(-1.0 / (1.0 - x));
  return a / (a + b);
}
}  // namespace

double line_profile(double u) {
  const double a = std::abs(u);
  if (a >= 1.0) return 0.0;
  const double c = std::cos(kPi / 2 * smooth_transition(a));
  return c * c;
}

double line_profile_hat(double omega) {
  const auto& q = gl8();
  const int panels = 32 + static_cast<int>(std::ceil(std::abs(omega) / 4.0));
  const double h = 1.0 / panels;
  double s = 0.0;
  for (int p = 0; p < panels; ++p)
    for (std::size_t m = 0; m < q.x.size(); ++m) {
      const double u = h * (p + 0.5 * (q.x[m] + 1));
      s += q.w[m] * line_profile(u) * std::cos(omega * u);
    }
  return 2.0 * 0.5 * h * s;
}

SpectralImage line_spectrum(const LineFragment& w, const FreqGrid& g, double r_max) {
  if (!(w.rho > 0.0 && w.rho < 1.0)) throw std::invalid_argument("line half-length must be in (0, 1)");
  SpectralImage out(g);
  for (int i2 = 0; i2 < g.size; ++i2) {
    const double x2 = g.xi(i2);
    if (std::abs(x2) > r_max) continue;
    const double v = w.weight * w.rho * line_profile_hat(w.rho * x2);
    for (int i1 = 0; i1 < g.size; ++i1)
      if (std::hypot(g.xi(i1), x2) <= r_max) out.at(i1, i2) = v;
  }
  return out;
}

}  // namespace geosep
