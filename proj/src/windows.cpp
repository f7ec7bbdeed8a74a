#include "geosep/windows.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace geosep {

namespace {

double binomial(int n, int k) {
  double b = 1.0;
  for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
  return b;
}

void check_order(int order) {
  if (order < 1 || order > 12)
    throw std::invalid_argument("window order must be in [1, 12], got " + std::to_string(order));
}

}  // namespace

double smoothstep(double x, int order) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  // x^{p+1} sum_k C(p+k, k) (1-x)^k
  double s = 0.0;
  double pw = 1.0;
  for (int k = 0; k <= order; ++k) {
    s += binomial(order + k, k) * pw;
    pw *= 1.0 - x;
  }
  return std::pow(x, order + 1) * s;
}

RadialWindow::RadialWindow(int order) : order_(order) { check_order(order); }

double RadialWindow::operator()(double r) const {
  constexpr double half_pi = std::numbers::pi / 2;
  if (r <= 0.5 || r >= 2.0) return 0.0;
  if (r <= 1.0) return std::sin(half_pi * smoothstep(2.0 * r - 1.0, order_));
  return std::cos(half_pi * smoothstep(r - 1.0, order_));
}

AngularBump::AngularBump(int order) : order_(order) { check_order(order); }

double AngularBump::operator()(double t) const {
  const double a = std::abs(t);
  if (a >= 1.0) return 0.0;
  return std::cos(std::numbers::pi / 2 * smoothstep(a, order_));
}

double meyer_window(double r, int order) { return RadialWindow(order)(r); }

double angular_bump(double t, int order) { return AngularBump(order)(t); }

CalderonSum calderon_sum(double r, int j_lo, int j_hi, int order) {
  if (!(r > 0.0)) throw std::invalid_argument("calderon_sum: r must be positive");
  if (j_lo > j_hi) throw std::invalid_argument("calderon_sum: empty scale range");
  const RadialWindow w(order);
  CalderonSum out;
  for (int j = j_lo; j <= j_hi; ++j) {
    const double v = w(std::ldexp(r, -j));
    out.value += v * v;
  }
  out.truncated = r < std::ldexp(1.0, j_lo - 1) || r > std::ldexp(1.0, j_hi + 1);
  return out;
}

double low_pass_window(double r, int j0, int order) {
  if (r < 0.0) throw std::invalid_argument("low_pass_window: negative radius");
  if (r <= std::ldexp(1.0, j0 - 1)) return 1.0;
  if (r >= std::ldexp(1.0, j0)) return 0.0;
  // Only W(r 2^-j0) is nonzero among j >= j0 on this interval.
  const double v = RadialWindow(order)(std::ldexp(r, -j0));
  return std::sqrt(std::max(0.0, 1.0 - v * v));
}

}  // namespace geosep
