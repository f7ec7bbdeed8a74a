#pragma once

#include <vector>

#include "geosep/grid.hpp"

namespace geosep {

// Constant c in the planar pair |x|^{-3/2} <-> c |xi|^{-1/2}:
// c = 2^{1/2} pi Gamma(1/4) / Gamma(3/4).
double point_constant();

struct PointConfig {
  std::vector<Vec2> points;
  double weight = 1.0;
};

// Closed curve with unit-speed parametrization t in [0, length()).
class Curve {
 public:
  static Curve circle(Vec2 center, double radius);
  // Closed uniform cubic B-spline through the given control polygon.
  static Curve spline(const std::vector<Vec2>& control);

  double length() const { return length_; }
  Vec2 point(double t) const;
  Vec2 tangent(double t) const;      // unit vector
  double normal_angle(double t) const;  // direction of the normal, mod pi in [0, pi)
  double max_curvature() const { return max_curvature_; }
  bool is_circle() const { return circle_; }
  Vec2 center() const { return center_; }
  double radius() const { return radius_; }
  const std::vector<Vec2>& control() const { return control_; }

  // Largest deviation of |d tau/dt| from 1 over a probe set.
  double speed_error(int probes = 2000) const;

 private:
  Vec2 spline_eval(double u, int derivative) const;
  double u_of(double t) const;

  bool circle_ = true;
  Vec2 center_;
  double radius_ = 0.0;
  std::vector<Vec2> control_;
  std::vector<double> table_u_, table_s_;  // arc length table for splines
  double length_ = 0.0;
  double max_curvature_ = 0.0;
};

// Minimum trapezoid node count for |xi| <= r_max: factor * r_max * L / (2 pi).
constexpr double kCurveNodeFactor = 2.0;
int required_curve_nodes(const Curve& c, double r_max);

// weight * int_0^L exp(-i tau(t).xi) dt by the trapezoid rule with `nodes`
// equispaced nodes, on grid nodes with |xi| <= r_max (zero elsewhere).
// nodes <= 0 picks 1.5 times the minimum.
SpectralImage curve_spectrum(const Curve& c, double weight, const FreqGrid& g, double r_max,
                             int nodes = 0, int threads = 1);
cd curve_spectrum_at(const Curve& c, double weight, int nodes, double xi1, double xi2);

// weight * c * sum_i exp(-i x_i.xi) |xi|^{-1/2} on nodes with |xi| <= r_max; 0 at xi = 0.
SpectralImage point_spectrum(const PointConfig& p, const FreqGrid& g, double r_max);

// Smooth profile on [-1, 1] with sum_l w2(u - l) = 1 (C-infinity transition).
double line_profile(double u);
// Fourier transform int w2(u) e^{-i omega u} du (real, even).
double line_profile_hat(double omega);

// wL = w2(x2 / rho) delta(x1): a vertical segment through the origin.
struct LineFragment {
  double rho = 0.3;
  double weight = 1.0;
};
SpectralImage line_spectrum(const LineFragment& w, const FreqGrid& g, double r_max);

}  // namespace geosep
