#pragma once

namespace geosep {

// Polynomial smoothstep of order p: nu(0)=0, nu(1)=1, nu(x)+nu(1-x)=1,
// first p derivatives vanish at both ends. Clamped outside [0,1].
double smoothstep(double x, int order);

// Radial Meyer-type window supported on [1/2, 2] with sum_j W(r 2^-j)^2 = 1.
class RadialWindow {
 public:
  explicit RadialWindow(int order = 3);
  double operator()(double r) const;
  int order() const { return order_; }

 private:
  int order_;
};

// Angular bump supported on [-1, 1] with sum_l V(t - l)^2 = 1 and V(0) = 1.
class AngularBump {
 public:
  explicit AngularBump(int order = 3);
  double operator()(double t) const;
  int order() const { return order_; }

 private:
  int order_;
};

double meyer_window(double r, int order = 3);
double angular_bump(double t, int order = 3);

struct CalderonSum {
  double value = 0.0;
  // True when r lies outside [2^(j_lo-1), 2^(j_hi+1)], i.e. the scale range
  // does not cover every window that can be nonzero at r.
  bool truncated = false;
};

// sum_{j=j_lo}^{j_hi} W(r / 2^j)^2. Throws if r <= 0 or j_lo > j_hi.
CalderonSum calderon_sum(double r, int j_lo, int j_hi, int order = 3);

// Father window for the coarse block: Phi(r)^2 = 1 - sum_{j >= j0} W(r 2^-j)^2.
double low_pass_window(double r, int j0, int order = 3);

}  // namespace geosep
