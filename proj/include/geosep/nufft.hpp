#pragma once

#include <complex>
#include <vector>

#include "geosep/fft.hpp"

namespace geosep {

// Gaussian-gridding non-uniform FFT on a centered n1 x n2 mode box
// (k_i in [-n_i/2, n_i/2)), oversampling factor 2.
//   type1: out[k] = sum_m c_m exp(+i k.x_m)
//   type2: c_m   = sum_k f_k exp(-i k.x_m)
// type2 is the exact adjoint of the discrete type1 operator.
class Nufft2d {
 public:
  Nufft2d(int n1, int n2, int spread_half_width = 8);

  void type1(const std::vector<double>& x1, const std::vector<double>& x2,
             const std::vector<std::complex<double>>& c, std::vector<std::complex<double>>& out);
  void type2(const std::vector<double>& x1, const std::vector<double>& x2,
             const std::vector<std::complex<double>>& f, std::vector<std::complex<double>>& c);

  int n1() const { return n1_; }
  int n2() const { return n2_; }

 private:
  struct Axis {
    int n = 0;       // modes
    int nf = 0;      // fine grid
    double tau = 0;  // Gaussian width
    std::vector<double> e3;      // exp(-(q h)^2 / 4 tau), q in [-msp+1, msp]
    std::vector<double> deconv;  // 1 / (nf ghat(k)), indexed by k + n/2
  };
  void setup_axis(Axis& a, int n) const;
  // Kernel weights of one source on one axis; returns the first fine index.
  int weights(const Axis& a, double x, double* w) const;

  int n1_, n2_, msp_;
  Axis a1_, a2_;
  FftBuffer fine_;
};

}  // namespace geosep
