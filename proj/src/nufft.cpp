#include "geosep/nufft.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace geosep {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

Nufft2d::Nufft2d(int n1, int n2, int spread_half_width)
    : n1_(n1), n2_(n2), msp_(spread_half_width) {
  if (n1 < 2 || n2 < 2 || n1 % 2 || n2 % 2)
    throw std::invalid_argument("Nufft2d: mode counts must be even and >= 2");
  if (msp_ < 2 || msp_ > 16) throw std::invalid_argument("Nufft2d: spread width out of range");
  setup_axis(a1_, n1);
  setup_axis(a2_, n2);
  if (2 * msp_ > a1_.nf || 2 * msp_ > a2_.nf)
    throw std::invalid_argument("Nufft2d: spreading wider than the fine grid");
  fine_ = FftBuffer(static_cast<std::size_t>(a1_.nf) * a2_.nf);
}

void Nufft2d::setup_axis(Axis& a, int n) const {
  a.n = n;
  a.nf = fft_size(2 * n);
  if (a.nf % 2) ++a.nf;
  const double r = static_cast<double>(a.nf) / n;
  a.tau = std::numbers::pi * msp_ / (static_cast<double>(n) * n * r * (r - 0.5));
  const double h = kTwoPi / a.nf;
  a.e3.resize(2 * msp_);
  for (int q = -msp_ + 1; q <= msp_; ++q) a.e3[q + msp_ - 1] = std::exp(-(q * h) * (q * h) / (4 * a.tau));
  a.deconv.resize(n);
  const double g0 = std::sqrt(a.tau / std::numbers::pi);
  for (int k = -n / 2; k < n / 2; ++k)
    a.deconv[k + n / 2] = std::exp(k * static_cast<double>(k) * a.tau) / (a.nf * g0);
}

int Nufft2d::weights(const Axis& a, double x, double* w) const {
  const double h = kTwoPi / a.nf;
  x -= kTwoPi * std::floor(x / kTwoPi);
  const int p0 = static_cast<int>(std::floor(x / h));
  const double d = x - p0 * h;
  const double e1 = std::exp(-d * d / (4 * a.tau));
  const double e2 = std::exp(d * h / (2 * a.tau));
  // w[q] = e1 * e2^q * e3[q] for q = -msp+1 .. msp
  double up = 1.0;
  for (int q = 0; q <= msp_; ++q) {
    w[q + msp_ - 1] = e1 * up * a.e3[q + msp_ - 1];
    up *= e2;
  }
  const double inv = 1.0 / e2;
  double dn = inv;
  for (int q = -1; q >= -msp_ + 1; --q) {
    w[q + msp_ - 1] = e1 * dn * a.e3[q + msp_ - 1];
    dn *= inv;
  }
  return p0 - msp_ + 1;
}

void Nufft2d::type1(const std::vector<double>& x1, const std::vector<double>& x2,
                    const std::vector<std::complex<double>>& c,
                    std::vector<std::complex<double>>& out) {
  if (x1.size() != c.size() || x2.size() != c.size())
    throw std::invalid_argument("Nufft2d::type1: size mismatch");
  fine_.zero();
  const int nf1 = a1_.nf, nf2 = a2_.nf, w = 2 * msp_;
  std::vector<double> w1(w), w2(w);
  std::vector<int> idx1(w);
  for (std::size_t m = 0; m < c.size(); ++m) {
    const int s1 = weights(a1_, x1[m], w1.data());
    const int s2 = weights(a2_, x2[m], w2.data());
    for (int q = 0; q < w; ++q) idx1[q] = ((s1 + q) % nf1 + nf1) % nf1;
    for (int r = 0; r < w; ++r) {
      const int p2 = ((s2 + r) % nf2 + nf2) % nf2;
      const std::complex<double> cr = c[m] * w2[r];
      std::complex<double>* row = fine_.data() + static_cast<std::size_t>(p2) * nf1;
      for (int q = 0; q < w; ++q) row[idx1[q]] += cr * w1[q];
    }
  }
  fft2d(fine_, nf2, nf1, +1);
  out.assign(static_cast<std::size_t>(n1_) * n2_, 0.0);
  for (int k2 = -n2_ / 2; k2 < n2_ / 2; ++k2) {
    const int p2 = (k2 + nf2) % nf2;
    const double d2 = a2_.deconv[k2 + n2_ / 2];
    for (int k1 = -n1_ / 2; k1 < n1_ / 2; ++k1) {
      const int p1 = (k1 + nf1) % nf1;
      out[static_cast<std::size_t>(k2 + n2_ / 2) * n1_ + (k1 + n1_ / 2)] =
          fine_[static_cast<std::size_t>(p2) * nf1 + p1] * (d2 * a1_.deconv[k1 + n1_ / 2]);
    }
  }
}

void Nufft2d::type2(const std::vector<double>& x1, const std::vector<double>& x2,
                    const std::vector<std::complex<double>>& f,
                    std::vector<std::complex<double>>& c) {
  if (f.size() != static_cast<std::size_t>(n1_) * n2_ || x1.size() != x2.size())
    throw std::invalid_argument("Nufft2d::type2: size mismatch");
  fine_.zero();
  const int nf1 = a1_.nf, nf2 = a2_.nf, w = 2 * msp_;
  for (int k2 = -n2_ / 2; k2 < n2_ / 2; ++k2) {
    const int p2 = (k2 + nf2) % nf2;
    const double d2 = a2_.deconv[k2 + n2_ / 2];
    for (int k1 = -n1_ / 2; k1 < n1_ / 2; ++k1) {
      const int p1 = (k1 + nf1) % nf1;
      fine_[static_cast<std::size_t>(p2) * nf1 + p1] =
          f[static_cast<std::size_t>(k2 + n2_ / 2) * n1_ + (k1 + n1_ / 2)] *
          (d2 * a1_.deconv[k1 + n1_ / 2]);
    }
  }
  fft2d(fine_, nf2, nf1, -1);
  c.assign(x1.size(), 0.0);
  std::vector<double> w1(w), w2(w);
  std::vector<int> idx1(w);
  for (std::size_t m = 0; m < x1.size(); ++m) {
    const int s1 = weights(a1_, x1[m], w1.data());
    const int s2 = weights(a2_, x2[m], w2.data());
    for (int q = 0; q < w; ++q) idx1[q] = ((s1 + q) % nf1 + nf1) % nf1;
    std::complex<double> acc = 0.0;
    for (int r = 0; r < w; ++r) {
      const int p2 = ((s2 + r) % nf2 + nf2) % nf2;
      const std::complex<double>* row = fine_.data() + static_cast<std::size_t>(p2) * nf1;
      std::complex<double> racc = 0.0;
      for (int q = 0; q < w; ++q) racc += row[idx1[q]] * w1[q];
      acc += racc * w2[r];
    }
    c[m] = acc;
  }
}

}  // namespace geosep
