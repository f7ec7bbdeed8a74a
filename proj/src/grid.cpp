#include "geosep/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "geosep/fft.hpp"
#include "geosep/windows.hpp"

namespace geosep {

FreqGrid FreqGrid::for_scale(int j, int oversample) {
  if (oversample < 1) throw std::invalid_argument("oversample must be >= 1");
  if (j < 0 || j > 14) throw std::invalid_argument("scale out of range: " + std::to_string(j));
  FreqGrid g;
  g.scale = j;
  g.oversample = oversample;
  const double reach = std::ldexp(1.0, j + 2);
  g.size = 2 * static_cast<int>(std::ceil(reach / g.spacing())) + 2;
  return g;
}

FreqGrid FreqGrid::with_size(int j, int size, int oversample) {
  if (size < 2 || size % 2) throw std::invalid_argument("grid size must be even and >= 2");
  if (oversample < 1) throw std::invalid_argument("oversample must be >= 1");
  FreqGrid g;
  g.scale = j;
  g.size = size;
  g.oversample = oversample;
  return g;
}

double FreqGrid::spacing() const { return 2.0 * std::numbers::pi / oversample; }

SpectralImage::SpectralImage(const FreqGrid& g) : grid_(g), values_(g.count()) {}

static void check_same(const FreqGrid& a, const FreqGrid& b) {
  if (a.size != b.size || a.oversample != b.oversample)
    throw std::invalid_argument("spectral images live on different grids");
}

SpectralImage& SpectralImage::operator+=(const SpectralImage& o) {
  check_same(grid_, o.grid_);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
  return *this;
}

SpectralImage& SpectralImage::operator-=(const SpectralImage& o) {
  check_same(grid_, o.grid_);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
  return *this;
}

SpectralImage& SpectralImage::operator*=(double s) {
  for (auto& v : values_) v *= s;
  return *this;
}

SpectralImage operator+(SpectralImage a, const SpectralImage& b) { return a += b; }
SpectralImage operator-(SpectralImage a, const SpectralImage& b) { return a -= b; }

cd inner(const SpectralImage& f, const SpectralImage& g) {
  check_same(f.grid(), g.grid());
  cd s = 0.0;
  const auto& a = f.values();
  const auto& b = g.values();
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * std::conj(b[i]);
  const double h = f.grid().spacing() / (2.0 * std::numbers::pi);
  return s * (h * h);
}

double norm(const SpectralImage& f) { return std::sqrt(std::max(0.0, inner(f, f).real())); }

double support_radius(const SpectralImage& f) {
  const FreqGrid& g = f.grid();
  double r = 0.0;
  for (int i2 = 0; i2 < g.size; ++i2)
    for (int i1 = 0; i1 < g.size; ++i1)
      if (f.at(i1, i2) != cd(0.0)) r = std::max(r, std::hypot(g.xi(i1), g.xi(i2)));
  return r;
}

SpectralImage filtered_piece(const SpectralImage& target, int j, int order) {
  const FreqGrid& g = target.grid();
  if (std::ldexp(1.0, j + 1) > g.half_width())
    throw std::invalid_argument("filtered_piece: grid does not cover the scale-" +
                                std::to_string(j) + " annulus");
  const RadialWindow w(order);
  SpectralImage out(g);
  const double inv = std::ldexp(1.0, -j);
  for (int i2 = 0; i2 < g.size; ++i2) {
    const double x2 = g.xi(i2);
    for (int i1 = 0; i1 < g.size; ++i1) {
      const double v = w(std::hypot(g.xi(i1), x2) * inv);
      if (v != 0.0) out.at(i1, i2) = target.at(i1, i2) * v;
    }
  }
  return out;
}

std::vector<double> to_spatial(const SpectralImage& f, double imag_tol) {
  const FreqGrid& g = f.grid();
  const int n = g.size;
  FftBuffer buf(g.count());
  for (int i2 = 0; i2 < n; ++i2)
    for (int i1 = 0; i1 < n; ++i1) buf[g.index(i1, i2)] = ((i1 + i2) % 2 ? -1.0 : 1.0) * f.at(i1, i2);
  fft2d(buf, n, n, +1);
  const double h = g.spacing() / (2.0 * std::numbers::pi);
  std::vector<double> out(g.count());
  double peak = 0.0, worst = 0.0;
  for (int i2 = 0; i2 < n; ++i2)
    for (int i1 = 0; i1 < n; ++i1) {
      const std::size_t k = g.index(i1, i2);
      const cd v = buf[k] * (h * h) * ((i1 + i2) % 2 ? -1.0 : 1.0);
      out[k] = v.real();
      peak = std::max(peak, std::abs(v));
      worst = std::max(worst, std::abs(v.imag()));
    }
  if (worst > imag_tol * std::max(peak, 1e-300))
    throw std::invalid_argument("to_spatial: spectrum is not Hermitian");
  return out;
}

}  // namespace geosep
