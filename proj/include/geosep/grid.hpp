#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace geosep {

using cd = std::complex<double>;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Vec2&) const = default;
};

// Uniform frequency grid of a torus model. The spatial period equals
// `oversample` (length units), so the spacing is 2 pi / oversample and the
// field of view is [-oversample/2, oversample/2)^2. Node (i1, i2) sits at
// xi = spacing * (i - size/2) on each axis.
struct FreqGrid {
  int scale = 0;       // nominal scale j the grid was built for
  int size = 0;        // nodes per axis, even
  int oversample = 2;  // spatial period

  // Smallest grid whose box contains |xi| <= 2^(j+2) with a zero Nyquist row.
  static FreqGrid for_scale(int j, int oversample = 2);
  // Grid of a given size (tests and tiny materialized frames).
  static FreqGrid with_size(int j, int size, int oversample = 2);

  double spacing() const;
  double period() const { return static_cast<double>(oversample); }
  double xi(int i) const { return spacing() * (i - size / 2); }
  double half_width() const { return spacing() * (size / 2); }
  std::size_t count() const { return static_cast<std::size_t>(size) * size; }
  std::size_t index(int i1, int i2) const {
    return static_cast<std::size_t>(i2) * size + i1;
  }
  bool operator==(const FreqGrid&) const = default;
};

// Samples of a spectrum on a FreqGrid, row-major with i1 fastest.
class SpectralImage {
 public:
  SpectralImage() = default;
  explicit SpectralImage(const FreqGrid& g);

  const FreqGrid& grid() const { return grid_; }
  std::vector<cd>& values() { return values_; }
  const std::vector<cd>& values() const { return values_; }
  cd& at(int i1, int i2) { return values_[grid_.index(i1, i2)]; }
  cd at(int i1, int i2) const { return values_[grid_.index(i1, i2)]; }

  SpectralImage& operator+=(const SpectralImage& o);
  SpectralImage& operator-=(const SpectralImage& o);
  SpectralImage& operator*=(double s);

 private:
  FreqGrid grid_;
  std::vector<cd> values_;
};

SpectralImage operator+(SpectralImage a, const SpectralImage& b);
SpectralImage operator-(SpectralImage a, const SpectralImage& b);

// <f, g> = (2 pi)^-2 sum f conj(g) dxi^2, the torus inner product.
cd inner(const SpectralImage& f, const SpectralImage& g);
double norm(const SpectralImage& f);

// Largest |xi| on the grid where the image is nonzero (0 for the zero image).
double support_radius(const SpectralImage& f);

// Multiply by W(|xi| / 2^j).
SpectralImage filtered_piece(const SpectralImage& target, int j, int order = 3);

// Spatial samples on the size x size torus lattice x = period * (n - size/2) / size.
// The image must be Hermitian for the result to be real; the imaginary part
// is dropped after checking it is below `imag_tol` relative to the peak.
std::vector<double> to_spatial(const SpectralImage& f, double imag_tol = 1e-9);

}  // namespace geosep
