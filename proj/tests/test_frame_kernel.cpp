#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "geosep/coefficients.hpp"
#include "geosep/fft.hpp"
#include "geosep/frames.hpp"
#include "geosep/grid.hpp"
#include "geosep/nufft.hpp"
#include "geosep/windows.hpp"

using namespace geosep;

namespace {

constexpr double kPi = std::numbers::pi;

// A few weighted spikes in [-0.6, 0.6]^2, restricted to the subband of scale j.
SpectralImage random_sources(const FreqGrid& g, int j, std::mt19937_64& rng, int count = 6) {
  std::uniform_real_distribution<double> pos(-0.6, 0.6), amp(-1.0, 1.0);
  SpectralImage f(g);
  for (int k = 0; k < count; ++k) {
    const double x = pos(rng), y = pos(rng), a = amp(rng);
    for (int i2 = 0; i2 < g.size; ++i2)
      for (int i1 = 0; i1 < g.size; ++i1) f.at(i1, i2) += a * std::polar(1.0, -(x * g.xi(i1) + y * g.xi(i2)));
  }
  return filtered_piece(f, j);
}

double rel(const SpectralImage& a, const SpectralImage& b) { return norm(a - b) / norm(b); }

}  // namespace

// ---- windows ----

TEST(Windows, SmoothstepSymmetryAndEnds) {
  for (int p : {1, 3, 6})
    for (double x : {0.0, 0.1, 0.37, 0.5, 0.9}) {
      EXPECT_NEAR(smoothstep(x, p) + smoothstep(1 - x, p), 1.0, 1e-15);
      EXPECT_EQ(smoothstep(-x - 0.1, p), 0.0);
      EXPECT_EQ(smoothstep(1.1 + x, p), 1.0);
    }
}

TEST(Windows, RadialSupportIsTheDyadicAnnulus) {
  const RadialWindow w(3);
  EXPECT_EQ(w(0.5), 0.0);
  EXPECT_EQ(w(2.0), 0.0);
  EXPECT_EQ(w(0.3), 0.0);
  EXPECT_EQ(w(2.5), 0.0);
  EXPECT_NEAR(w(1.0), 1.0, 1e-15);
  EXPECT_GT(w(0.51), 0.0);
}

TEST(Windows, CalderonSumIsOne) {
  double worst = 0;
  for (int k = 0; k <= 20000; ++k) {
    const double r = std::pow(2.0, 2.0 + 12.0 * k / 20000);
    const CalderonSum s = calderon_sum(r, -1, 20);
    ASSERT_FALSE(s.truncated);
    worst = std::max(worst, std::abs(s.value - 1.0));
  }
  EXPECT_LE(worst, 1e-10);
}

TEST(Windows, CalderonTruncationAndErrors) {
  EXPECT_TRUE(calderon_sum(1000.0, 0, 3).truncated);
  EXPECT_FALSE(calderon_sum(10.0, 0, 8).truncated);
  EXPECT_THROW(calderon_sum(0.0, 0, 3), std::invalid_argument);
  EXPECT_THROW(calderon_sum(1.0, 4, 3), std::invalid_argument);
  EXPECT_THROW(RadialWindow(0), std::invalid_argument);
}

TEST(Windows, LowPassCompletesThePartition) {
  for (double r : {0.0, 1.0, 3.0, 7.9, 12.0, 40.0}) {
    double s = std::pow(low_pass_window(r, 3), 2);
    for (int j = 3; j <= 20; ++j) s += std::pow(meyer_window(r / std::ldexp(1.0, j)), 2);
    EXPECT_NEAR(s, 1.0, 1e-12) << r;
  }
}

TEST(Windows, AngularPartitionOfUnity) {
  double worst = 0;
  for (int s = 3; s <= 12; ++s)
    for (int k = 0; k < 5000; ++k) {
      const double om = 2 * kPi * k / 5000 - kPi;
      double sum = 0;
      for (int l = 0; l < wedge_count(s); ++l) sum += std::pow(wedge_window(s, l, om), 2);
      worst = std::max(worst, std::abs(sum - 1.0));
    }
  EXPECT_LE(worst, 1e-8);
}

TEST(Windows, WedgeWindowIsEvenUnderAntipode) {
  for (int l = 0; l < wedge_count(8); ++l)
    for (double om : {0.1, 0.8, 2.0})
      EXPECT_NEAR(wedge_window(8, l, om), wedge_window(8, l, om + kPi), 1e-14);
}

// ---- FFT and NUFFT ----

TEST(Fft, MatchesDirectDft) {
  const int n0 = 6, n1 = 10;
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0, 1);
  FftBuffer b(n0 * n1);
  std::vector<cd> x(n0 * n1);
  for (auto& v : x) v = {n(rng), n(rng)};
  for (int i = 0; i < n0 * n1; ++i) b[i] = x[i];
  fft2d(b, n0, n1, -1);
  double err = 0;
  for (int k0 = 0; k0 < n0; ++k0)
    for (int k1 = 0; k1 < n1; ++k1) {
      cd s = 0;
      for (int a = 0; a < n0; ++a)
        for (int c = 0; c < n1; ++c)
          s += x[a * n1 + c] * std::polar(1.0, -2 * kPi * (double(k0 * a) / n0 + double(k1 * c) / n1));
      err = std::max(err, std::abs(s - b[k0 * n1 + k1]));
    }
  EXPECT_LT(err, 1e-12);
  EXPECT_EQ(fft_size(97), 98);
  EXPECT_EQ(fft_size(121), 125);
}

TEST(Nufft, TypeOneAndTwoMatchDirectSums) {
  const int n1 = 24, n2 = 16, m = 50;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-kPi, kPi);
  std::normal_distribution<double> n(0, 1);
  std::vector<double> x1(m), x2(m);
  std::vector<cd> c(m), f(n1 * n2);
  for (int i = 0; i < m; ++i) {
    x1[i] = u(rng);
    x2[i] = u(rng);
    c[i] = {n(rng), n(rng)};
  }
  for (auto& v : f) v = {n(rng), n(rng)};
  Nufft2d plan(n1, n2);
  std::vector<cd> out, back;
  plan.type1(x1, x2, c, out);
  plan.type2(x1, x2, f, back);
  double e1 = 0, s1 = 0, e2 = 0, s2 = 0;
  for (int k2 = -n2 / 2; k2 < n2 / 2; ++k2)
    for (int k1 = -n1 / 2; k1 < n1 / 2; ++k1) {
      cd s = 0;
      for (int i = 0; i < m; ++i) s += c[i] * std::polar(1.0, k1 * x1[i] + k2 * x2[i]);
      const cd got = out[(k2 + n2 / 2) * n1 + (k1 + n1 / 2)];
      e1 = std::max(e1, std::abs(got - s));
      s1 = std::max(s1, std::abs(s));
    }
  for (int i = 0; i < m; ++i) {
    cd s = 0;
    for (int k2 = -n2 / 2; k2 < n2 / 2; ++k2)
      for (int k1 = -n1 / 2; k1 < n1 / 2; ++k1)
        s += f[(k2 + n2 / 2) * n1 + (k1 + n1 / 2)] * std::polar(1.0, -(k1 * x1[i] + k2 * x2[i]));
    e2 = std::max(e2, std::abs(back[i] - s));
    s2 = std::max(s2, std::abs(s));
  }
  EXPECT_LT(e1 / s1, 1e-7);
  EXPECT_LT(e2 / s2, 1e-7);
  // Adjointness: <type1 c, f> = <c, type2 f>.
  cd lhs = 0, rhs = 0;
  for (int k = 0; k < n1 * n2; ++k) lhs += out[k] * std::conj(f[k]);
  for (int i = 0; i < m; ++i) rhs += c[i] * std::conj(back[i]);
  EXPECT_LT(std::abs(lhs - rhs), 1e-10 * std::abs(lhs));
  EXPECT_THROW(Nufft2d(5, 4), std::invalid_argument);
}

// ---- lattice and atoms ----

TEST(Lattice, WedgeCountsAndSteps) {
  EXPECT_EQ(wedge_count(5), 4);
  EXPECT_EQ(wedge_count(6), 8);
  EXPECT_DOUBLE_EQ(radial_step(6), 1.0 / 64);
  EXPECT_DOUBLE_EQ(transverse_step(6), 1.0 / 8 * 0.5);
  EXPECT_NEAR(transverse_step(5), std::pow(2.0, -2.5) * std::pow(2.0, -0.5) / 2, 1e-15);
  const Vec2 p = curvelet_position({6, 2, 3, -1});
  const double th = wedge_angle(6, 2);
  // Rotated lattice: radial coordinate along (cos, sin), transverse across.
  EXPECT_NEAR(p.x * std::cos(th) + p.y * std::sin(th), 3 * radial_step(6), 1e-15);
  EXPECT_NEAR(-p.x * std::sin(th) + p.y * std::cos(th), -transverse_step(6), 1e-15);
}

TEST(Atoms, EqualNormsAcrossScalesPositionsAndWedges) {
  std::vector<double> wn, cn;
  for (int j = 5; j <= 8; ++j) {
    const FreqGrid g = FreqGrid::for_scale(j);
    wn.push_back(norm(wavelet_atom(g, {j, 0, 0})));
    wn.push_back(norm(wavelet_atom(g, {j, 5, -3})));
    for (int l : {0, 1, wedge_count(j) - 1}) cn.push_back(norm(curvelet_atom(g, {j, l, 2, -1})));
  }
  for (double v : wn) EXPECT_NEAR(v, wn.front(), 1e-3 * wn.front());
  for (double v : cn) EXPECT_NEAR(v, cn.front(), 2e-2 * cn.front());
}

TEST(Atoms, AtomSitsAtItsNominalPosition) {
  const int j = 6;
  const FreqGrid g = FreqGrid::for_scale(j);
  const WaveletIndex i{j, 7, -4};
  const std::vector<double> x = to_spatial(wavelet_atom(g, i));
  std::size_t best = 0;
  for (std::size_t k = 0; k < x.size(); ++k)
    if (std::abs(x[k]) > std::abs(x[best])) best = k;
  const double step = g.period() / g.size;
  const Vec2 b = wavelet_position(i);
  EXPECT_NEAR(step * (static_cast<int>(best % g.size) - g.size / 2), b.x, step);
  EXPECT_NEAR(step * (static_cast<int>(best / g.size) - g.size / 2), b.y, step);
}

// ---- analysis and synthesis ----

TEST(Wavelet, ParsevalReconstruction) {
  const int j = 6;
  const FreqGrid g = FreqGrid::for_scale(j);
  for (int seed = 0; seed < 10; ++seed) {
    std::mt19937_64 rng(seed);
    const SpectralImage f = random_sources(g, j, rng);
    const CoefficientTable t = wavelet_analysis(f, j);
    EXPECT_LE(rel(wavelet_synthesis(t, nullptr, g), f), 1e-6);
    EXPECT_NEAR(t.l2_squared(), std::pow(norm(f), 2), 1e-10 * std::pow(norm(f), 2));
  }
}

TEST(Curvelet, ReconstructionWithinTolerance) {
  const int j = 6;
  const FreqGrid g = FreqGrid::for_scale(j);
  for (int seed = 0; seed < 10; ++seed) {
    std::mt19937_64 rng(100 + seed);
    const SpectralImage f = random_sources(g, j, rng);
    EXPECT_LE(rel(curvelet_synthesis(curvelet_analysis(f, j), nullptr, g), f), 1e-3) << seed;
  }
}

TEST(Coefficients, MatchBruteForceQuadrature) {
  for (int j : {5, 6, 7}) {
    std::mt19937_64 rng(40 + j);
    const FreqGrid g = FreqGrid::for_scale(j);
    const SpectralImage f = random_sources(g, j, rng);
    const CoefficientTable wt = wavelet_analysis(f, j), ct = curvelet_analysis(f, j);
    const CoefficientBlock& wb = *wt.find(j);
    std::uniform_int_distribution<int> k1(-wb.n1 / 4, wb.n1 / 4), k2(-wb.n2 / 4, wb.n2 / 4);
    double top = 0;
    for (const cd& v : wb.values) top = std::max(top, std::abs(v));
    for (int n = 0; n < 20; ++n) {
      const WaveletIndex i{j, k1(rng), k2(rng)};
      const cd ref = inner(f, wavelet_atom(g, i));
      EXPECT_LE(std::abs(wt.at(i) - ref), 1e-6 * std::max(std::abs(ref), 1e-2 * top)) << to_string(i);
    }
    std::uniform_int_distribution<int> wl(0, wedge_count(j) - 1);
    int done = 0;
    while (done < 20) {
      const int l = wl(rng);
      const CoefficientBlock& cb = *ct.find(j, l);
      std::uniform_int_distribution<int> c1(-cb.n1 / 2, cb.n1 / 2 - 1), c2(-cb.n2 / 2, cb.n2 / 2 - 1);
      const CurveletIndex i{j, l, c1(rng), c2(rng)};
      if (!cb.contains(i.k1, i.k2)) continue;
      const cd ref = inner(f, curvelet_atom(g, i));
      EXPECT_LE(std::abs(ct.at(i) - ref), 1e-5 * std::max(std::abs(ref), 1e-2 * top)) << to_string(i);
      ++done;
    }
  }
}

TEST(Curvelet, DirectAndNufftPathsAgree) {
  const int j = 5;
  const FreqGrid g = FreqGrid::for_scale(j);
  std::mt19937_64 rng(3);
  const SpectralImage f = random_sources(g, j, rng);
  FrameOptions direct;
  direct.force_direct = true;
  FrameOptions fast;
  fast.direct_below = 0;
  const CoefficientTable a = curvelet_analysis(f, j, direct), b = curvelet_analysis(f, j, fast);
  double err = 0, top = 0;
  for (std::size_t k = 0; k < a.blocks.size(); ++k)
    for (std::size_t i = 0; i < a.blocks[k].values.size(); ++i) {
      err = std::max(err, std::abs(a.blocks[k].values[i] - b.blocks[k].values[i]));
      top = std::max(top, std::abs(a.blocks[k].values[i]));
    }
  EXPECT_LT(err / top, 1e-6);
}

TEST(Coefficients, ThreadCountDoesNotChangeResults) {
  const int j = 6;
  const FreqGrid g = FreqGrid::for_scale(j);
  std::mt19937_64 rng(12);
  const SpectralImage f = random_sources(g, j, rng);
  FrameOptions one, four;
  four.threads = 4;
  const CoefficientTable a = curvelet_analysis(f, j, one), b = curvelet_analysis(f, j, four);
  for (std::size_t k = 0; k < a.blocks.size(); ++k) EXPECT_EQ(a.blocks[k].values, b.blocks[k].values);
  const SpectralImage s1 = curvelet_synthesis(a, nullptr, g, one), s4 = curvelet_synthesis(a, nullptr, g, four);
  EXPECT_EQ(s1.values(), s4.values());
}

TEST(Layout, CountsAndValidity) {
  const CoefficientTable w = wavelet_layout(4, 6, 2);
  EXPECT_EQ(w.count(), std::size_t(32 * 32 + 64 * 64 + 128 * 128));
  const CoefficientTable c = curvelet_layout(5, 5, 2);
  for (const auto& b : c.blocks)
    for (std::size_t i = 0; i < b.values.size(); ++i) {
      if (!b.is_valid(i)) continue;
      const Vec2 p = curvelet_position({b.scale, b.wedge, b.k1_of(i), b.k2_of(i)});
      EXPECT_TRUE(p.x >= -1 && p.x < 1 && p.y >= -1 && p.y < 1);
    }
  EXPECT_EQ(c.blocks.size(), std::size_t(wedge_count(5)));
}

TEST(Layout, Errors) {
  EXPECT_THROW(wavelet_layout(6, 5, 2), std::invalid_argument);
  const FreqGrid small = FreqGrid::for_scale(4);
  EXPECT_THROW(wavelet_analysis(SpectralImage(small), 7), std::invalid_argument);
  const CoefficientTable t = wavelet_layout(4, 6, 2);
  EXPECT_THROW(t.at(WaveletIndex{9, 0, 0}), std::out_of_range);
  EXPECT_THROW(t.threshold(-1.0), std::invalid_argument);
  IndexMask bad;
  EXPECT_THROW(wavelet_synthesis(t, &bad, FreqGrid::for_scale(5)), std::invalid_argument);
  EXPECT_THROW(curvelet_synthesis(t, nullptr, FreqGrid::for_scale(5)), std::invalid_argument);
  EXPECT_THROW(FreqGrid::with_size(5, 7), std::invalid_argument);
}

TEST(Layout, ThresholdTiesAreSignificant) {
  CoefficientTable t = wavelet_layout(4, 4, 2);
  t.blocks[0].values[3] = 2.0;
  t.blocks[0].values[5] = cd(0.0, -2.0);
  t.blocks[0].values[7] = 1.999;
  EXPECT_EQ(t.threshold(2.0).count(), 2u);
  EXPECT_EQ(t.threshold(0.0).count(), t.count());
}
