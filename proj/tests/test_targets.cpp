#include <gtest/gtest.h>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "geosep/diagnostics.hpp"
#include "geosep/frames.hpp"
#include "geosep/grid.hpp"
#include "geosep/targets.hpp"

using namespace geosep;

namespace {

constexpr double kPi = std::numbers::pi;

// Energy of the spectrum on r < |xi| < 2r, times the cell measure.
double annulus_energy(const SpectralImage& f, double r) {
  const FreqGrid& g = f.grid();
  double e = 0;
  for (int i2 = 0; i2 < g.size; ++i2)
    for (int i1 = 0; i1 < g.size; ++i1) {
      const double q = std::hypot(g.xi(i1), g.xi(i2));
      if (q > r && q < 2 * r) e += std::norm(f.at(i1, i2));
    }
  return e * g.spacing() * g.spacing();
}

double max_conjugate_asymmetry(const SpectralImage& f) {
  // Node i and node size - i are antipodal for i >= 1.
  const FreqGrid& g = f.grid();
  double worst = 0, top = 0;
  for (int i2 = 1; i2 < g.size; ++i2)
    for (int i1 = 1; i1 < g.size; ++i1) {
      worst = std::max(worst, std::abs(f.at(i1, i2) - std::conj(f.at(g.size - i1, g.size - i2))));
      top = std::max(top, std::abs(f.at(i1, i2)));
    }
  return worst / top;
}

}  // namespace

// ---- points ----

// The planar transform of |x|^{-3/2} is 2 pi |xi|^{-1/2} int_0^inf u^{-1/2} J0(u) du.
// With J0(u) = (1/pi) int_0^pi cos(u sin t) dt and int_0^inf u^{-1/2} cos(a u) du
// = sqrt(pi / (2 a)), the radial integral becomes (2 pi)^{-1/2} int_0^pi sin(t)^{-1/2} dt,
// evaluated here by tanh-sinh quadrature.
TEST(Points, ConstantMatchesRadialQuadratureOracle) {
  boost::math::quadrature::tanh_sinh<double> q;
  // Symmetric about pi/2; keeps the singularity at the left endpoint only.
  const double s = 2 * q.integrate([](double t) { return 1.0 / std::sqrt(std::sin(t)); }, 0.0, kPi / 2, 1e-14);
  const double c = 2 * kPi * s / std::sqrt(2 * kPi);
  EXPECT_NEAR(point_constant(), c, 1e-10 * c);
}

TEST(Points, OriginSpectrumIsRealRadialPowerLaw) {
  const FreqGrid g = FreqGrid::for_scale(5);
  const SpectralImage P = point_spectrum({{{0.0, 0.0}}, 1.0}, g, g.half_width());
  EXPECT_EQ(P.at(g.size / 2, g.size / 2), cd(0.0));
  for (int i2 = 0; i2 < g.size; i2 += 7)
    for (int i1 = 0; i1 < g.size; i1 += 5) {
      const double r = std::hypot(g.xi(i1), g.xi(i2));
      if (r == 0 || r > g.half_width()) continue;
      EXPECT_EQ(P.at(i1, i2).imag(), 0.0);
      EXPECT_NEAR(P.at(i1, i2).real(), point_constant() / std::sqrt(r), 1e-12);
    }
}

TEST(Points, AnnulusEnergyGrowsLinearly) {
  const FreqGrid g = FreqGrid::for_scale(9);
  const SpectralImage P = point_spectrum({{{-0.4, 0.3}}, 1.0}, g, g.half_width());
  std::vector<std::pair<int, double>> s;
  for (int j = 4; j <= 9; ++j) s.push_back({j, annulus_energy(P, std::ldexp(1.0, j))});
  EXPECT_NEAR(decay_slope(s), 1.0, 0.05);
}

// ---- curves ----

TEST(Curves, CircleMatchesBesselOracle) {
  const FreqGrid g = FreqGrid::for_scale(7);
  const Vec2 c{0.15, -0.1};
  const double R = 0.5;
  const SpectralImage C = curve_spectrum(Curve::circle(c, R), 1.0, g, g.half_width());
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> node(0, g.size - 1);
  int n = 0;
  while (n < 100) {
    const int i1 = node(rng), i2 = node(rng);
    const double x1 = g.xi(i1), x2 = g.xi(i2), r = std::hypot(x1, x2);
    if (r > g.half_width()) continue;
    const cd ref = 2 * kPi * R * std::cyl_bessel_j(0.0, R * r) * std::polar(1.0, -(c.x * x1 + c.y * x2));
    EXPECT_LE(std::abs(C.at(i1, i2) - ref), 1e-8 * std::max(std::abs(ref), 1e-6 * 2 * kPi * R));
    ++n;
  }
}

TEST(Curves, TranslationMultipliesByPhase) {
  const FreqGrid g = FreqGrid::for_scale(5);
  const Vec2 v{0.2, -0.15};
  const SpectralImage a = curve_spectrum(Curve::circle({0, 0}, 0.4), 1.0, g, g.half_width());
  const SpectralImage b = curve_spectrum(Curve::circle(v, 0.4), 1.0, g, g.half_width());
  for (int i2 = 0; i2 < g.size; i2 += 3)
    for (int i1 = 0; i1 < g.size; i1 += 3)
      EXPECT_LT(std::abs(b.at(i1, i2) - a.at(i1, i2) * std::polar(1.0, -(v.x * g.xi(i1) + v.y * g.xi(i2)))),
                1e-10);
}

TEST(Curves, AnnulusEnergyGrowsLinearly) {
  const FreqGrid g = FreqGrid::for_scale(9);
  const SpectralImage C =
      curve_spectrum(Curve::circle({0.15, -0.1}, 0.5), 1.0, g, std::ldexp(1.0, 10));
  std::vector<std::pair<int, double>> s;
  for (int j = 4; j <= 9; ++j) s.push_back({j, annulus_energy(C, std::ldexp(1.0, j))});
  EXPECT_NEAR(decay_slope(s), 1.0, 0.05);
}

TEST(Curves, UnderResolvedQuadratureNamesTheRequiredCount) {
  const FreqGrid g = FreqGrid::for_scale(6);
  const Curve c = Curve::circle({0, 0}, 0.5);
  const int need = required_curve_nodes(c, g.half_width());
  try {
    curve_spectrum(c, 1.0, g, g.half_width(), need - 1);
    FAIL() << "expected an error";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find(std::to_string(need)), std::string::npos);
  }
  EXPECT_NO_THROW(curve_spectrum(c, 1.0, g, g.half_width(), need));
}

TEST(Curves, SplineIsClosedUnitSpeedAndRegular) {
  const Curve c = Curve::spline({{0.5, 0.0}, {0.3, 0.4}, {-0.2, 0.5}, {-0.5, 0.0}, {-0.3, -0.45}, {0.25, -0.4}});
  EXPECT_LE(c.speed_error(), 1e-6);
  const Vec2 a = c.point(0.0), b = c.point(c.length());
  EXPECT_NEAR(a.x, b.x, 1e-12);
  EXPECT_NEAR(a.y, b.y, 1e-12);
  EXPECT_TRUE(std::isfinite(c.max_curvature()));
  EXPECT_GT(c.max_curvature(), 0.0);
  EXPECT_THROW(Curve::spline({{0, 0}, {1, 0}, {0, 1}}), std::invalid_argument);
}

TEST(Curves, CircleNormalIsRadial) {
  const Curve c = Curve::circle({0.1, 0.2}, 0.4);
  EXPECT_NEAR(c.length(), 2 * kPi * 0.4, 1e-14);
  for (double t : {0.0, 0.3, 1.1, 2.0}) {
    const Vec2 p = c.point(t);
    const double radial = std::atan2(p.y - 0.2, p.x - 0.1);
    EXPECT_NEAR(angle_distance(c.normal_angle(t), reduce_angle(radial)), 0.0, 1e-12);
  }
}

// ---- line fragment ----

TEST(Line, ProfilePartitionOfUnity) {
  for (double u : {-0.7, -0.25, 0.0, 0.13, 0.5, 0.99})
    EXPECT_NEAR(line_profile(u - 1) + line_profile(u) + line_profile(u + 1), 1.0, 1e-14) << u;
  EXPECT_EQ(line_profile(1.0), 0.0);
  EXPECT_EQ(line_profile(-1.2), 0.0);
}

TEST(Line, ZeroFrequencyIsTheProfileIntegral) {
  // Midpoint rule on a fine mesh as the independent integral.
  const int n = 200000;
  double s = 0;
  for (int k = 0; k < n; ++k) s += line_profile(-1.0 + 2.0 * (k + 0.5) / n);
  s *= 2.0 / n;
  EXPECT_NEAR(line_profile_hat(0.0), s, 1e-9);
  const LineFragment w{0.3, 1.0};
  const FreqGrid g = FreqGrid::for_scale(5);
  const SpectralImage L = line_spectrum(w, g, 10 * g.half_width());
  EXPECT_NEAR(L.at(3, g.size / 2).real(), 0.3 * s, 1e-9);
}

TEST(Line, SpectrumIsConstantAlongFirstAxis) {
  const FreqGrid g = FreqGrid::for_scale(5);
  const SpectralImage L = line_spectrum({0.4, 1.0}, g, 10 * g.half_width());
  for (int i2 = 0; i2 < g.size; ++i2)
    for (int i1 = 1; i1 < g.size; ++i1) ASSERT_EQ(L.at(i1, i2), L.at(0, i2));
}

// The profile is compactly supported, so exponential decay is impossible;
// its transform must still decay faster than any power.
TEST(Line, TransformDecaysFasterThanAnyPower) {
  // The transform oscillates in sign, so compare envelopes over octaves.
  const auto envelope = [](double om) {
    double e = 0;
    for (int k = 0; k < 256; ++k) e = std::max(e, std::abs(line_profile_hat(om * (1 + k / 256.0))));
    return e;
  };
  double prev = 0;
  for (double om : {8.0, 16.0, 32.0, 64.0}) {
    const double slope = std::log2(envelope(2 * om) / envelope(om));
    if (om > 8.0) EXPECT_LT(slope, prev);
    prev = slope;
  }
  EXPECT_LT(prev, -8.0);
}

// ---- symmetry, filtering, energy ----

TEST(Targets, ConjugateSymmetry) {
  const FreqGrid g = FreqGrid::for_scale(5);
  const double rm = g.half_width() - g.spacing();
  EXPECT_LT(max_conjugate_asymmetry(point_spectrum({{{-0.4, 0.3}, {0.2, 0.1}}, 1.0}, g, rm)), 1e-14);
  EXPECT_LT(max_conjugate_asymmetry(curve_spectrum(Curve::circle({0.15, -0.1}, 0.5), 1.0, g, rm)), 1e-12);
  EXPECT_LT(max_conjugate_asymmetry(line_spectrum({0.3, 1.0}, g, rm)), 1e-14);
}

TEST(Targets, FilteringIsLinearAndBandLimited) {
  const int j = 5;
  const FreqGrid g = FreqGrid::for_scale(j);
  const SpectralImage P = point_spectrum({{{-0.4, 0.3}}, 1.0}, g, g.half_width());
  const SpectralImage C = curve_spectrum(Curve::circle({0.15, -0.1}, 0.5), 1.0, g, g.half_width());
  const SpectralImage sum = filtered_piece(P + C, j);
  const SpectralImage parts = filtered_piece(P, j) + filtered_piece(C, j);
  for (std::size_t k = 0; k < sum.values().size(); ++k)
    EXPECT_LE(std::abs(sum.values()[k] - parts.values()[k]), 1e-13 * std::abs(sum.values()[k]) + 1e-300);
  for (int i2 = 0; i2 < g.size; ++i2)
    for (int i1 = 0; i1 < g.size; ++i1) {
      const double r = std::hypot(g.xi(i1), g.xi(i2));
      if (r <= std::ldexp(1.0, j - 1) || r >= std::ldexp(1.0, j + 1)) ASSERT_EQ(sum.at(i1, i2), cd(0.0));
    }
}

TEST(Targets, EnergyBalanceAcrossScales) {
  std::vector<double> ratio;
  for (int j = 5; j <= 10; ++j) {
    const FreqGrid g = FreqGrid::for_scale(j);
    const double r = std::ldexp(1.0, j);
    const SpectralImage P = point_spectrum({{{-0.4, 0.3}}, 1.0}, g, 2 * r);
    const SpectralImage C = curve_spectrum(Curve::circle({0.15, -0.1}, 0.5), 1.0, g, 2 * r);
    ratio.push_back(annulus_energy(P, r) / annulus_energy(C, r));
  }
  const auto [lo, hi] = std::minmax_element(ratio.begin(), ratio.end());
  EXPECT_LE(*hi / *lo, 4.0);
}

TEST(Targets, FilteredNormGrowsLikeSquareRootOfFrequency) {
  std::vector<std::pair<int, double>> s;
  for (int j = 5; j <= 9; ++j) {
    const FreqGrid g = FreqGrid::for_scale(j);
    const double rm = std::ldexp(1.0, j + 1);
    const SpectralImage P = filtered_piece(point_spectrum({{{-0.4, 0.3}}, 1.0}, g, rm), j);
    const SpectralImage C = filtered_piece(curve_spectrum(Curve::circle({0.15, -0.1}, 0.5), 1.0, g, rm), j);
    s.push_back({j, norm(P) + norm(C)});
  }
  EXPECT_GE(decay_slope(s), 0.45);
}

TEST(Targets, PieceEnergy) {
  const FreqGrid g = FreqGrid::for_scale(5);
  EXPECT_EQ(norm(SpectralImage(g)), 0.0);
  // Atom norm equals the norm of its coefficient-space representation.
  const SpectralImage a = wavelet_atom(g, {5, 1, 2});
  EXPECT_NEAR(norm(a), std::sqrt(inner(a, a).real()), 1e-15);
  std::mt19937_64 rng(6);
  std::normal_distribution<double> n(0, 1);
  SpectralImage f(g);
  for (auto& v : f.values()) v = {n(rng), n(rng)};
  // Reordered double sum: columns first, then rows.
  double s = 0;
  for (int i1 = 0; i1 < g.size; ++i1) {
    double col = 0;
    for (int i2 = 0; i2 < g.size; ++i2) col += std::norm(f.at(i1, i2));
    s += col;
  }
  const double ref = std::sqrt(s) * g.spacing() / (2 * kPi);
  EXPECT_NEAR(norm(f), ref, 1e-12 * ref);
}

// ---- ground truth ----

TEST(GroundTruth, PointSamples) {
  const PhaseSet s = wavefront_set(PointConfig{{{0.2, -0.1}}, 1.0}, 4);
  ASSERT_EQ(s.size(), 4u);
  for (int m = 0; m < 4; ++m) {
    EXPECT_EQ(s[m].b.x, 0.2);
    EXPECT_EQ(s[m].b.y, -0.1);
    EXPECT_NEAR(s[m].theta, kPi * m / 4, 1e-15);
  }
  const PhaseSet omni = wavefront_set(PointConfig{{{0.2, -0.1}, {0.5, 0.5}}, 1.0});
  ASSERT_EQ(omni.size(), 2u);
  EXPECT_TRUE(omni[0].omni);
}

TEST(GroundTruth, CircleOrientationIsRadial) {
  const Curve c = Curve::circle({0.15, -0.1}, 0.5);
  for (const PhasePoint& p : wavefront_set(c, 16)) {
    const double radial = reduce_angle(std::atan2(p.b.y + 0.1, p.b.x - 0.15));
    EXPECT_NEAR(angle_distance(p.theta, radial), 0.0, 1e-12);
  }
}

TEST(GroundTruth, LineOrientationsAreZero) {
  const PhaseSet s = wavefront_set(LineFragment{0.3, 1.0}, 9);
  ASSERT_EQ(s.size(), 9u);
  for (const PhasePoint& p : s) {
    EXPECT_EQ(p.theta, 0.0);
    EXPECT_EQ(p.b.x, 0.0);
    EXPECT_LE(std::abs(p.b.y), 0.3 + 1e-15);
  }
}
