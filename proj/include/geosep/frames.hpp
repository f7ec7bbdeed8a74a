#pragma once

#include <vector>

#include "geosep/coefficients.hpp"
#include "geosep/grid.hpp"

namespace geosep {

struct FrameOptions {
  int order = 3;        // window transition order
  int threads = 1;      // worker count; results do not depend on it
  int nufft_width = 8;  // Gaussian spreading half-width (about 3e-8 relative error)
  // Evaluate curvelet coefficients by direct sums. Chosen automatically for
  // grids of at most `direct_below` nodes per axis.
  bool force_direct = false;
  int direct_below = 64;
};

// ---- lattice geometry ----------------------------------------------------

int wedge_count(int s);          // 2^floor(s/2)
double wedge_angle(int s, int l);  // pi l / wedge_count(s)
double wedge_spacing(int s);     // pi / wedge_count(s)
// Lattice steps of the rotated curvelet lattice: radial 2^-s, transverse
// 2^-s/2 * h2(s) with h2 = 2^(floor(s/2) - s/2) / 2, dense enough that both
// antipodal halves of a wedge fit in one period of the dual lattice.
double radial_step(int s);
double transverse_step(int s);

Vec2 wavelet_position(const WaveletIndex& i);
Vec2 curvelet_position(const CurveletIndex& i);

// Angular window of wedge l at direction omega (orientation mod pi).
double wedge_window(int s, int l, double omega, int order = 3);
// Same profile centred at an arbitrary orientation theta.
double orientation_window(int s, double theta, double omega, int order = 3);

// Atom spectra at a frequency xi.
cd wavelet_atom_value(const WaveletIndex& i, double xi1, double xi2, int order = 3);
cd curvelet_atom_value(const CurveletIndex& i, double xi1, double xi2, int order = 3);
SpectralImage wavelet_atom(const FreqGrid& g, const WaveletIndex& i, int order = 3);
SpectralImage curvelet_atom(const FreqGrid& g, const CurveletIndex& i, int order = 3);

// Inner products with atoms at continuous parameters (direct sums).
cd wavelet_probe(const SpectralImage& f, int s, Vec2 b, int order = 3);
cd curvelet_probe(const SpectralImage& f, int s, Vec2 b, double theta, int order = 3);

// <gamma_eta, psi_lambda> on grid g; exactly 0 when the scales differ by >= 2
// because the radial supports are disjoint.
cd cross_gram(const CurveletIndex& eta, const WaveletIndex& lambda, const FreqGrid& g,
              int order = 3);

// ---- analysis / synthesis ------------------------------------------------

// Coefficients at scales s_lo..s_hi. The nominal j is (s_lo + s_hi) / 2.
CoefficientTable wavelet_analysis(const SpectralImage& f, int s_lo, int s_hi,
                                  const FrameOptions& opt = {});
CoefficientTable curvelet_analysis(const SpectralImage& f, int s_lo, int s_hi,
                                   const FrameOptions& opt = {});
// Scales j-1..j+1, the ones that see the subband of scale j.
CoefficientTable wavelet_analysis(const SpectralImage& f, int j, const FrameOptions& opt = {});
CoefficientTable curvelet_analysis(const SpectralImage& f, int j, const FrameOptions& opt = {});

// Sum over the support of c * atom, sampled on grid g. A null mask means all.
SpectralImage wavelet_synthesis(const CoefficientTable& c, const IndexMask* support,
                                const FreqGrid& g, const FrameOptions& opt = {});
SpectralImage curvelet_synthesis(const CoefficientTable& c, const IndexMask* support,
                                 const FreqGrid& g, const FrameOptions& opt = {});
// Index-list forms; an index absent from the table is an error naming it.
SpectralImage wavelet_synthesis(const CoefficientTable& c, const std::vector<WaveletIndex>& support,
                                const FreqGrid& g, const FrameOptions& opt = {});
SpectralImage curvelet_synthesis(const CoefficientTable& c,
                                 const std::vector<CurveletIndex>& support, const FreqGrid& g,
                                 const FrameOptions& opt = {});

// Empty tables (zero values) with the layout analysis would produce.
CoefficientTable wavelet_layout(int s_lo, int s_hi, int oversample);
CoefficientTable curvelet_layout(int s_lo, int s_hi, int oversample);

}  // namespace geosep
