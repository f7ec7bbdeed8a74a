#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "geosep/coefficients.hpp"
#include "geosep/frames.hpp"
#include "geosep/grid.hpp"
#include "geosep/targets.hpp"

namespace geosep {

// ---- phase space ---------------------------------------------------------

// Position-orientation pair. Omnidirectional points stand for every
// orientation at b (point singularities), so the orientation term of the
// metric drops for them.
struct PhasePoint {
  Vec2 b;
  double theta = 0.0;  // in [0, pi)
  bool omni = false;
};
using PhaseSet = std::vector<PhasePoint>;

double reduce_angle(double theta);            // mod pi into [0, pi)
double angle_distance(double a, double b);    // geodesic distance on [0, pi) with wrap at pi
double phase_metric(const PhasePoint& p, const PhasePoint& q);

// max_{a in A} min_{b in B} d_PS(a, b). Throws on an empty set.
double phase_distance(const PhaseSet& A, const PhaseSet& B, int threads = 1);
// Same with B the wavefront set of a curve, evaluated by closest-point search.
double phase_distance(const PhaseSet& A, const Curve& curve, int threads = 1);

// Positions of T1 times orient_samples orientations pi m / orient_samples.
PhaseSet phase_projection(const std::vector<WaveletIndex>& T1, int orient_samples);
// One pair (b_eta, theta_eta) per index.
PhaseSet phase_projection(const std::vector<CurveletIndex>& T2);

// Wavefront sets: omnidirectional at each point; normal directions along a
// curve or the line fragment (samples equispaced in arc length).
PhaseSet wavefront_set(const PointConfig& p);
// Explicit samples of WF(P): each point with orientations pi m / samples.
PhaseSet wavefront_set(const PointConfig& p, int samples);
PhaseSet wavefront_set(const Curve& c, int samples);
PhaseSet wavefront_set(const LineFragment& w, int samples);

struct ClosestPoint {
  double t = 0.0;         // arc-length parameter
  double distance = 0.0;
};
// Nearest curve point: dense seeds, then local refinement.
ClosestPoint closest_point(const Curve& c, Vec2 x, int seeds = 1024);

// Neighbourhood of width c a^{1-eps'} and angular half-width sqrt(a) around
// the wavefront set of the line fragment (no curve) or of a curve.
struct TubeSpec {
  std::optional<Curve> curve;
  double rho = 0.3;        // fragment half-length parameter; the base is {0} x [-2 rho, 2 rho]
  double c = 1.0;
  double eps_prime = 0.005;
  double epsilon = 0.01;   // eps' must lie in (0, epsilon)
  double a = 1.0 / 256;    // scale parameter 2^-j
  double width() const;         // c * a^{1 - eps'}
  double angular_cap() const;   // sqrt(a)
};
void validate(const TubeSpec& t);
// Fraction of S inside the tube (0 for an empty S).
double tube_membership(const PhaseSet& S, const TubeSpec& tube);

// ---- statistics ----------------------------------------------------------

// Least-squares slope of log2(value) against j. Needs >= 3 entries, all > 0.
double decay_slope(const std::vector<std::pair<int, double>>& series);
// Spearman rank correlation (average ranks for ties).
double spearman(const std::vector<double>& x, const std::vector<double>& y);

// ---- coefficient diagnostics --------------------------------------------

// l1 mass of the valid coefficients outside T.
double relative_sparsity(const CoefficientTable& coeffs, const IndexMask& T);

// max over the wavelet lattice of scales j-1..j+1 of
// sum_{eta in T2} |<gamma_eta, psi_lambda>|. Kernel tables are tabulated in
// the continuum and interpolated; couplings beyond the reach (in Nyquist
// lengths along the normal and the tangent) are dropped. With the defaults the
// result is within about 2e-3 relative of the exact torus value.
struct CoherenceOptions {
  int order = 3;
  int threads = 1;
  double radial_reach = 16.0;
  double transverse_reach = 16.0;
};
double cluster_coherence(const std::vector<CurveletIndex>& T2, int j, int oversample,
                         const CoherenceOptions& opt = {});

// Largest |coefficient| among the lattice atoms of scale s next to b: the
// 2 x 2 surrounding positions, and for curvelets the two wedges closest to
// theta.
double wavelet_coefficient_near(const CoefficientTable& t, int s, Vec2 b);
double curvelet_coefficient_near(const CoefficientTable& t, int s, Vec2 b, double theta);

// ---- wavefront probes ----------------------------------------------------

enum class ProbeClass { singular, smooth, inconclusive };
const char* to_string(ProbeClass c);
// Positive slope beyond the dead zone is singular, negative beyond it smooth.
ProbeClass classify_slope(double slope, double dead_zone = 0.1);

struct ProbeResult {
  std::vector<std::pair<int, double>> values;  // (j, |<piece_j, atom>|)
  double slope = 0.0;
  ProbeClass cls = ProbeClass::inconclusive;
};

struct ScalePiece {
  int j = 0;
  const SpectralImage* piece = nullptr;
};

// |<piece_j, atom_{j, b, theta}>| per scale and its decay slope. Omnidirectional
// points use the wavelet at b. Needs >= 4 scales; throws when a value is 0
// (degenerate series).
ProbeResult wavefront_probe(const std::vector<ScalePiece>& pieces, const PhasePoint& p,
                            int order = 3);
// |<piece, atom_{j, b, theta}>| for one scale.
double probe_response(const SpectralImage& piece, int j, const PhasePoint& p, int order = 3);
// Slope and class of a precomputed series, with the same checks.
ProbeResult probe_series(std::vector<std::pair<int, double>> values);

}  // namespace geosep
