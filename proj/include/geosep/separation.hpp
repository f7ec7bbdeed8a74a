#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "geosep/coefficients.hpp"
#include "geosep/frames.hpp"
#include "geosep/grid.hpp"

namespace geosep {

struct ThresholdParams {
  double epsilon = 0.01;
  bool override_epsilon = false;  // permit epsilon >= 1/64
};

// Throws unless 0 < eps < 1/64, or 0 < eps < 1/4 with the override set.
void validate_epsilon(double eps, bool override_epsilon);
double wavelet_threshold(int j, double eps);   // 2^{eps j}
double curvelet_threshold(int j, double eps);  // 2^{j (1/4 - eps)}

struct OneStepResult {
  int j = 0;
  double t1 = 0.0, t2 = 0.0;
  CoefficientTable wavelet;   // <f_j, psi>
  IndexMask T1;
  CoefficientTable curvelet;  // <R_j, gamma>
  IndexMask T2;
  SpectralImage W;  // point part
  SpectralImage R;  // residual f_j - W
  SpectralImage C;  // curve part
};

// One-step thresholding of a subband f_j with the thresholds of scale j.
OneStepResult one_step_threshold(const SpectralImage& f_j, int j, const ThresholdParams& p,
                                 const FrameOptions& opt = {});
// Same with explicit thresholds.
OneStepResult one_step_threshold(const SpectralImage& f_j, int j, double t1, double t2,
                                 const FrameOptions& opt = {});

// (||W - P_j|| + ||C - C_j||) / (||P_j|| + ||C_j||). Throws when both
// components vanish.
double separation_error(const OneStepResult& out, const SpectralImage& P_j, const SpectralImage& C_j);

// Largest |<R_j, gamma> - RHS| over the probes, where RHS expands the residual
// through the cross-Gramian:
//   <C_j, gamma> - sum_{T1} <C_j, psi><psi, gamma> + sum_{T1^c} <P_j, psi><psi, gamma>.
// `out` must come from f_j = P_j + C_j.
double residual_identity_check(const OneStepResult& out, const SpectralImage& P_j,
                               const SpectralImage& C_j, const std::vector<CurveletIndex>& probes,
                               const FrameOptions& opt = {});

// ---- abstract setting ----------------------------------------------------

// Frame of n vectors in R^d stored as the columns of a d x n matrix.
class AbstractFrame {
 public:
  AbstractFrame() = default;
  explicit AbstractFrame(Eigen::MatrixXd columns);
  const Eigen::MatrixXd& matrix() const { return phi_; }
  int dim() const { return static_cast<int>(phi_.rows()); }
  int size() const { return static_cast<int>(phi_.cols()); }
  double parseval_error() const;  // max |Phi Phi^T - I|
  double max_norm() const;
  double min_norm() const;

 private:
  Eigen::MatrixXd phi_;
};

using IndexFlags = std::vector<std::uint8_t>;

struct AbstractResult {
  Eigen::VectorXd c, d;  // Phi1^T S and Phi2^T R
  IndexFlags T1, T2;
  Eigen::VectorXd S1, S2;
};

AbstractResult abstract_one_step(const AbstractFrame& phi1, const AbstractFrame& phi2,
                                 const Eigen::VectorXd& S, double t1, double t2);

// max_i sum_{j in T2} |<phi2_j, phi1_i>|.
double cluster_coherence(const AbstractFrame& phi2, const IndexFlags& T2, const AbstractFrame& phi1);

struct ErrorBound {
  double lhs = 0.0;       // ||S1* - S1^0|| + ||S2* - S2^0||
  double rhs = 0.0;       // c [(1 + mu) cross + (2 + mu) delta]
  double mu_c = 0.0;
  double delta = 0.0;     // ||1_{T1^c} Phi1^T S1^0||_1 + ||1_{T2^c} Phi2^T S2^0||_1
  double cross = 0.0;     // ||1_{T1} Phi1^T S2^0||_1
  double c = 0.0;         // frame-vector norm (max over both frames)
  bool holds() const { return lhs <= rhs * (1.0 + 1e-12) + 1e-12; }
};

// Runs the abstract algorithm on S = S1^0 + S2^0 and evaluates both sides of
// the error estimate. Throws if either frame is not Parseval to 1e-8.
ErrorBound error_bound(const AbstractFrame& phi1, const AbstractFrame& phi2,
                       const Eigen::VectorXd& S1_0, const Eigen::VectorXd& S2_0, double t1,
                       double t2);

// Real harmonic frame of n vectors in R^d: equal-norm (sqrt(d/n)) and Parseval.
// `shift` offsets the frequencies used, giving distinct frames for the same d, n.
AbstractFrame harmonic_frame(int d, int n, int shift = 0);
// Q * Phi for a Haar-random orthogonal Q.
AbstractFrame rotated(const AbstractFrame& f, std::mt19937_64& rng);

// Columns are the spatial samples (times the cell size) of every atom in the
// layout of scales j-1..j+1 on grid g, in table order. Inner products of
// these real vectors equal the torus inner products of the atoms.
AbstractFrame materialize(FrameKind kind, int j, const FreqGrid& g, int order = 3);
// Spatial vector of a spectrum in the same coordinates.
Eigen::VectorXd spatial_vector(const SpectralImage& f);
// Flattened index flags of a mask over valid entries, in table order.
IndexFlags flatten(const CoefficientTable& t, const IndexMask& m);

}  // namespace geosep
