#include "geosep/separation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "geosep/parallel.hpp"

namespace geosep {

void validate_epsilon(double eps, bool override_epsilon) {
  if (!(eps > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (eps >= 0.25) throw std::invalid_argument("epsilon must be below 1/4");
  if (eps >= 1.0 / 64 && !override_epsilon)
    throw std::invalid_argument("epsilon " + std::to_string(eps) +
                                " is not below 1/64; pass the override flag to allow it");
}

double wavelet_threshold(int j, double eps) { return std::pow(2.0, eps * j); }
double curvelet_threshold(int j, double eps) { return std::pow(2.0, j * (0.25 - eps)); }

OneStepResult one_step_threshold(const SpectralImage& f_j, int j, const ThresholdParams& p,
                                 const FrameOptions& opt) {
  validate_epsilon(p.epsilon, p.override_epsilon);
  return one_step_threshold(f_j, j, wavelet_threshold(j, p.epsilon), curvelet_threshold(j, p.epsilon), opt);
}

OneStepResult one_step_threshold(const SpectralImage& f_j, int j, double t1, double t2,
                                 const FrameOptions& opt) {
  if (!(t1 >= 0.0) || !(t2 >= 0.0)) throw std::invalid_argument("thresholds must be non-negative");
  OneStepResult r;
  r.j = j;
  r.t1 = t1;
  r.t2 = t2;
  const FreqGrid& g = f_j.grid();
  r.wavelet = wavelet_analysis(f_j, j, opt);
  r.T1 = r.wavelet.threshold(t1);
  r.W = wavelet_synthesis(r.wavelet, &r.T1, g, opt);
  r.R = f_j - r.W;
  r.curvelet = curvelet_analysis(r.R, j, opt);
  r.T2 = r.curvelet.threshold(t2);
  r.C = curvelet_synthesis(r.curvelet, &r.T2, g, opt);
  return r;
}

double separation_error(const OneStepResult& out, const SpectralImage& P_j, const SpectralImage& C_j) {
  const double den = norm(P_j) + norm(C_j);
  if (den == 0.0) throw std::invalid_argument("degenerate scene: both components vanish");
  return (norm(out.W - P_j) + norm(out.C - C_j)) / den;
}

double residual_identity_check(const OneStepResult& out, const SpectralImage& P_j,
                               const SpectralImage& C_j, const std::vector<CurveletIndex>& probes,
                               const FrameOptions& opt) {
  if (probes.empty()) throw std::invalid_argument("residual identity needs at least one probe");
  const FreqGrid& g = out.R.grid();
  const CoefficientTable cP = wavelet_analysis(P_j, out.j, opt);
  const CoefficientTable cC = wavelet_analysis(C_j, out.j, opt);
  std::vector<double> err(probes.size());
  parallel_for(probes.size(), opt.threads, [&](std::size_t p) {
    const CurveletIndex& eta = probes[p];
    const Vec2 b = curvelet_position(eta);
    const double th = wedge_angle(eta.j, eta.l);
    FrameOptions serial = opt;
    serial.threads = 1;
    const CoefficientTable gram = wavelet_analysis(curvelet_atom(g, eta, opt.order), out.j, serial);
    cd rhs = curvelet_probe(C_j, eta.j, b, th, opt.order);
    for (std::size_t bi = 0; bi < gram.blocks.size(); ++bi) {
      const CoefficientBlock& G = gram.blocks[bi];
      for (std::size_t i = 0; i < G.values.size(); ++i) {
        const cd psi_gamma = std::conj(G.values[i]);
        if (out.T1.bits[bi][i]) rhs -= cC.blocks[bi].values[i] * psi_gamma;
        else rhs += cP.blocks[bi].values[i] * psi_gamma;
      }
    }
    err[p] = std::abs(curvelet_probe(out.R, eta.j, b, th, opt.order) - rhs);
  });
  return *std::max_element(err.begin(), err.end());
}

// ---- abstract ----

AbstractFrame::AbstractFrame(Eigen::MatrixXd columns) : phi_(std::move(columns)) {}

double AbstractFrame::parseval_error() const {
  const Eigen::MatrixXd s = phi_ * phi_.transpose();
  return (s - Eigen::MatrixXd::Identity(s.rows(), s.cols())).cwiseAbs().maxCoeff();
}

double AbstractFrame::max_norm() const { return phi_.colwise().norm().maxCoeff(); }
double AbstractFrame::min_norm() const { return phi_.colwise().norm().minCoeff(); }

namespace {

IndexFlags flags_at_least(const Eigen::VectorXd& v, double t) {
  IndexFlags f(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) f[i] = std::abs(v[i]) >= t;
  return f;
}

Eigen::VectorXd masked(const Eigen::VectorXd& v, const IndexFlags& f, bool keep) {
  Eigen::VectorXd out = v;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if ((f[i] != 0) != keep) out[i] = 0.0;
  return out;
}

}  // namespace

AbstractResult abstract_one_step(const AbstractFrame& phi1, const AbstractFrame& phi2,
                                 const Eigen::VectorXd& S, double t1, double t2) {
  if (phi1.dim() != S.size() || phi2.dim() != S.size())
    throw std::invalid_argument("frame dimension does not match signal length");
  if (!(t1 >= 0.0) || !(t2 >= 0.0)) throw std::invalid_argument("thresholds must be non-negative");
  AbstractResult r;
  r.c = phi1.matrix().transpose() * S;
  r.T1 = flags_at_least(r.c, t1);
  r.S1 = phi1.matrix() * masked(r.c, r.T1, true);
  const Eigen::VectorXd R = S - r.S1;
  r.d = phi2.matrix().transpose() * R;
  r.T2 = flags_at_least(r.d, t2);
  r.S2 = phi2.matrix() * masked(r.d, r.T2, true);
  return r;
}

double cluster_coherence(const AbstractFrame& phi2, const IndexFlags& T2, const AbstractFrame& phi1) {
  if (static_cast<int>(T2.size()) != phi2.size()) throw std::invalid_argument("index set size mismatch");
  if (phi1.dim() != phi2.dim()) throw std::invalid_argument("frames live in different spaces");
  double best = 0.0;
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(phi1.size());
  for (int j = 0; j < phi2.size(); ++j)
    if (T2[j]) acc += (phi1.matrix().transpose() * phi2.matrix().col(j)).cwiseAbs();
  if (acc.size()) best = acc.maxCoeff();
  return best;
}

ErrorBound error_bound(const AbstractFrame& phi1, const AbstractFrame& phi2,
                       const Eigen::VectorXd& S1_0, const Eigen::VectorXd& S2_0, double t1, double t2) {
  for (const AbstractFrame* f : {&phi1, &phi2})
    if (f->parseval_error() > 1e-8)
      throw std::invalid_argument("frame is not Parseval (error " + std::to_string(f->parseval_error()) + ")");
  const AbstractResult r = abstract_one_step(phi1, phi2, S1_0 + S2_0, t1, t2);
  ErrorBound b;
  b.lhs = (r.S1 - S1_0).norm() + (r.S2 - S2_0).norm();
  b.mu_c = cluster_coherence(phi2, r.T2, phi1);
  const Eigen::VectorXd c1 = phi1.matrix().transpose() * S1_0;
  const Eigen::VectorXd c2 = phi2.matrix().transpose() * S2_0;
  const Eigen::VectorXd x12 = phi1.matrix().transpose() * S2_0;
  b.delta = masked(c1, r.T1, false).lpNorm<1>() + masked(c2, r.T2, false).lpNorm<1>();
  b.cross = masked(x12, r.T1, true).lpNorm<1>();
  b.c = std::max(phi1.max_norm(), phi2.max_norm());
  b.rhs = b.c * ((1.0 + b.mu_c) * b.cross + (2.0 + b.mu_c) * b.delta);
  return b;
}

AbstractFrame harmonic_frame(int d, int n, int shift) {
  if (d < 1 || n < d) throw std::invalid_argument("harmonic frame needs n >= d >= 1");
  const int pairs = d / 2;
  const int kmax = (n - 1) / 2;  // frequencies 1..kmax avoid 0 and n/2
  if (pairs > kmax) throw std::invalid_argument("too few distinct frequencies for this (d, n)");
  Eigen::MatrixXd phi(d, n);
  const double a = std::sqrt(2.0 / n);
  for (int r = 0; r < pairs; ++r) {
    const int k = 1 + (r + shift) % kmax;
    for (int i = 0; i < n; ++i) {
      const double t = 2.0 * std::numbers::pi * k * i / n;
      phi(2 * r, i) = a * std::cos(t);
      phi(2 * r + 1, i) = a * std::sin(t);
    }
  }
  if (d % 2)
    for (int i = 0; i < n; ++i) phi(d - 1, i) = 1.0 / std::sqrt(static_cast<double>(n));
  return AbstractFrame(std::move(phi));
}

AbstractFrame rotated(const AbstractFrame& f, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd a(f.dim(), f.dim());
  for (int i = 0; i < a.rows(); ++i)
    for (int k = 0; k < a.cols(); ++k) a(i, k) = g(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR();
  for (int i = 0; i < q.cols(); ++i)
    if (r(i, i) < 0) q.col(i) = -q.col(i);
  return AbstractFrame(q * f.matrix());
}

Eigen::VectorXd spatial_vector(const SpectralImage& f) {
  const std::vector<double> s = to_spatial(f);
  const double h = f.grid().period() / f.grid().size;
  Eigen::VectorXd v(static_cast<Eigen::Index>(s.size()));
  for (std::size_t i = 0; i < s.size(); ++i) v[static_cast<Eigen::Index>(i)] = s[i] * h;
  return v;
}

AbstractFrame materialize(FrameKind kind, int j, const FreqGrid& g, int order) {
  const CoefficientTable layout = kind == FrameKind::wavelet ? wavelet_layout(j - 1, j + 1, g.oversample)
                                                             : curvelet_layout(j - 1, j + 1, g.oversample);
  Eigen::MatrixXd phi(static_cast<Eigen::Index>(g.count()), static_cast<Eigen::Index>(layout.count()));
  Eigen::Index col = 0;
  for (const auto& b : layout.blocks)
    for (std::size_t i = 0; i < b.values.size(); ++i) {
      if (!b.is_valid(i)) continue;
      const SpectralImage atom =
          kind == FrameKind::wavelet ? wavelet_atom(g, {b.scale, b.k1_of(i), b.k2_of(i)}, order)
                                     : curvelet_atom(g, {b.scale, b.wedge, b.k1_of(i), b.k2_of(i)}, order);
      phi.col(col++) = spatial_vector(atom);
    }
  return AbstractFrame(std::move(phi));
}

IndexFlags flatten(const CoefficientTable& t, const IndexMask& m) {
  IndexFlags out;
  for (std::size_t bi = 0; bi < t.blocks.size(); ++bi)
    for (std::size_t i = 0; i < t.blocks[bi].values.size(); ++i)
      if (t.blocks[bi].is_valid(i)) out.push_back(m.bits[bi][i]);
  return out;
}

}  // namespace geosep
