#include "geosep/frames.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

#include "geosep/fft.hpp"
#include "geosep/nufft.hpp"
#include "geosep/parallel.hpp"
#include "geosep/windows.hpp"

namespace geosep {

namespace {

constexpr double kPi = std::numbers::pi;

// Orientation difference reduced to [-pi/2, pi/2).
double wrap_half_turn(double x) {
  x = std::fmod(x + kPi / 2, kPi);
  if (x < 0) x += kPi;
  return x - kPi / 2;
}

double transverse_factor(int s) { return std::ldexp(1.0, s / 2) / std::pow(2.0, 0.5 * s) / 2.0; }

double curvelet_amplitude(int s) {
  return std::sqrt(transverse_factor(s)) * std::pow(2.0, -0.75 * s);
}

void check_scale(int s) {
  if (s < 1 || s > 14) throw std::invalid_argument("scale out of range: " + std::to_string(s));
}

void check_grid_covers(const FreqGrid& g, int s_hi) {
  if (std::ldexp(1.0, s_hi + 1) > g.half_width())
    throw std::invalid_argument("grid of half-width " + std::to_string(g.half_width()) +
                                " does not cover scale " + std::to_string(s_hi));
}

int mod(int a, int n) { return ((a % n) + n) % n; }

// Index range [lo, hi) per axis of the box |xi_i| <= 2^(s+1).
std::pair<int, int> support_range(const FreqGrid& g, int s) {
  const int r = static_cast<int>(std::ceil(std::ldexp(1.0, s + 1) / g.spacing()));
  return {std::max(0, g.size / 2 - r), std::min(g.size, g.size / 2 + r + 1)};
}

struct WedgeNode {
  std::uint32_t index;  // flat grid index
  double weight;        // atom amplitude without the phase
};

// Grid nodes of each wedge of scale s with the window product as weight.
std::vector<std::vector<WedgeNode>> wedge_nodes(const FreqGrid& g, int s, int order) {
  const int nw = wedge_count(s);
  const double dth = wedge_spacing(s);
  const RadialWindow w(order);
  const AngularBump v(order);
  const double amp = curvelet_amplitude(s);
  const double lo = std::ldexp(1.0, s - 1), hi = std::ldexp(1.0, s + 1);
  const double inv = std::ldexp(1.0, -s);
  std::vector<std::vector<WedgeNode>> out(nw);
  const int reach = std::min(g.size / 2, static_cast<int>(std::ceil(hi / g.spacing())) + 1);
  for (int i2 = g.size / 2 - reach; i2 < g.size / 2 + reach; ++i2) {
    const double x2 = g.xi(i2);
    for (int i1 = g.size / 2 - reach; i1 < g.size / 2 + reach; ++i1) {
      const double x1 = g.xi(i1);
      const double r = std::hypot(x1, x2);
      if (r <= lo || r >= hi) continue;
      const double wr = w(r * inv);
      if (wr == 0.0) continue;
      const auto idx = static_cast<std::uint32_t>(g.index(i1, i2));
      if (nw == 1) {
        out[0].push_back({idx, amp * wr});
        continue;
      }
      double om = std::atan2(x2, x1);
      om = std::fmod(om, kPi);
      if (om < 0) om += kPi;
      const int l0 = std::min(static_cast<int>(om / dth), nw - 1);
      for (int l : {l0, (l0 + 1) % nw}) {
        const double a = v(wrap_half_turn(om - wedge_angle(s, l)) / dth);
        if (a != 0.0) out[l].push_back({idx, amp * wr * a});
      }
    }
  }
  return out;
}

CoefficientBlock curvelet_block_layout(int s, int l, int oversample) {
  CoefficientBlock b;
  b.scale = s;
  b.wedge = l;
  const double th = wedge_angle(s, l);
  const double half = 0.5 * oversample;
  const double e = half * (std::abs(std::cos(th)) + std::abs(std::sin(th)));
  b.n1 = 2 * static_cast<int>(std::ceil(e / radial_step(s))) + 2;
  b.n2 = 2 * static_cast<int>(std::ceil(e / transverse_step(s))) + 2;
  b.values.assign(static_cast<std::size_t>(b.n1) * b.n2, 0.0);
  b.valid.assign(b.values.size(), 0);
  for (std::size_t i = 0; i < b.values.size(); ++i) {
    const Vec2 p = curvelet_position({s, l, b.k1_of(i), b.k2_of(i)});
    b.valid[i] = p.x >= -half && p.x < half && p.y >= -half && p.y < half;
  }
  return b;
}

// Rotated, scaled frequency coordinates of a node: b_k . xi = k . alpha.
void alpha_of(const FreqGrid& g, std::uint32_t idx, double c, double sn, double u1, double u2,
              double& a1, double& a2) {
  const double x1 = g.xi(static_cast<int>(idx % g.size));
  const double x2 = g.xi(static_cast<int>(idx / g.size));
  a1 = u1 * (c * x1 + sn * x2);
  a2 = u2 * (-sn * x1 + c * x2);
}

bool use_direct(const FreqGrid& g, const FrameOptions& opt) {
  return opt.force_direct || g.size <= opt.direct_below;
}

void check_mask(const CoefficientTable& c, const IndexMask* m) {
  if (!m) return;
  if (m->bits.size() != c.blocks.size())
    throw std::invalid_argument("support mask does not match coefficient layout");
  for (std::size_t i = 0; i < c.blocks.size(); ++i)
    if (m->bits[i].size() != c.blocks[i].values.size())
      throw std::invalid_argument("support mask does not match coefficient layout");
}

}  // namespace

int wedge_count(int s) { return 1 << (s / 2); }
double wedge_angle(int s, int l) { return kPi * l / wedge_count(s); }
double wedge_spacing(int s) { return kPi / wedge_count(s); }
double radial_step(int s) { return std::ldexp(1.0, -s); }
double transverse_step(int s) { return std::pow(2.0, -0.5 * s) * transverse_factor(s); }

Vec2 wavelet_position(const WaveletIndex& i) {
  return {std::ldexp(static_cast<double>(i.k1), -i.j), std::ldexp(static_cast<double>(i.k2), -i.j)};
}

Vec2 curvelet_position(const CurveletIndex& i) {
  const double th = wedge_angle(i.j, i.l);
  const double u1 = i.k1 * radial_step(i.j);
  const double u2 = i.k2 * transverse_step(i.j);
  return {std::cos(th) * u1 - std::sin(th) * u2, std::sin(th) * u1 + std::cos(th) * u2};
}

double wedge_window(int s, int l, double omega, int order) {
  return orientation_window(s, wedge_angle(s, l), omega, order);
}

double orientation_window(int s, double theta, double omega, int order) {
  if (wedge_count(s) == 1) return 1.0;
  return AngularBump(order)(wrap_half_turn(omega - theta) / wedge_spacing(s));
}

cd wavelet_atom_value(const WaveletIndex& i, double xi1, double xi2, int order) {
  const double w = RadialWindow(order)(std::ldexp(std::hypot(xi1, xi2), -i.j));
  if (w == 0.0) return 0.0;
  const Vec2 b = wavelet_position(i);
  return std::ldexp(w, -i.j) * std::polar(1.0, -(b.x * xi1 + b.y * xi2));
}

cd curvelet_atom_value(const CurveletIndex& i, double xi1, double xi2, int order) {
  const double w = RadialWindow(order)(std::ldexp(std::hypot(xi1, xi2), -i.j));
  if (w == 0.0) return 0.0;
  const double v = wedge_window(i.j, i.l, std::atan2(xi2, xi1), order);
  if (v == 0.0) return 0.0;
  const Vec2 b = curvelet_position(i);
  return curvelet_amplitude(i.j) * w * v * std::polar(1.0, -(b.x * xi1 + b.y * xi2));
}

SpectralImage wavelet_atom(const FreqGrid& g, const WaveletIndex& i, int order) {
  SpectralImage out(g);
  for (int i2 = 0; i2 < g.size; ++i2)
    for (int i1 = 0; i1 < g.size; ++i1) out.at(i1, i2) = wavelet_atom_value(i, g.xi(i1), g.xi(i2), order);
  return out;
}

SpectralImage curvelet_atom(const FreqGrid& g, const CurveletIndex& i, int order) {
  SpectralImage out(g);
  for (int i2 = 0; i2 < g.size; ++i2)
    for (int i1 = 0; i1 < g.size; ++i1)
      out.at(i1, i2) = curvelet_atom_value(i, g.xi(i1), g.xi(i2), order);
  return out;
}

cd wavelet_probe(const SpectralImage& f, int s, Vec2 b, int order) {
  const FreqGrid& g = f.grid();
  check_grid_covers(g, s);
  const RadialWindow w(order);
  const double h = g.spacing() / (2 * kPi);
  const auto [lo, hi] = support_range(g, s);
  cd acc = 0.0;
  for (int i2 = lo; i2 < hi; ++i2) {
    const double x2 = g.xi(i2);
    for (int i1 = lo; i1 < hi; ++i1) {
      const double x1 = g.xi(i1);
      const double wr = w(std::ldexp(std::hypot(x1, x2), -s));
      if (wr != 0.0) acc += f.at(i1, i2) * wr * std::polar(1.0, b.x * x1 + b.y * x2);
    }
  }
  return acc * std::ldexp(h * h, -s);
}

cd curvelet_probe(const SpectralImage& f, int s, Vec2 b, double theta, int order) {
  const FreqGrid& g = f.grid();
  check_grid_covers(g, s);
  const RadialWindow w(order);
  const double h = g.spacing() / (2 * kPi);
  const auto [lo, hi] = support_range(g, s);
  cd acc = 0.0;
  for (int i2 = lo; i2 < hi; ++i2) {
    const double x2 = g.xi(i2);
    for (int i1 = lo; i1 < hi; ++i1) {
      const double x1 = g.xi(i1);
      const double wr = w(std::ldexp(std::hypot(x1, x2), -s));
      if (wr == 0.0) continue;
      const double v = orientation_window(s, theta, std::atan2(x2, x1), order);
      if (v != 0.0) acc += f.at(i1, i2) * (wr * v) * std::polar(1.0, b.x * x1 + b.y * x2);
    }
  }
  return acc * (curvelet_amplitude(s) * h * h);
}

cd cross_gram(const CurveletIndex& eta, const WaveletIndex& lambda, const FreqGrid& g, int order) {
  if (std::abs(eta.j - lambda.j) >= 2) return 0.0;
  check_grid_covers(g, std::max(eta.j, lambda.j));
  const double h = g.spacing() / (2 * kPi);
  const auto [lo, hi] = support_range(g, std::min(eta.j, lambda.j));
  cd acc = 0.0;
  for (int i2 = lo; i2 < hi; ++i2)
    for (int i1 = lo; i1 < hi; ++i1) {
      const double x1 = g.xi(i1), x2 = g.xi(i2);
      const cd a = curvelet_atom_value(eta, x1, x2, order);
      if (a == cd(0.0)) continue;
      acc += a * std::conj(wavelet_atom_value(lambda, x1, x2, order));
    }
  return acc * (h * h);
}

// ---- layouts ----

CoefficientTable wavelet_layout(int s_lo, int s_hi, int oversample) {
  if (s_lo > s_hi) throw std::invalid_argument("empty scale range");
  CoefficientTable t;
  t.kind = FrameKind::wavelet;
  t.j = (s_lo + s_hi) / 2;
  t.oversample = oversample;
  for (int s = s_lo; s <= s_hi; ++s) {
    check_scale(s);
    CoefficientBlock b;
    b.scale = s;
    b.n1 = b.n2 = oversample << s;
    b.values.assign(static_cast<std::size_t>(b.n1) * b.n2, 0.0);
    t.blocks.push_back(std::move(b));
  }
  return t;
}

CoefficientTable curvelet_layout(int s_lo, int s_hi, int oversample) {
  if (s_lo > s_hi) throw std::invalid_argument("empty scale range");
  CoefficientTable t;
  t.kind = FrameKind::curvelet;
  t.j = (s_lo + s_hi) / 2;
  t.oversample = oversample;
  for (int s = s_lo; s <= s_hi; ++s) {
    check_scale(s);
    for (int l = 0; l < wedge_count(s); ++l) t.blocks.push_back(curvelet_block_layout(s, l, oversample));
  }
  return t;
}

// ---- wavelets ----

CoefficientTable wavelet_analysis(const SpectralImage& f, int s_lo, int s_hi, const FrameOptions& opt) {
  const FreqGrid& g = f.grid();
  check_grid_covers(g, s_hi);
  CoefficientTable t = wavelet_layout(s_lo, s_hi, g.oversample);
  const RadialWindow w(opt.order);
  const double h = g.spacing() / (2 * kPi);
  parallel_for(t.blocks.size(), opt.threads, [&](std::size_t bi) {
    CoefficientBlock& b = t.blocks[bi];
    const int s = b.scale, n = b.n1;
    FftBuffer buf(static_cast<std::size_t>(n) * n);
    for (int i2 = 0; i2 < g.size; ++i2) {
      const double x2 = g.xi(i2);
      for (int i1 = 0; i1 < g.size; ++i1) {
        const double wr = w(std::ldexp(std::hypot(g.xi(i1), x2), -s));
        if (wr == 0.0) continue;
        buf[static_cast<std::size_t>(mod(i2 - g.size / 2, n)) * n + mod(i1 - g.size / 2, n)] =
            f.at(i1, i2) * wr;
      }
    }
    fft2d(buf, n, n, +1);
    const double scale = std::ldexp(h * h, -s);
    for (int k2 = -n / 2; k2 < n / 2; ++k2)
      for (int k1 = -n / 2; k1 < n / 2; ++k1)
        b.values[b.index(k1, k2)] = buf[static_cast<std::size_t>(mod(k2, n)) * n + mod(k1, n)] * scale;
  });
  return t;
}

CoefficientTable wavelet_analysis(const SpectralImage& f, int j, const FrameOptions& opt) {
  CoefficientTable t = wavelet_analysis(f, j - 1, j + 1, opt);
  t.j = j;
  return t;
}

SpectralImage wavelet_synthesis(const CoefficientTable& c, const IndexMask* support,
                                const FreqGrid& g, const FrameOptions& opt) {
  if (c.kind != FrameKind::wavelet) throw std::invalid_argument("wavelet_synthesis: not a wavelet table");
  check_mask(c, support);
  for (const auto& b : c.blocks) check_grid_covers(g, b.scale);
  if (g.oversample != c.oversample) throw std::invalid_argument("grid period differs from table");
  const RadialWindow w(opt.order);
  std::vector<FftBuffer> spectra(c.blocks.size());
  parallel_for(c.blocks.size(), opt.threads, [&](std::size_t bi) {
    const CoefficientBlock& b = c.blocks[bi];
    const int n = b.n1;
    FftBuffer buf(static_cast<std::size_t>(n) * n);
    for (std::size_t i = 0; i < b.values.size(); ++i)
      if (!support || support->bits[bi][i])
        buf[static_cast<std::size_t>(mod(b.k2_of(i), n)) * n + mod(b.k1_of(i), n)] = b.values[i];
    fft2d(buf, n, n, -1);
    spectra[bi] = std::move(buf);
  });
  SpectralImage out(g);
  for (std::size_t bi = 0; bi < c.blocks.size(); ++bi) {
    const int s = c.blocks[bi].scale, n = c.blocks[bi].n1;
    for (int i2 = 0; i2 < g.size; ++i2) {
      const double x2 = g.xi(i2);
      for (int i1 = 0; i1 < g.size; ++i1) {
        const double wr = w(std::ldexp(std::hypot(g.xi(i1), x2), -s));
        if (wr == 0.0) continue;
        out.at(i1, i2) += std::ldexp(wr, -s) *
            spectra[bi][static_cast<std::size_t>(mod(i2 - g.size / 2, n)) * n + mod(i1 - g.size / 2, n)];
      }
    }
  }
  return out;
}

SpectralImage wavelet_synthesis(const CoefficientTable& c, const std::vector<WaveletIndex>& support,
                                const FreqGrid& g, const FrameOptions& opt) {
  const IndexMask m = c.mask_of(support);
  return wavelet_synthesis(c, &m, g, opt);
}

// ---- curvelets ----

CoefficientTable curvelet_analysis(const SpectralImage& f, int s_lo, int s_hi, const FrameOptions& opt) {
  const FreqGrid& g = f.grid();
  check_grid_covers(g, s_hi);
  CoefficientTable t = curvelet_layout(s_lo, s_hi, g.oversample);
  const double h = g.spacing() / (2 * kPi);
  const bool direct = use_direct(g, opt);
  for (int s = s_lo; s <= s_hi; ++s) {
    const auto nodes = wedge_nodes(g, s, opt.order);
    std::vector<std::size_t> blocks;
    for (std::size_t bi = 0; bi < t.blocks.size(); ++bi)
      if (t.blocks[bi].scale == s) blocks.push_back(bi);
    parallel_for(blocks.size(), opt.threads, [&](std::size_t task) {
      CoefficientBlock& b = t.blocks[blocks[task]];
      const auto& wn = nodes[b.wedge];
      const double th = wedge_angle(s, b.wedge), c = std::cos(th), sn = std::sin(th);
      const double u1 = radial_step(s), u2 = transverse_step(s);
      std::vector<double> a1(wn.size()), a2(wn.size());
      std::vector<cd> val(wn.size());
      for (std::size_t m = 0; m < wn.size(); ++m) {
        alpha_of(g, wn[m].index, c, sn, u1, u2, a1[m], a2[m]);
        val[m] = f.values()[wn[m].index] * wn[m].weight;
      }
      if (direct) {
        for (std::size_t i = 0; i < b.values.size(); ++i) {
          if (!b.valid[i]) continue;
          const int k1 = b.k1_of(i), k2 = b.k2_of(i);
          cd acc = 0.0;
          for (std::size_t m = 0; m < wn.size(); ++m) acc += val[m] * std::polar(1.0, k1 * a1[m] + k2 * a2[m]);
          b.values[i] = acc * (h * h);
        }
      } else {
        Nufft2d nu(b.n1, b.n2, opt.nufft_width);
        std::vector<cd> out;
        nu.type1(a1, a2, val, out);
        for (std::size_t i = 0; i < b.values.size(); ++i) b.values[i] = b.valid[i] ? out[i] * (h * h) : 0.0;
      }
    });
  }
  return t;
}

CoefficientTable curvelet_analysis(const SpectralImage& f, int j, const FrameOptions& opt) {
  CoefficientTable t = curvelet_analysis(f, j - 1, j + 1, opt);
  t.j = j;
  return t;
}

SpectralImage curvelet_synthesis(const CoefficientTable& c, const IndexMask* support,
                                 const FreqGrid& g, const FrameOptions& opt) {
  if (c.kind != FrameKind::curvelet) throw std::invalid_argument("curvelet_synthesis: not a curvelet table");
  check_mask(c, support);
  if (g.oversample != c.oversample) throw std::invalid_argument("grid period differs from table");
  SpectralImage out(g);
  const bool direct = use_direct(g, opt);
  int s_lo = 99, s_hi = -1;
  for (const auto& b : c.blocks) s_lo = std::min(s_lo, b.scale), s_hi = std::max(s_hi, b.scale);
  if (s_hi < 0) return out;
  check_grid_covers(g, s_hi);
  for (int s = s_lo; s <= s_hi; ++s) {
    const auto nodes = wedge_nodes(g, s, opt.order);
    std::vector<std::size_t> blocks;
    for (std::size_t bi = 0; bi < c.blocks.size(); ++bi) {
      if (c.blocks[bi].scale != s) continue;
      bool any = false;
      const auto& b = c.blocks[bi];
      for (std::size_t i = 0; i < b.values.size() && !any; ++i)
        any = b.valid[i] && (!support || support->bits[bi][i]) && b.values[i] != cd(0.0);
      if (any) blocks.push_back(bi);
    }
    const std::size_t batch = std::max(1, opt.threads);
    for (std::size_t start = 0; start < blocks.size(); start += batch) {
      const std::size_t count = std::min(batch, blocks.size() - start);
      std::vector<std::vector<cd>> contrib(count);
      parallel_for(count, opt.threads, [&](std::size_t task) {
        const std::size_t bi = blocks[start + task];
        const CoefficientBlock& b = c.blocks[bi];
        const auto& wn = nodes[b.wedge];
        const double th = wedge_angle(s, b.wedge), cs = std::cos(th), sn = std::sin(th);
        const double u1 = radial_step(s), u2 = transverse_step(s);
        std::vector<double> a1(wn.size()), a2(wn.size());
        for (std::size_t m = 0; m < wn.size(); ++m) alpha_of(g, wn[m].index, cs, sn, u1, u2, a1[m], a2[m]);
        std::vector<cd> coef(b.values.size(), 0.0);
        for (std::size_t i = 0; i < b.values.size(); ++i)
          if (b.valid[i] && (!support || support->bits[bi][i])) coef[i] = b.values[i];
        std::vector<cd>& res = contrib[task];
        if (direct) {
          res.assign(wn.size(), 0.0);
          for (std::size_t i = 0; i < coef.size(); ++i) {
            if (coef[i] == cd(0.0)) continue;
            const int k1 = b.k1_of(i), k2 = b.k2_of(i);
            for (std::size_t m = 0; m < wn.size(); ++m) res[m] += coef[i] * std::polar(1.0, -(k1 * a1[m] + k2 * a2[m]));
          }
        } else {
          Nufft2d nu(b.n1, b.n2, opt.nufft_width);
          nu.type2(a1, a2, coef, res);
        }
        for (std::size_t m = 0; m < wn.size(); ++m) res[m] *= wn[m].weight;
      });
      for (std::size_t task = 0; task < count; ++task) {
        const auto& wn = nodes[c.blocks[blocks[start + task]].wedge];
        for (std::size_t m = 0; m < wn.size(); ++m) out.values()[wn[m].index] += contrib[task][m];
      }
    }
  }
  return out;
}

SpectralImage curvelet_synthesis(const CoefficientTable& c, const std::vector<CurveletIndex>& support,
                                 const FreqGrid& g, const FrameOptions& opt) {
  const IndexMask m = c.mask_of(support);
  return curvelet_synthesis(c, &m, g, opt);
}

}  // namespace geosep
