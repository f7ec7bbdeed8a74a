#include "geosep/coefficients.hpp"

#include <cmath>
#include <stdexcept>

namespace geosep {

std::string to_string(const WaveletIndex& i) {
  return "wavelet(j=" + std::to_string(i.j) + ", k=(" + std::to_string(i.k1) + "," +
         std::to_string(i.k2) + "))";
}

std::string to_string(const CurveletIndex& i) {
  return "curvelet(j=" + std::to_string(i.j) + ", l=" + std::to_string(i.l) + ", k=(" +
         std::to_string(i.k1) + "," + std::to_string(i.k2) + "))";
}

bool CoefficientBlock::contains(int k1, int k2) const {
  if (k1 < -n1 / 2 || k1 >= n1 - n1 / 2 || k2 < -n2 / 2 || k2 >= n2 - n2 / 2) return false;
  return is_valid(index(k1, k2));
}

std::size_t IndexMask::count() const {
  std::size_t n = 0;
  for (const auto& b : bits)
    for (auto v : b) n += v;
  return n;
}

const CoefficientBlock* CoefficientTable::find(int scale, int wedge) const {
  for (const auto& b : blocks)
    if (b.scale == scale && b.wedge == wedge) return &b;
  return nullptr;
}

CoefficientBlock* CoefficientTable::find(int scale, int wedge) {
  for (auto& b : blocks)
    if (b.scale == scale && b.wedge == wedge) return &b;
  return nullptr;
}

cd CoefficientTable::at(const WaveletIndex& i) const {
  const CoefficientBlock* b = kind == FrameKind::wavelet ? find(i.j) : nullptr;
  if (!b || !b->contains(i.k1, i.k2))
    throw std::out_of_range("unknown index " + to_string(i));
  return b->values[b->index(i.k1, i.k2)];
}

cd CoefficientTable::at(const CurveletIndex& i) const {
  const CoefficientBlock* b = kind == FrameKind::curvelet ? find(i.j, i.l) : nullptr;
  if (!b || !b->contains(i.k1, i.k2))
    throw std::out_of_range("unknown index " + to_string(i));
  return b->values[b->index(i.k1, i.k2)];
}

std::size_t CoefficientTable::count() const {
  std::size_t n = 0;
  for (const auto& b : blocks) {
    if (b.valid.empty())
      n += b.values.size();
    else
      for (auto v : b.valid) n += v;
  }
  return n;
}

IndexMask CoefficientTable::empty_mask() const {
  IndexMask m;
  for (const auto& b : blocks) m.bits.emplace_back(b.values.size(), 0);
  return m;
}

IndexMask CoefficientTable::full_mask() const {
  IndexMask m;
  for (const auto& b : blocks) {
    auto& bits = m.bits.emplace_back(b.values.size(), 1);
    if (!b.valid.empty()) bits = b.valid;
  }
  return m;
}

IndexMask CoefficientTable::threshold(double t) const {
  if (!(t >= 0.0)) throw std::invalid_argument("threshold must be non-negative");
  IndexMask m = empty_mask();
  for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
    const auto& b = blocks[bi];
    for (std::size_t i = 0; i < b.values.size(); ++i)
      if (b.is_valid(i) && std::abs(b.values[i]) >= t) m.bits[bi][i] = 1;
  }
  return m;
}

double CoefficientTable::l1(const IndexMask* m, bool complement) const {
  if (m && m->bits.size() != blocks.size())
    throw std::invalid_argument("mask does not match table layout");
  double s = 0.0;
  for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
    const auto& b = blocks[bi];
    for (std::size_t i = 0; i < b.values.size(); ++i) {
      if (!b.is_valid(i)) continue;
      const bool in = m ? m->bits[bi][i] != 0 : true;
      if (in != complement || !m) s += std::abs(b.values[i]);
    }
  }
  return s;
}

double CoefficientTable::l2_squared() const {
  double s = 0.0;
  for (const auto& b : blocks)
    for (std::size_t i = 0; i < b.values.size(); ++i)
      if (b.is_valid(i)) s += std::norm(b.values[i]);
  return s;
}

IndexMask CoefficientTable::mask_of(const std::vector<WaveletIndex>& idx) const {
  IndexMask m = empty_mask();
  for (const auto& i : idx) {
    bool found = false;
    for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
      const auto& b = blocks[bi];
      if (kind == FrameKind::wavelet && b.scale == i.j && b.contains(i.k1, i.k2)) {
        m.bits[bi][b.index(i.k1, i.k2)] = 1;
        found = true;
      }
    }
    if (!found) throw std::out_of_range("unknown index " + to_string(i));
  }
  return m;
}

IndexMask CoefficientTable::mask_of(const std::vector<CurveletIndex>& idx) const {
  IndexMask m = empty_mask();
  for (const auto& i : idx) {
    bool found = false;
    for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
      const auto& b = blocks[bi];
      if (kind == FrameKind::curvelet && b.scale == i.j && b.wedge == i.l &&
          b.contains(i.k1, i.k2)) {
        m.bits[bi][b.index(i.k1, i.k2)] = 1;
        found = true;
      }
    }
    if (!found) throw std::out_of_range("unknown index " + to_string(i));
  }
  return m;
}

std::vector<WaveletIndex> CoefficientTable::wavelet_indices(const IndexMask& m) const {
  std::vector<WaveletIndex> out;
  for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
    const auto& b = blocks[bi];
    for (std::size_t i = 0; i < b.values.size(); ++i)
      if (m.bits[bi][i]) out.push_back({b.scale, b.k1_of(i), b.k2_of(i)});
  }
  return out;
}

std::vector<CurveletIndex> CoefficientTable::curvelet_indices(const IndexMask& m) const {
  std::vector<CurveletIndex> out;
  for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
    const auto& b = blocks[bi];
    for (std::size_t i = 0; i < b.values.size(); ++i)
      if (m.bits[bi][i]) out.push_back({b.scale, b.wedge, b.k1_of(i), b.k2_of(i)});
  }
  return out;
}

}  // namespace geosep
