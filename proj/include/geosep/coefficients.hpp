#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

#include "geosep/grid.hpp"

namespace geosep {

struct WaveletIndex {
  int j = 0;
  int k1 = 0;
  int k2 = 0;
  auto operator<=>(const WaveletIndex&) const = default;
};

struct CurveletIndex {
  int j = 0;
  int l = 0;
  int k1 = 0;
  int k2 = 0;
  auto operator<=>(const CurveletIndex&) const = default;
};

std::string to_string(const WaveletIndex& i);
std::string to_string(const CurveletIndex& i);

enum class FrameKind { wavelet, curvelet };

// One (scale, wedge) block of coefficients on a centered index box:
// entry (i1, i2) holds k = (i1 - n1/2, i2 - n2/2). Curvelet boxes contain
// lattice points outside the field of view; `valid` marks the ones inside.
struct CoefficientBlock {
  int scale = 0;
  int wedge = -1;  // -1 for wavelets
  int n1 = 0;
  int n2 = 0;
  std::vector<cd> values;
  std::vector<std::uint8_t> valid;  // empty: every entry is valid

  std::size_t index(int k1, int k2) const {
    return static_cast<std::size_t>(k2 + n2 / 2) * n1 + (k1 + n1 / 2);
  }
  bool contains(int k1, int k2) const;  // inside the box and valid
  int k1_of(std::size_t i) const { return static_cast<int>(i % n1) - n1 / 2; }
  int k2_of(std::size_t i) const { return static_cast<int>(i / n1) - n2 / 2; }
  bool is_valid(std::size_t i) const { return valid.empty() || valid[i]; }
};

// Index set aligned with a table's blocks.
struct IndexMask {
  std::vector<std::vector<std::uint8_t>> bits;
  std::size_t count() const;
};

class CoefficientTable {
 public:
  FrameKind kind = FrameKind::wavelet;
  int j = 0;  // nominal scale; blocks cover j-1..j+1 unless built per scale
  int oversample = 2;
  std::vector<CoefficientBlock> blocks;

  const CoefficientBlock* find(int scale, int wedge = -1) const;
  CoefficientBlock* find(int scale, int wedge = -1);

  cd at(const WaveletIndex& i) const;   // throws on unknown index
  cd at(const CurveletIndex& i) const;  // throws on unknown index
  std::size_t count() const;            // valid entries

  IndexMask empty_mask() const;
  IndexMask full_mask() const;
  // Entries with |c| >= t. Ties count as significant.
  IndexMask threshold(double t) const;
  double l1(const IndexMask* m = nullptr, bool complement = false) const;
  double l2_squared() const;

  IndexMask mask_of(const std::vector<WaveletIndex>& idx) const;
  IndexMask mask_of(const std::vector<CurveletIndex>& idx) const;
  std::vector<WaveletIndex> wavelet_indices(const IndexMask& m) const;
  std::vector<CurveletIndex> curvelet_indices(const IndexMask& m) const;
};

}  // namespace geosep
