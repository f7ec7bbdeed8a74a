#pragma once

#include <vector>

namespace geosep {

// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendre {
  std::vector<double> x, w;
  explicit GaussLegendre(int n);
};

}  // namespace geosep
