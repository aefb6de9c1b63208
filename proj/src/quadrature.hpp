#pragma once

#include <vector>

namespace ionjc {

struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre rule of the given order mapped onto [a, b].
GaussLegendreRule gauss_legendre(int order, double a, double b);

}  // namespace ionjc
