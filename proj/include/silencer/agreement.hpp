#pragma once

#include <span>

namespace silencer {

/// Pearson correlation, clamped to [-1, 1]. Throws ZeroVariance when either
/// input is constant.
double pearson(std::span<const double> u, std::span<const double> v);

struct GuardedCorrelation {
  double value;
  bool degenerate;
};

/// Pearson correlation that substitutes `fallback` when the coefficient is
/// undefined (a constant input). Length errors still throw.
GuardedCorrelation pearson_or_default(std::span<const double> u, std::span<const double> v,
                                      double fallback);

}  // namespace silencer
