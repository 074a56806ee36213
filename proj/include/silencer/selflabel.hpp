#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "silencer/core.hpp"
#include "silencer/parallel.hpp"
#include "silencer/rng.hpp"

namespace silencer {

/// Label distributions of T models for a single input, over a shared label space.
class ModelEnsemble {
 public:
  /// Exact sums are refused beyond this many (i, j, y) terms.
  static constexpr double kMaxExactTerms = 1e8;

  explicit ModelEnsemble(std::vector<ModelDistribution> distributions);

  std::size_t models() const noexcept { return dists_.size(); }
  std::size_t labels() const noexcept { return dists_.empty() ? 0 : dists_.front().size(); }
  const ModelDistribution& operator[](std::size_t i) const noexcept { return dists_[i]; }
  const std::vector<ModelDistribution>& distributions() const noexcept { return dists_; }

 private:
  std::vector<ModelDistribution> dists_;
};

/// Self-labeling expected accuracy: mean collision probability.
double e1(const ModelEnsemble& ensemble);
/// Cross-labeling expected accuracy over ordered pairs, i == j included.
double e2(const ModelEnsemble& ensemble, const ParallelOptions& opts = {Execution::Serial});

struct GapCheck {
  double gap;
  double pairwise_form;
  double identity_residual;
};

/// e1 - e2 against (1/(2T^2)) sum_ij sum_y (p_i - p_j)^2.
GapCheck gap_identity_check(const ModelEnsemble& ensemble, const ParallelOptions& opts = {Execution::Serial});

struct MonteCarloAccuracies {
  double e1_hat;
  double e2_hat;
  std::pair<double, double> std_err;
  std::size_t draws;
};

/// Draws are split into fixed-size chunks, each with its own derived stream, so
/// the estimate does not depend on the thread count.
MonteCarloAccuracies monte_carlo_accuracies(const ModelEnsemble& ensemble, std::size_t draws,
                                            const RngStream& rng, const ParallelOptions& opts = {});

}  // namespace silencer
