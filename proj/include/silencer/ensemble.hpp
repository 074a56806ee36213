#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "silencer/core.hpp"
#include "silencer/parallel.hpp"
#include "silencer/rng.hpp"

namespace silencer {

enum class StrategyKind { SelfBias, Accuracy, ConsistencyRaw, ConsistencySilencer };

std::string_view to_string(StrategyKind kind) noexcept;
/// Accepts the CLI names: selfbias, accuracy, consistency, silencer.
StrategyKind parse_strategy(std::string_view name);

struct Strategy {
  static constexpr double kDefaultDelta = 1e-6;

  StrategyKind kind = StrategyKind::ConsistencySilencer;
  /// Additive floor of the Silencer form; ignored by the other variants.
  double delta = kDefaultDelta;

  static Strategy silencer(double delta = kDefaultDelta) { return {StrategyKind::ConsistencySilencer, delta}; }
  static Strategy of(StrategyKind kind) { return {kind, kDefaultDelta}; }
};

struct SolverConfig {
  Strategy strategy;
  double conv_epsilon = 1e-6;
  std::size_t max_iterations = 10'000;
  bool record_trace = false;

  void validate() const;
};

struct SolveResult {
  WeightVector weights;
  std::vector<double> weighted_performance;
  std::optional<ConvergenceTrace> trace;
  std::vector<bool> degeneracy_flags;
  std::size_t iterations = 0;
  double final_delta = 0.0;
};

/// Carries the last iterate when the iteration cap binds.
class MaxIterationsExceeded : public Error {
 public:
  explicit MaxIterationsExceeded(SolveResult last);
  const SolveResult& last_iterate() const noexcept { return last_; }

 private:
  SolveResult last_;
};

/// The SelfBias denominator is clamped to at least this value.
inline constexpr double kSelfBiasFloor = 1e-6;

/// X * alpha: each model's performance on the current ensembled benchmark.
std::vector<double> weighted_performance(const PerformanceMatrix& x, const WeightVector& alpha);

struct RawUpdate {
  std::vector<double> raw;
  std::vector<bool> degenerate;
};

/// One UpdateAlpha application before normalization.
RawUpdate update_alpha(const PerformanceMatrix& x, std::span<const double> xbar, const Strategy& strategy);

/// Full map F: alpha -> normalized update. Throws NegativeRawWeight for
/// ConsistencyRaw when the raw vector cannot be normalized onto the simplex.
WeightVector apply_update(const PerformanceMatrix& x, const WeightVector& alpha, const Strategy& strategy,
                          std::vector<bool>* degenerate = nullptr);

/// Fixed-point iteration from the uniform start (or `start` when given).
SolveResult solve(const PerformanceMatrix& x, const SolverConfig& config,
                  const std::optional<WeightVector>& start = std::nullopt);

/// Solves many independent matrices; output order matches input order.
std::vector<SolveResult> solve_batch(std::span<const PerformanceMatrix> matrices, const SolverConfig& config,
                                     const ParallelOptions& opts = {});

struct MaterializeOptions {
  /// Hand out the floor shortfall by largest fractional part (ties: lower index).
  bool top_up = false;
};

/// Per-generator sample counts: floor(N * alpha_i), plus top-up when enabled.
std::vector<std::size_t> allocation_counts(const WeightVector& alpha, std::size_t n, bool top_up);

/// Draws the ensembled benchmark. Entry i holds sorted item indices from pool i.
std::vector<std::vector<std::size_t>> materialize(std::span<const std::size_t> pool_sizes,
                                                  const WeightVector& alpha, std::size_t n, RngStream& rng,
                                                  MaterializeOptions options = {});

struct ContractionDiagnostics {
  double q_hat;
  bool geometric;
};

/// Median successive-delta ratio over the trailing half of the trace.
ContractionDiagnostics contraction_diagnostics(const ConvergenceTrace& trace);
ContractionDiagnostics contraction_diagnostics(std::span<const double> l1_deltas);

}  // namespace silencer
