#include "silencer/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "silencer/agreement.hpp"

namespace silencer {

std::string_view to_string(StrategyKind kind) noexcept {
  switch (kind) {
    case StrategyKind::SelfBias: return "selfbias";
    case StrategyKind::Accuracy: return "accuracy";
    case StrategyKind::ConsistencyRaw: return "consistency";
    case StrategyKind::ConsistencySilencer: return "silencer";
  }
  return "unknown";
}

StrategyKind parse_strategy(std::string_view name) {
  for (auto k : {StrategyKind::SelfBias, StrategyKind::Accuracy, StrategyKind::ConsistencyRaw,
                 StrategyKind::ConsistencySilencer})
    if (to_string(k) == name) return k;
  throw Error(ErrorCode::InvalidConfig, "unknown strategy '" + std::string(name) + "'");
}

void SolverConfig::validate() const {
  if (!(conv_epsilon > 0.0) || !std::isfinite(conv_epsilon))
    throw Error(ErrorCode::InvalidConfig, "conv_epsilon must be > 0");
  if (max_iterations < 1) throw Error(ErrorCode::InvalidConfig, "max_iterations must be >= 1");
  if (strategy.kind == StrategyKind::ConsistencySilencer && (!(strategy.delta > 0.0) || !std::isfinite(strategy.delta)))
    throw Error(ErrorCode::InvalidConfig, "silencer delta must be > 0");
}

MaxIterationsExceeded::MaxIterationsExceeded(SolveResult last)
    : Error(ErrorCode::MaxIterationsExceeded,
            "no convergence after " + std::to_string(last.iterations) + " iterations (last l1 delta " +
                std::to_string(last.final_delta) + ")"),
      last_(std::move(last)) {}

std::vector<double> weighted_performance(const PerformanceMatrix& x, const WeightVector& alpha) {
  const std::size_t t = x.size();
  if (alpha.size() != t)
    throw Error(ErrorCode::DimensionMismatch,
                "matrix has " + std::to_string(t) + " generators, weights have " + std::to_string(alpha.size()));
  std::vector<double> xbar(t, 0.0);
  for (std::size_t i = 0; i < t; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < t; ++j) s += alpha[j] * x(i, j);
    xbar[i] = s;
  }
  return xbar;
}

RawUpdate update_alpha(const PerformanceMatrix& x, std::span<const double> xbar, const Strategy& strategy) {
  const std::size_t t = x.size();
  if (xbar.size() != t) throw Error(ErrorCode::DimensionMismatch, "weighted performance has the wrong length");
  RawUpdate out{std::vector<double>(t), std::vector<bool>(t, false)};

  switch (strategy.kind) {
    case StrategyKind::SelfBias:
      for (std::size_t i = 0; i < t; ++i) out.raw[i] = 1.0 / std::max(x(i, i) - xbar[i], kSelfBiasFloor);
      break;
    case StrategyKind::Accuracy:
      std::copy(xbar.begin(), xbar.end(), out.raw.begin());
      break;
    case StrategyKind::ConsistencyRaw:
    case StrategyKind::ConsistencySilencer: {
      const bool silencer = strategy.kind == StrategyKind::ConsistencySilencer;
      for (std::size_t i = 0; i < t; ++i) {
        const auto col = x.column(i);
        const auto c = pearson_or_default(col, xbar, 0.0);
        out.degenerate[i] = c.degenerate;
        out.raw[i] = silencer ? std::max(c.value, 0.0) + strategy.delta : c.value;
      }
      break;
    }
  }
  return out;
}

WeightVector apply_update(const PerformanceMatrix& x, const WeightVector& alpha, const Strategy& strategy,
                          std::vector<bool>* degenerate) {
  const auto xbar = weighted_performance(x, alpha);
  auto upd = update_alpha(x, xbar, strategy);
  if (strategy.kind == StrategyKind::ConsistencyRaw) {
    const double sum = std::accumulate(upd.raw.begin(), upd.raw.end(), 0.0);
    const bool any_negative = std::any_of(upd.raw.begin(), upd.raw.end(), [](double v) { return v < 0.0; });
    if (sum <= 0.0 || any_negative)
      throw Error(ErrorCode::NegativeRawWeight,
                  "raw consistency weights are not normalizable (sum " + std::to_string(sum) + ")");
  }
  if (degenerate) *degenerate = std::move(upd.degenerate);
  return normalize_to_simplex(upd.raw);
}

SolveResult solve(const PerformanceMatrix& x, const SolverConfig& config, const std::optional<WeightVector>& start) {
  config.validate();
  const std::size_t t = x.size();
  if (start && start->size() != t) throw Error(ErrorCode::DimensionMismatch, "start vector has the wrong length");

  // The loop guard of the published algorithm compares against alpha = 0 on
  // entry, which always passes; the first real delta is |F(a0) - a0|.
  WeightVector alpha = start.value_or(WeightVector::uniform(t));
  std::optional<ConvergenceTrace> trace;
  if (config.record_trace) trace.emplace();

  std::vector<bool> degenerate(t, false);
  double delta = 0.0;
  std::size_t it = 0;
  bool converged = false;
  while (it < config.max_iterations) {
    std::vector<bool> flags;
    WeightVector next = apply_update(x, alpha, config.strategy, &flags);
    delta = next.l1_distance(alpha);
    ++it;
    for (std::size_t i = 0; i < t; ++i) degenerate[i] = degenerate[i] || flags[i];
    if (trace) trace->record(next, delta);
    alpha = std::move(next);
    if (delta <= config.conv_epsilon) {
      converged = true;
      break;
    }
  }

  if (trace) trace->converged = converged;
  SolveResult result{alpha, weighted_performance(x, alpha), std::move(trace), std::move(degenerate), it, delta};
  if (!converged) throw MaxIterationsExceeded(std::move(result));
  return result;
}

std::vector<SolveResult> solve_batch(std::span<const PerformanceMatrix> matrices, const SolverConfig& config,
                                     const ParallelOptions& opts) {
  std::vector<std::optional<SolveResult>> slots(matrices.size());
  for_each_index(matrices.size(), opts, [&](std::size_t i) { slots[i] = solve(matrices[i], config); });
  std::vector<SolveResult> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

std::vector<std::size_t> allocation_counts(const WeightVector& alpha, std::size_t n, bool top_up) {
  if (n < 1) throw Error(ErrorCode::InvalidN, "benchmark size must be >= 1");
  const std::size_t t = alpha.size();
  std::vector<std::size_t> counts(t);
  std::vector<double> frac(t);
  std::size_t total = 0;
  for (std::size_t i = 0; i < t; ++i) {
    const double share = static_cast<double>(n) * alpha[i];
    const double whole = std::floor(share);
    counts[i] = static_cast<std::size_t>(whole);
    frac[i] = share - whole;
    total += counts[i];
  }
  if (top_up && total < n) {
    std::vector<std::size_t> order(t);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
    for (std::size_t k = 0; total < n; ++k, ++total) ++counts[order[k % t]];
  }
  return counts;
}

std::vector<std::vector<std::size_t>> materialize(std::span<const std::size_t> pool_sizes, const WeightVector& alpha,
                                                  std::size_t n, RngStream& rng, MaterializeOptions options) {
  if (pool_sizes.size() != alpha.size()) throw Error(ErrorCode::DimensionMismatch, "one pool size per generator");
  const auto counts = allocation_counts(alpha, n, options.top_up);
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (pool_sizes[i] < counts[i])
      throw Error(ErrorCode::PoolTooSmall, "generator " + std::to_string(i + 1) + " has " +
                                               std::to_string(pool_sizes[i]) + " items, needs " +
                                               std::to_string(counts[i]));
  }
  std::vector<std::vector<std::size_t>> picks(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    picks[i] = rng.sample_without_replacement(pool_sizes[i], counts[i]);
    std::sort(picks[i].begin(), picks[i].end());
  }
  return picks;
}

ContractionDiagnostics contraction_diagnostics(std::span<const double> l1_deltas) {
  std::vector<double> ratios;
  std::size_t usable = 0;
  for (std::size_t k = 0; k < l1_deltas.size(); ++k) {
    if (l1_deltas[k] > 1e-300) ++usable;
    if (k + 1 < l1_deltas.size() && l1_deltas[k] > 1e-300) ratios.push_back(l1_deltas[k + 1] / l1_deltas[k]);
  }
  if (usable < 3 || ratios.size() < 2)
    throw Error(ErrorCode::TraceTooShort, "need at least 3 nonzero l1 deltas");

  std::vector<double> tail(ratios.begin() + static_cast<std::ptrdiff_t>(ratios.size() / 2), ratios.end());
  const bool geometric = std::all_of(tail.begin(), tail.end(), [](double r) { return r < 1.0; });
  std::sort(tail.begin(), tail.end());
  const std::size_t m = tail.size();
  const double median = m % 2 == 1 ? tail[m / 2] : 0.5 * (tail[m / 2 - 1] + tail[m / 2]);
  return {median, geometric};
}

ContractionDiagnostics contraction_diagnostics(const ConvergenceTrace& trace) {
  return contraction_diagnostics(trace.l1_deltas);
}

}  // namespace silencer
