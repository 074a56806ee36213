#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "silencer/core.hpp"
#include "silencer/ensemble.hpp"
#include "silencer/parallel.hpp"

namespace silencer {

struct UniformLaw {
  double lo = 0.0;
  double hi = 1.0;
};

/// Parameters of a synthetic evaluation ecosystem. Models 0..T-1 are the
/// generators, T..T+K-1 the references.
struct EcosystemSpec {
  std::size_t generators = 7;  // T
  std::size_t references = 9;  // K
  std::size_t n_items = 100;
  /// Accuracies equal exact success probabilities (n_items -> infinity).
  bool analytic = false;

  /// Explicit abilities; when absent they are drawn from skill_law per seed.
  std::optional<std::vector<double>> skills;
  UniformLaw skill_law{0.3, 0.8};
  /// With an explicit pool longer than T+K, pick a random subset per seed.
  bool resample_subsets = false;

  UniformLaw difficulty_law{0.3, 0.6};

  std::optional<std::vector<double>> self_bias;
  UniformLaw self_bias_law{0.02, 0.22};

  /// Style, domain and label fractions of each beta; must sum to 1.
  std::array<double, 3> sub_bias_mix{0.15, 0.18, 0.67};
  std::array<bool, 3> active_channels{true, true, true};

  double noise_sd = 0.02;
  double slope = 4.0;
  /// Additive boost on truth_performance per model (T+K entries), empty = off.
  std::vector<double> contamination;

  double max_clamp_rate = 0.2;
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;

  void validate() const;
};

struct Ecosystem {
  std::vector<double> truth_performance;  // T+K
  PerformanceMatrix x;                    // generator rows of x_full
  std::vector<std::vector<double>> x_full;
  std::vector<double> injected_bias;      // T, relative-performance units
  std::vector<double> true_skills;        // T+K
  double clamp_rate = 0.0;

  std::size_t generators() const noexcept { return x.size(); }
  std::size_t references() const noexcept { return x_full.size() - x.size(); }
};

Ecosystem generate(const EcosystemSpec& spec);

/// Scores for one set of ensemble weights against the ecosystem's ground truth.
struct EnsembleScore {
  double weight_bias_corr = 0.0;
  double effectiveness_corr = 0.0;
  double residual_self_bias = 0.0;
};

EnsembleScore score_weights(const Ecosystem& eco, const WeightVector& alpha);

struct StrategyOutcome {
  Strategy strategy;
  WeightVector weights;
  EnsembleScore score;
  bool converged = true;
  std::size_t iterations = 0;
};

struct StrategyComparison {
  std::vector<StrategyOutcome> outcomes;
  EnsembleScore naive;  // uniform weights
};

StrategyComparison compare_strategies(const Ecosystem& eco, const std::vector<Strategy>& strategies,
                                      const SolverConfig& config);

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& values);

/// Runs compare_strategies for seeds 0..count-1 (stream_id = seed index).
/// Result i belongs to seed i regardless of execution order.
std::vector<StrategyComparison> simulate_seeds(const EcosystemSpec& base, const std::vector<Strategy>& strategies,
                                               const SolverConfig& config, std::size_t seeds,
                                               const ParallelOptions& opts = {});

struct SweepRow {
  std::size_t value = 0;  // T or N
  MeanSe naive_bias;
  MeanSe naive_effectiveness;
  MeanSe reweighted_bias;
  MeanSe reweighted_effectiveness;
  MeanSe weight_bias_corr;
  std::size_t non_converged = 0;
};

std::vector<SweepRow> sweep_t(const EcosystemSpec& base, const std::vector<std::size_t>& t_values,
                              std::size_t seeds, const SolverConfig& config = {},
                              const ParallelOptions& opts = {});

/// n_items follows N.
std::vector<SweepRow> sweep_n(const EcosystemSpec& base, const std::vector<std::size_t>& n_values,
                              std::size_t seeds, const SolverConfig& config = {},
                              const ParallelOptions& opts = {});

struct SubBiasMeasurement {
  std::vector<double> total, style, domain, label;  // per generator
};

/// Regenerates the ecosystem analytically with single channels active and
/// measures each generator's sub-biases against its truth performance.
SubBiasMeasurement measure_sub_biases(const EcosystemSpec& spec);

}  // namespace silencer
