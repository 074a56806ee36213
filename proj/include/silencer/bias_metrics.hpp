#pragma once

#include <array>
#include <optional>
#include <span>

namespace silencer {

/// Accuracy-like score of one model on one benchmark, in [0, 1].
class RawPerformance {
 public:
  explicit RawPerformance(double value);
  double value() const noexcept { return value_; }

 private:
  double value_;
};

/// K * target / sum(references).
double relative_performance(RawPerformance target, std::span<const RawPerformance> references);
double relative_performance(double target, std::span<const double> references);

/// Relative performance on the generated benchmark minus that on the human
/// benchmark. Positive means the generated benchmark overestimates the model.
double evaluation_bias(double rel_on_generated, double rel_on_human);

enum class SubBiasKind { Style, Domain, Label };

struct SubBias {
  SubBiasKind kind;
  double value;
};

SubBias sub_bias(double rel_treated, double rel_baseline, SubBiasKind kind);

struct BiasReport {
  double self_bias = 0.0;
  std::optional<double> sub_style;
  std::optional<double> sub_domain;
  std::optional<double> sub_label;
  /// |B^s|, |B^q|, |B^l| as shares of |B^s| + |B^q| + |B^l|.
  std::optional<std::array<double, 3>> relative_contributions;
  /// The same magnitudes divided by |B|; need not sum to 1.
  std::optional<std::array<double, 3>> fractions_of_total;
  bool zero_total_bias = false;
};

/// Contributions are omitted (and zero_total_bias set) when b == 0.
BiasReport bias_decomposition(double b, double bs, double bq, double bl);

}  // namespace silencer
