#include "silencer/bias_metrics.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "silencer/error.hpp"

namespace silencer {

RawPerformance::RawPerformance(double value) : value_(value) {
  if (!std::isfinite(value)) throw Error(ErrorCode::NonFinite, "raw performance is not finite");
  if (value < 0.0 || value > 1.0)
    throw Error(ErrorCode::OutOfRange, "raw performance " + std::to_string(value) + " outside [0, 1]");
}

double relative_performance(double target, std::span<const double> references) {
  if (references.empty()) throw Error(ErrorCode::EmptyReferences, "no reference models");
  if (!std::isfinite(target) || target < 0.0) throw Error(ErrorCode::OutOfRange, "target must be finite and >= 0");
  double sum = 0.0;
  for (double r : references) {
    if (!std::isfinite(r) || r < 0.0) throw Error(ErrorCode::OutOfRange, "reference must be finite and >= 0");
    sum += r;
  }
  if (sum == 0.0) throw Error(ErrorCode::ZeroReferenceSum, "every reference model scored 0");
  return static_cast<double>(references.size()) * target / sum;
}

double relative_performance(RawPerformance target, std::span<const RawPerformance> references) {
  std::vector<double> refs;
  refs.reserve(references.size());
  for (const auto& r : references) refs.push_back(r.value());
  return relative_performance(target.value(), refs);
}

namespace {
void require_finite(double a, double b) {
  if (!std::isfinite(a) || !std::isfinite(b)) throw Error(ErrorCode::NonFinite, "bias inputs must be finite");
}
}  // namespace

double evaluation_bias(double rel_on_generated, double rel_on_human) {
  require_finite(rel_on_generated, rel_on_human);
  return rel_on_generated - rel_on_human;
}

SubBias sub_bias(double rel_treated, double rel_baseline, SubBiasKind kind) {
  require_finite(rel_treated, rel_baseline);
  return {kind, rel_treated - rel_baseline};
}

BiasReport bias_decomposition(double b, double bs, double bq, double bl) {
  for (double v : {b, bs, bq, bl})
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "bias inputs must be finite");
  BiasReport report;
  report.self_bias = b;
  report.sub_style = bs;
  report.sub_domain = bq;
  report.sub_label = bl;
  if (b == 0.0) {
    report.zero_total_bias = true;
    return report;
  }
  const std::array<double, 3> mag{std::abs(bs), std::abs(bq), std::abs(bl)};
  const double total = std::abs(b);
  report.fractions_of_total = std::array<double, 3>{mag[0] / total, mag[1] / total, mag[2] / total};
  // Shares of the summed sub-bias magnitude; the sub-biases do not add up to B.
  const double sub_sum = mag[0] + mag[1] + mag[2];
  report.relative_contributions =
      sub_sum > 0.0 ? std::array<double, 3>{mag[0] / sub_sum, mag[1] / sub_sum, mag[2] / sub_sum}
                    : std::array<double, 3>{0.0, 0.0, 0.0};
  return report;
}

}  // namespace silencer
