#include "silencer/agreement.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "silencer/error.hpp"

namespace silencer {
namespace {

constexpr std::size_t kCompensatedThreshold = 10'000;
constexpr double kRelativeFlatness = 1e-13;

// Neumaier summation for long vectors, plain accumulation otherwise.
class Accumulator {
 public:
  explicit Accumulator(bool compensated) : compensated_(compensated) {}
  void add(double x) {
    if (!compensated_) {
      sum_ += x;
      return;
    }
    const double t = sum_ + x;
    comp_ += std::abs(sum_) >= std::abs(x) ? (sum_ - t) + x : (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  bool compensated_;
  double sum_ = 0.0;
  double comp_ = 0.0;
};

void check_shapes(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size())
    throw Error(ErrorCode::LengthMismatch,
                "lengths " + std::to_string(u.size()) + " and " + std::to_string(v.size()));
  if (u.size() < 2) throw Error(ErrorCode::TooShort, "need at least 2 observations");
  for (std::size_t k = 0; k < u.size(); ++k)
    if (!std::isfinite(u[k]) || !std::isfinite(v[k])) throw Error(ErrorCode::NonFinite, "non-finite observation");
}

struct Moments {
  double cross;
  double ss_u;
  double ss_v;
};

// Two-pass: means first, then centered products.
Moments centered_moments(std::span<const double> u, std::span<const double> v) {
  const bool comp = u.size() > kCompensatedThreshold;
  Accumulator su(comp), sv(comp);
  for (std::size_t k = 0; k < u.size(); ++k) {
    su.add(u[k]);
    sv.add(v[k]);
  }
  const double n = static_cast<double>(u.size());
  const double mu = su.value() / n;
  const double mv = sv.value() / n;
  Accumulator cross(comp), suu(comp), svv(comp);
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double du = u[k] - mu;
    const double dv = v[k] - mv;
    cross.add(du * dv);
    suu.add(du * du);
    svv.add(dv * dv);
  }
  return {cross.value(), suu.value(), svv.value()};
}

}  // namespace

GuardedCorrelation pearson_or_default(std::span<const double> u, std::span<const double> v, double fallback) {
  check_shapes(u, v);
  // Spread at the rounding level of the magnitude counts as constant, so that
  // sums of equal terms taken in different orders do not yield a coefficient.
  const auto constant = [](std::span<const double> s) {
    const auto [lo, hi] = std::minmax_element(s.begin(), s.end());
    return *hi - *lo <= kRelativeFlatness * std::max(std::abs(*lo), std::abs(*hi));
  };
  if (constant(u) || constant(v)) return {fallback, true};
  const Moments m = centered_moments(u, v);
  const double denom = std::sqrt(m.ss_u) * std::sqrt(m.ss_v);
  if (!(denom > 0.0)) return {fallback, true};
  return {std::clamp(m.cross / denom, -1.0, 1.0), false};
}

double pearson(std::span<const double> u, std::span<const double> v) {
  const auto r = pearson_or_default(u, v, 0.0);
  if (r.degenerate) throw Error(ErrorCode::ZeroVariance, "an input vector is constant");
  return r.value;
}

}  // namespace silencer
