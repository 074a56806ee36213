#include "silencer/core.hpp"

#include <cmath>
#include <numeric>

namespace silencer {

PerformanceMatrix PerformanceMatrix::validate(const std::vector<std::vector<double>>& raw,
                                              std::optional<std::vector<std::string>> labels) {
  const std::size_t n = raw.size();
  if (n == 0) throw Error(ErrorCode::TooSmall, "matrix is empty");
  for (std::size_t i = 0; i < n; ++i) {
    if (raw[i].size() != n)
      throw Error(ErrorCode::NonSquare, "row " + std::to_string(i + 1) + " has " + std::to_string(raw[i].size()) +
                                            " entries, expected " + std::to_string(n));
  }
  if (n < 2) throw Error(ErrorCode::TooSmall, "need at least 2 generators");

  std::vector<double> data;
  data.reserve(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double v = raw[i][j];
      const std::string where = "entry (" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ")";
      if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, where + " is not finite");
      if (v < 0.0) throw Error(ErrorCode::Negative, where + " is negative");
      data.push_back(v);
    }
  }

  std::vector<std::string> names;
  if (labels) {
    if (labels->size() != n)
      throw Error(ErrorCode::DimensionMismatch, "expected " + std::to_string(n) + " labels");
    names = std::move(*labels);
  } else {
    for (std::size_t i = 0; i < n; ++i) names.push_back("M" + std::to_string(i + 1));
  }
  return PerformanceMatrix(n, std::move(data), std::move(names));
}

std::vector<double> PerformanceMatrix::column(std::size_t j) const {
  std::vector<double> c(n_);
  for (std::size_t i = 0; i < n_; ++i) c[i] = data_[i * n_ + j];
  return c;
}

std::vector<std::vector<double>> PerformanceMatrix::rows() const {
  std::vector<std::vector<double>> out(n_);
  for (std::size_t i = 0; i < n_; ++i) out[i].assign(data_.begin() + i * n_, data_.begin() + (i + 1) * n_);
  return out;
}

PerformanceMatrix PerformanceMatrix::scaled(double factor) const {
  if (!(factor > 0.0) || !std::isfinite(factor)) throw Error(ErrorCode::OutOfRange, "scale factor must be > 0");
  auto grid = rows();
  for (auto& r : grid)
    for (auto& v : r) v *= factor;
  return validate(grid, labels_);
}

WeightVector WeightVector::from_simplex(std::vector<double> weights) {
  if (weights.empty()) throw Error(ErrorCode::TooSmall, "weight vector is empty");
  double sum = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w)) throw Error(ErrorCode::NonFinite, "weight is not finite");
    if (w < 0.0) throw Error(ErrorCode::NegativeEntry, "weight is negative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > kSumTolerance) throw Error(ErrorCode::OutOfRange, "weights do not sum to 1");
  return WeightVector(std::move(weights));
}

WeightVector WeightVector::uniform(std::size_t n) {
  if (n == 0) throw Error(ErrorCode::TooSmall, "weight vector is empty");
  return WeightVector(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

WeightVector WeightVector::vertex(std::size_t n, std::size_t k) {
  if (k >= n) throw Error(ErrorCode::OutOfRange, "vertex index out of range");
  std::vector<double> w(n, 0.0);
  w[k] = 1.0;
  return WeightVector(std::move(w));
}

double WeightVector::l1_distance(const WeightVector& other) const {
  if (other.size() != size()) throw Error(ErrorCode::DimensionMismatch, "weight vectors differ in length");
  double d = 0.0;
  for (std::size_t i = 0; i < w_.size(); ++i) d += std::abs(w_[i] - other.w_[i]);
  return d;
}

WeightVector normalize_to_simplex(std::span<const double> raw) {
  if (raw.empty()) throw Error(ErrorCode::AllZero, "empty vector");
  double sum = 0.0;
  for (double v : raw) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "entry is not finite");
    if (v < 0.0) throw Error(ErrorCode::NegativeEntry, "entry is negative");
    sum += v;
  }
  if (sum == 0.0) throw Error(ErrorCode::AllZero, "entries sum to zero");
  std::vector<double> w(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) w[i] = raw[i] / sum;
  return WeightVector(std::move(w));
}

void ConvergenceTrace::record(const WeightVector& alpha_new, double l1_delta) {
  snapshots.push_back(alpha_new);
  if (!l1_deltas.empty() && l1_deltas.back() > 1e-300) contraction_ratios.push_back(l1_delta / l1_deltas.back());
  l1_deltas.push_back(l1_delta);
  iterations = l1_deltas.size();
}

ModelDistribution::ModelDistribution(std::vector<double> probs) : p_(std::move(probs)) {
  if (p_.empty()) throw Error(ErrorCode::TooSmall, "distribution is empty");
  double sum = 0.0;
  for (double v : p_) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "probability is not finite");
    if (v < 0.0) throw Error(ErrorCode::NegativeEntry, "probability is negative");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw Error(ErrorCode::OutOfRange, "probabilities do not sum to 1");
}

}  // namespace silencer
