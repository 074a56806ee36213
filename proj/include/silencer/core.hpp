#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "silencer/error.hpp"

namespace silencer {

/// Square grid of relative performances. Row i is the evaluated model, column
/// j the benchmark produced by generator j. Immutable once validated.
class PerformanceMatrix {
 public:
  /// Validates `raw` and takes ownership. Labels default to "M1".."MT".
  static PerformanceMatrix validate(const std::vector<std::vector<double>>& raw,
                                    std::optional<std::vector<std::string>> labels = std::nullopt);

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t row, std::size_t col) const noexcept { return data_[row * n_ + col]; }

  /// Column j: every model's performance on benchmark j.
  std::vector<double> column(std::size_t j) const;
  std::span<const double> row(std::size_t i) const noexcept { return {data_.data() + i * n_, n_}; }
  std::vector<std::vector<double>> rows() const;
  const std::vector<std::string>& labels() const noexcept { return labels_; }

  /// Copy with every entry multiplied by `factor` (> 0).
  PerformanceMatrix scaled(double factor) const;

  friend bool operator==(const PerformanceMatrix&, const PerformanceMatrix&) = default;

 private:
  PerformanceMatrix(std::size_t n, std::vector<double> data, std::vector<std::string> labels)
      : n_(n), data_(std::move(data)), labels_(std::move(labels)) {}

  std::size_t n_ = 0;
  std::vector<double> data_;
  std::vector<std::string> labels_;
};

/// A point on the probability simplex.
class WeightVector {
 public:
  static constexpr double kSumTolerance = 1e-12;

  /// Accepts weights already on the simplex (checked to kSumTolerance).
  static WeightVector from_simplex(std::vector<double> weights);
  static WeightVector uniform(std::size_t n);
  /// Point mass on index k.
  static WeightVector vertex(std::size_t n, std::size_t k);

  std::size_t size() const noexcept { return w_.size(); }
  double operator[](std::size_t i) const noexcept { return w_[i]; }
  const std::vector<double>& values() const noexcept { return w_; }

  double l1_distance(const WeightVector& other) const;

  friend bool operator==(const WeightVector&, const WeightVector&) = default;

 private:
  friend WeightVector normalize_to_simplex(std::span<const double> raw);
  explicit WeightVector(std::vector<double> w) : w_(std::move(w)) {}
  std::vector<double> w_;
};

/// Divides a nonnegative, not-all-zero vector by its sum.
WeightVector normalize_to_simplex(std::span<const double> raw);

struct ConvergenceTrace {
  std::vector<WeightVector> snapshots;
  std::vector<double> l1_deltas;
  std::vector<double> contraction_ratios;
  bool converged = false;
  std::size_t iterations = 0;

  /// Appends one iteration and keeps contraction_ratios in sync.
  void record(const WeightVector& alpha_new, double l1_delta);
};

/// p(y|x) over a finite label space.
class ModelDistribution {
 public:
  explicit ModelDistribution(std::vector<double> probs);

  std::size_t size() const noexcept { return p_.size(); }
  double operator[](std::size_t y) const noexcept { return p_[y]; }
  const std::vector<double>& probs() const noexcept { return p_; }

 private:
  std::vector<double> p_;
};

}  // namespace silencer
