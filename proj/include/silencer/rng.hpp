#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace silencer {

/// Counter-based random stream. Draw k is a keyed hash of k, so the sequence
/// depends only on (seed, stream_id) and never on the platform's <random>.
class RngStream {
 public:
  static constexpr std::string_view kAlgorithm = "splitmix64-keyed-ctr-v1";

  RngStream(std::uint64_t seed, std::uint64_t stream_id) noexcept;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }
  std::uint64_t position() const noexcept { return counter_; }

  /// Independent child stream; the parent's position is not consumed.
  RngStream derive(std::uint64_t tag) const noexcept;

  std::uint64_t next_u64() noexcept;
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, bound), bound > 0, without modulo bias.
  std::uint64_t uniform_index(std::uint64_t bound) noexcept;
  double normal() noexcept;
  double gamma(double shape) noexcept;
  std::vector<double> dirichlet(std::size_t k, double concentration);
  /// Number of successes in `trials` Bernoulli(p) draws.
  std::uint64_t binomial(std::uint64_t trials, double p) noexcept;
  /// Index drawn from the categorical distribution `probs`.
  std::size_t categorical(std::span<const double> probs) noexcept;
  /// `count` distinct indices from [0, pool) in draw order.
  std::vector<std::size_t> sample_without_replacement(std::size_t pool, std::size_t count);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t key_a_;
  std::uint64_t key_b_;
  std::uint64_t counter_ = 0;
};

}  // namespace silencer
