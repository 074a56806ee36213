#include "silencer/rng.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include "silencer/error.hpp"

namespace silencer {
namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id) noexcept
    : seed_(seed),
      stream_id_(stream_id),
      key_a_(mix64(seed + kGolden * (mix64(stream_id) | 1ULL))),
      key_b_(mix64(stream_id ^ mix64(seed ^ 0x5851f42d4c957f2dULL))) {}

RngStream RngStream::derive(std::uint64_t tag) const noexcept {
  return RngStream(mix64(seed_ ^ mix64(tag + 0x2545f4914f6cdd1dULL)), mix64(stream_id_ + kGolden * (tag + 1)));
}

std::uint64_t RngStream::next_u64() noexcept {
  const std::uint64_t k = counter_++;
  return mix64(mix64(k * kGolden + key_a_) ^ key_b_);
}

double RngStream::uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

std::uint64_t RngStream::uniform_index(std::uint64_t bound) noexcept {
  // Lemire's multiply-shift with rejection.
  __extension__ typedef unsigned __int128 u128;
  u128 m = static_cast<u128>(next_u64()) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      m = static_cast<u128>(next_u64()) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

double RngStream::normal() noexcept {
  // Box-Muller, second variate discarded so each call consumes exactly two draws.
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double RngStream::gamma(double shape) noexcept {
  if (shape < 1.0) {
    const double u = 1.0 - uniform();
    return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  // Marsaglia-Tsang.
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = 0.0;
    double v = 0.0;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = 1.0 - uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

std::vector<double> RngStream::dirichlet(std::size_t k, double concentration) {
  if (k == 0) throw Error(ErrorCode::TooSmall, "dirichlet needs k >= 1");
  if (!(concentration > 0.0)) throw Error(ErrorCode::OutOfRange, "concentration must be > 0");
  std::vector<double> g(k);
  double sum = 0.0;
  for (auto& v : g) {
    v = gamma(concentration);
    sum += v;
  }
  if (sum == 0.0) {
    g.assign(k, 0.0);
    g[uniform_index(k)] = 1.0;
    return g;
  }
  for (auto& v : g) v /= sum;
  return g;
}

std::uint64_t RngStream::binomial(std::uint64_t trials, double p) noexcept {
  // Always consumes `trials` draws, so streams stay aligned when p changes.
  std::uint64_t hits = 0;
  for (std::uint64_t t = 0; t < trials; ++t) hits += uniform() < p ? 1 : 0;
  return hits;
}

std::size_t RngStream::categorical(std::span<const double> probs) noexcept {
  const double u = uniform();
  double cum = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t y = 0; y < probs.size(); ++y) {
    if (probs[y] <= 0.0) continue;
    last_positive = y;
    cum += probs[y];
    if (u < cum) return y;
  }
  return last_positive;  // rounding left cum slightly below 1
}

std::vector<std::size_t> RngStream::sample_without_replacement(std::size_t pool, std::size_t count) {
  if (count > pool) throw Error(ErrorCode::PoolTooSmall, "cannot draw more items than the pool holds");
  std::vector<std::size_t> idx(pool);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(uniform_index(pool - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(count);
  return idx;
}

}  // namespace silencer
