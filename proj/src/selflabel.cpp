#include "silencer/selflabel.hpp"

#include <cmath>
#include <string>

namespace silencer {
namespace {

constexpr std::size_t kDrawsPerChunk = 8192;

void require_exact_feasible(const ModelEnsemble& ens) {
  if (ens.models() == 0) throw Error(ErrorCode::EmptyEnsemble, "no models");
  const double terms = static_cast<double>(ens.labels()) * static_cast<double>(ens.models()) *
                       static_cast<double>(ens.models());
  if (terms > ModelEnsemble::kMaxExactTerms)
    throw Error(ErrorCode::TooLargeForExact, "|Y|*T^2 exceeds 1e8; use Monte Carlo");
}

// Row i of an ordered-pair sum, reduced afterwards in index order.
template <class Term>
double pair_sum(const ModelEnsemble& ens, const ParallelOptions& opts, Term term) {
  const std::size_t t = ens.models();
  std::vector<double> rows(t, 0.0);
  for_each_index(t, opts, [&](std::size_t i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < t; ++j)
      for (std::size_t y = 0; y < ens.labels(); ++y) acc += term(ens[i][y], ens[j][y]);
    rows[i] = acc;
  });
  double total = 0.0;
  for (double r : rows) total += r;
  return total;
}

}  // namespace

ModelEnsemble::ModelEnsemble(std::vector<ModelDistribution> distributions) : dists_(std::move(distributions)) {
  if (dists_.empty()) throw Error(ErrorCode::EmptyEnsemble, "no models");
  const std::size_t k = dists_.front().size();
  if (k < 2) throw Error(ErrorCode::TooSmall, "label space needs at least 2 labels");
  for (std::size_t i = 1; i < dists_.size(); ++i)
    if (dists_[i].size() != k)
      throw Error(ErrorCode::DimensionMismatch, "model " + std::to_string(i + 1) + " has a different label space");
}

double e1(const ModelEnsemble& ensemble) {
  require_exact_feasible(ensemble);
  double total = 0.0;
  for (const auto& d : ensemble.distributions()) {
    double collision = 0.0;
    for (double p : d.probs()) collision += p * p;
    total += collision;
  }
  return total / static_cast<double>(ensemble.models());
}

double e2(const ModelEnsemble& ensemble, const ParallelOptions& opts) {
  require_exact_feasible(ensemble);
  const double t = static_cast<double>(ensemble.models());
  return pair_sum(ensemble, opts, [](double pi, double pj) { return pj * pi; }) / (t * t);
}

GapCheck gap_identity_check(const ModelEnsemble& ensemble, const ParallelOptions& opts) {
  const double gap = e1(ensemble) - e2(ensemble, opts);
  const double t = static_cast<double>(ensemble.models());
  const double pairwise =
      pair_sum(ensemble, opts, [](double pi, double pj) { return (pi - pj) * (pi - pj); }) / (2.0 * t * t);
  return {gap, pairwise, std::abs(gap - pairwise)};
}

MonteCarloAccuracies monte_carlo_accuracies(const ModelEnsemble& ensemble, std::size_t draws, const RngStream& rng,
                                            const ParallelOptions& opts) {
  if (ensemble.models() == 0) throw Error(ErrorCode::EmptyEnsemble, "no models");
  if (draws == 0) throw Error(ErrorCode::ZeroDraws, "draws must be >= 1");

  const std::size_t chunks = (draws + kDrawsPerChunk - 1) / kDrawsPerChunk;
  const std::uint64_t t = ensemble.models();
  std::vector<std::size_t> self_hits(chunks, 0), cross_hits(chunks, 0);
  for_each_index(chunks, opts, [&](std::size_t c) {
    RngStream local = rng.derive(c);
    const std::size_t begin = c * kDrawsPerChunk;
    const std::size_t end = std::min(draws, begin + kDrawsPerChunk);
    std::size_t self = 0, cross = 0;
    for (std::size_t d = begin; d < end; ++d) {
      const auto& m = ensemble[local.uniform_index(t)].probs();
      const std::size_t own_label = local.categorical(m);
      const std::size_t own_guess = local.categorical(m);
      if (own_label == own_guess) ++self;
      const auto& labeler = ensemble[local.uniform_index(t)].probs();
      const auto& predictor = ensemble[local.uniform_index(t)].probs();
      const std::size_t label = local.categorical(labeler);
      const std::size_t guess = local.categorical(predictor);
      if (label == guess) ++cross;
    }
    self_hits[c] = self;
    cross_hits[c] = cross;
  });

  std::size_t self = 0, cross = 0;
  for (std::size_t c = 0; c < chunks; ++c) {
    self += self_hits[c];
    cross += cross_hits[c];
  }
  const double n = static_cast<double>(draws);
  const double p1 = static_cast<double>(self) / n;
  const double p2 = static_cast<double>(cross) / n;
  return {p1, p2, {std::sqrt(p1 * (1.0 - p1) / n), std::sqrt(p2 * (1.0 - p2) / n)}, draws};
}

}  // namespace silencer
