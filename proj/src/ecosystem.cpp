#include "silencer/ecosystem.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "silencer/agreement.hpp"
#include "silencer/bias_metrics.hpp"
#include "silencer/rng.hpp"

namespace silencer {
namespace {

// Stream tags under the per-seed stream.
constexpr std::uint64_t kParamsTag = 1;
constexpr std::uint64_t kSamplingTag = 2;
constexpr std::uint64_t kSubsetTag = 3;

constexpr double kMaxReciprocalWeight = 1e12;

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

void check_law(const UniformLaw& law, const char* name, double lo, double hi) {
  if (!std::isfinite(law.lo) || !std::isfinite(law.hi) || law.lo > law.hi || law.lo < lo || law.hi > hi)
    throw Error(ErrorCode::InvalidSpec, std::string(name) + " must satisfy " + std::to_string(lo) +
                                            " <= lo <= hi <= " + std::to_string(hi));
}

std::vector<double> relative_row_block(const std::vector<std::vector<double>>& acc, std::size_t t, std::size_t j) {
  const std::size_t m_total = acc.size();
  std::vector<double> refs;
  refs.reserve(m_total - t);
  for (std::size_t r = t; r < m_total; ++r) refs.push_back(acc[r][j]);
  std::vector<double> rel(m_total);
  for (std::size_t m = 0; m < m_total; ++m) rel[m] = relative_performance(acc[m][j], refs);
  return rel;
}

}  // namespace

void EcosystemSpec::validate() const {
  if (generators < 2) throw Error(ErrorCode::InvalidSpec, "generators (T) must be >= 2");
  if (references < 2) throw Error(ErrorCode::InvalidSpec, "references (K) must be >= 2");
  if (!analytic && n_items < 1) throw Error(ErrorCode::InvalidSpec, "n_items must be >= 1");
  const std::size_t models = generators + references;
  if (skills) {
    if (skills->size() < models)
      throw Error(ErrorCode::InvalidSpec, "skills needs " + std::to_string(models) + " entries");
    for (double s : *skills)
      if (!std::isfinite(s) || s < 0.0 || s > 1.0) throw Error(ErrorCode::InvalidSpec, "skills must lie in [0, 1]");
  } else {
    check_law(skill_law, "skill_law", 0.0, 1.0);
  }
  check_law(difficulty_law, "difficulty_law", 0.0, 1.0);
  if (self_bias) {
    if (self_bias->size() < generators)
      throw Error(ErrorCode::InvalidSpec, "self_bias needs " + std::to_string(generators) + " entries");
    for (double b : *self_bias)
      if (!std::isfinite(b) || b < 0.0) throw Error(ErrorCode::InvalidSpec, "self_bias entries must be >= 0");
  } else {
    check_law(self_bias_law, "self_bias_law", 0.0, 1.0);
  }
  double mix = 0.0;
  for (double f : sub_bias_mix) {
    if (!std::isfinite(f) || f < 0.0) throw Error(ErrorCode::InvalidSpec, "sub_bias_mix entries must be >= 0");
    mix += f;
  }
  if (std::abs(mix - 1.0) > 1e-9) throw Error(ErrorCode::InvalidSpec, "sub_bias_mix must sum to 1");
  if (!std::isfinite(noise_sd) || noise_sd < 0.0) throw Error(ErrorCode::InvalidSpec, "noise_sd must be >= 0");
  if (!std::isfinite(slope) || slope <= 0.0) throw Error(ErrorCode::InvalidSpec, "slope must be > 0");
  if (!contamination.empty() && contamination.size() != models)
    throw Error(ErrorCode::InvalidSpec, "contamination needs one entry per model (T+K)");
  if (!(max_clamp_rate >= 0.0 && max_clamp_rate <= 1.0))
    throw Error(ErrorCode::InvalidSpec, "max_clamp_rate must lie in [0, 1]");
}

Ecosystem generate(const EcosystemSpec& spec) {
  spec.validate();
  const std::size_t t = spec.generators;
  const std::size_t k = spec.references;
  const std::size_t m_total = t + k;

  const RngStream root(spec.seed, spec.stream_id);
  RngStream params = root.derive(kParamsTag);
  RngStream sampling = root.derive(kSamplingTag);

  std::vector<double> skills(m_total);
  if (spec.skills) {
    const auto& pool = *spec.skills;
    if (spec.resample_subsets && pool.size() > m_total) {
      RngStream subset = root.derive(kSubsetTag);
      const auto pick = subset.sample_without_replacement(pool.size(), m_total);
      for (std::size_t m = 0; m < m_total; ++m) skills[m] = pool[pick[m]];
    } else {
      std::copy_n(pool.begin(), m_total, skills.begin());
    }
  } else {
    for (auto& s : skills) s = params.uniform(spec.skill_law.lo, spec.skill_law.hi);
  }

  std::vector<double> beta(t);
  if (spec.self_bias) {
    std::copy_n(spec.self_bias->begin(), t, beta.begin());
  } else {
    for (auto& b : beta) b = params.uniform(spec.self_bias_law.lo, spec.self_bias_law.hi);
  }
  double active = 0.0;
  for (std::size_t c = 0; c < 3; ++c)
    if (spec.active_channels[c]) active += spec.sub_bias_mix[c];

  std::vector<double> difficulty(t);
  for (auto& d : difficulty) d = params.uniform(spec.difficulty_law.lo, spec.difficulty_law.hi);
  const double truth_difficulty = params.uniform(spec.difficulty_law.lo, spec.difficulty_law.hi);

  std::size_t clamped = 0;
  const auto clamp01 = [&](double z) {
    if (z < 0.0 || z > 1.0) ++clamped;
    return std::clamp(z, 0.0, 1.0);
  };

  // Success probabilities on each generated benchmark, and the generator's
  // own diagonal cell without its self-bias.
  std::vector<std::vector<double>> prob(m_total, std::vector<double>(t));
  std::vector<double> unbiased_diag(t);
  for (std::size_t m = 0; m < m_total; ++m) {
    for (std::size_t j = 0; j < t; ++j) {
      const double base = logistic(spec.slope * (skills[m] - difficulty[j])) + spec.noise_sd * params.normal();
      if (m == j) {
        unbiased_diag[j] = std::clamp(base, 0.0, 1.0);
        prob[m][j] = clamp01(base + active * beta[j]);
      } else {
        prob[m][j] = clamp01(base);
      }
    }
  }
  std::vector<double> truth_prob(m_total);
  for (std::size_t m = 0; m < m_total; ++m)
    truth_prob[m] = clamp01(logistic(spec.slope * (skills[m] - truth_difficulty)) + spec.noise_sd * params.normal());

  const double cells = static_cast<double>(m_total * t + m_total);
  const double clamp_rate = static_cast<double>(clamped) / cells;
  if (clamp_rate > spec.max_clamp_rate)
    throw Error(ErrorCode::InvalidSpec,
                "probability clamping rate " + std::to_string(clamp_rate) +
                    " exceeds max_clamp_rate; adjust skill_law, difficulty_law, self_bias/self_bias_law or noise_sd");

  const auto observe = [&](double p) {
    if (spec.analytic) return p;
    return static_cast<double>(sampling.binomial(spec.n_items, p)) / static_cast<double>(spec.n_items);
  };
  std::vector<std::vector<double>> acc(m_total, std::vector<double>(t));
  for (std::size_t m = 0; m < m_total; ++m)
    for (std::size_t j = 0; j < t; ++j) acc[m][j] = observe(prob[m][j]);
  std::vector<double> truth_acc(m_total);
  for (std::size_t m = 0; m < m_total; ++m) truth_acc[m] = observe(truth_prob[m]);

  std::vector<std::vector<double>> x_full(m_total, std::vector<double>(t));
  for (std::size_t j = 0; j < t; ++j) {
    const auto rel = relative_row_block(acc, t, j);
    for (std::size_t m = 0; m < m_total; ++m) x_full[m][j] = rel[m];
  }

  const std::vector<double> truth_refs(truth_acc.begin() + static_cast<std::ptrdiff_t>(t), truth_acc.end());
  std::vector<double> truth(m_total);
  for (std::size_t m = 0; m < m_total; ++m) {
    truth[m] = relative_performance(truth_acc[m], truth_refs);
    if (!spec.contamination.empty()) truth[m] = std::max(0.0, truth[m] + spec.contamination[m]);
  }

  std::vector<double> injected(t);
  for (std::size_t j = 0; j < t; ++j) {
    double ref_sum = 0.0;
    for (std::size_t r = t; r < m_total; ++r) ref_sum += prob[r][j];
    if (ref_sum == 0.0) throw Error(ErrorCode::ZeroReferenceSum, "reference models all have zero success");
    injected[j] = static_cast<double>(k) * (prob[j][j] - unbiased_diag[j]) / ref_sum;
  }

  std::vector<std::vector<double>> gen_rows(x_full.begin(), x_full.begin() + static_cast<std::ptrdiff_t>(t));
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < t; ++i) labels.push_back("G" + std::to_string(i + 1));

  return Ecosystem{std::move(truth),
                   PerformanceMatrix::validate(gen_rows, labels),
                   std::move(x_full),
                   std::move(injected),
                   std::move(skills),
                   clamp_rate};
}

EnsembleScore score_weights(const Ecosystem& eco, const WeightVector& alpha) {
  const std::size_t t = eco.generators();
  const std::size_t m_total = eco.x_full.size();
  if (alpha.size() != t) throw Error(ErrorCode::DimensionMismatch, "one weight per generator");

  std::vector<double> xbar(m_total, 0.0);
  for (std::size_t m = 0; m < m_total; ++m)
    for (std::size_t j = 0; j < t; ++j) xbar[m] += alpha[j] * eco.x_full[m][j];

  std::vector<double> inv(t);
  for (std::size_t i = 0; i < t; ++i) inv[i] = alpha[i] > 0.0 ? std::min(1.0 / alpha[i], kMaxReciprocalWeight)
                                                                : kMaxReciprocalWeight;

  EnsembleScore s;
  s.weight_bias_corr = pearson_or_default(inv, eco.injected_bias, 0.0).value;
  const std::vector<double> ref_ens(xbar.begin() + static_cast<std::ptrdiff_t>(t), xbar.end());
  const std::vector<double> ref_truth(eco.truth_performance.begin() + static_cast<std::ptrdiff_t>(t),
                                      eco.truth_performance.end());
  s.effectiveness_corr = pearson_or_default(ref_ens, ref_truth, 0.0).value;
  double bias = 0.0;
  for (std::size_t i = 0; i < t; ++i) bias += evaluation_bias(xbar[i], eco.truth_performance[i]);
  s.residual_self_bias = bias / static_cast<double>(t);
  return s;
}

StrategyComparison compare_strategies(const Ecosystem& eco, const std::vector<Strategy>& strategies,
                                      const SolverConfig& config) {
  if (strategies.empty()) throw Error(ErrorCode::InvalidConfig, "no strategies to compare");
  StrategyComparison out;
  out.naive = score_weights(eco, WeightVector::uniform(eco.generators()));
  for (const auto& strategy : strategies) {
    SolverConfig cfg = config;
    cfg.strategy = strategy;
    cfg.record_trace = false;
    SolveResult result = [&] {
      try {
        return solve(eco.x, cfg);
      } catch (const MaxIterationsExceeded& e) {
        return e.last_iterate();
      }
    }();
    const bool converged = result.final_delta <= cfg.conv_epsilon;
    out.outcomes.push_back(
        {strategy, result.weights, score_weights(eco, result.weights), converged, result.iterations});
  }
  return out;
}

MeanSe mean_se(const std::vector<double>& values) {
  if (values.empty()) return {};
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / n;
  if (values.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

std::vector<StrategyComparison> simulate_seeds(const EcosystemSpec& base, const std::vector<Strategy>& strategies,
                                               const SolverConfig& config, std::size_t seeds,
                                               const ParallelOptions& opts) {
  std::vector<std::optional<StrategyComparison>> slots(seeds);
  for_each_index(seeds, opts, [&](std::size_t s) {
    EcosystemSpec spec = base;
    spec.stream_id = s;
    slots[s] = compare_strategies(generate(spec), strategies, config);
  });
  std::vector<StrategyComparison> out;
  out.reserve(seeds);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

namespace {

std::vector<SweepRow> run_sweep(const std::vector<EcosystemSpec>& specs, const std::vector<std::size_t>& values,
                                std::size_t seeds, const SolverConfig& config, const ParallelOptions& opts) {
  SolverConfig cfg = config;
  cfg.strategy.kind = StrategyKind::ConsistencySilencer;
  const std::vector<Strategy> reweighted{cfg.strategy};

  const std::size_t cells = specs.size() * seeds;
  std::vector<std::optional<StrategyComparison>> slots(cells);
  for_each_index(cells, opts, [&](std::size_t c) {
    EcosystemSpec spec = specs[c / seeds];
    spec.stream_id = c % seeds;
    slots[c] = compare_strategies(generate(spec), reweighted, cfg);
  });

  std::vector<SweepRow> rows;
  for (std::size_t v = 0; v < specs.size(); ++v) {
    std::vector<double> nb, ne, rb, re, wb;
    SweepRow row;
    row.value = values[v];
    for (std::size_t s = 0; s < seeds; ++s) {
      const auto& cmp = *slots[v * seeds + s];
      const auto& o = cmp.outcomes.front();
      nb.push_back(cmp.naive.residual_self_bias);
      ne.push_back(cmp.naive.effectiveness_corr);
      rb.push_back(o.score.residual_self_bias);
      re.push_back(o.score.effectiveness_corr);
      wb.push_back(o.score.weight_bias_corr);
      if (!o.converged) ++row.non_converged;
    }
    row.naive_bias = mean_se(nb);
    row.naive_effectiveness = mean_se(ne);
    row.reweighted_bias = mean_se(rb);
    row.reweighted_effectiveness = mean_se(re);
    row.weight_bias_corr = mean_se(wb);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

std::vector<SweepRow> sweep_t(const EcosystemSpec& base, const std::vector<std::size_t>& t_values, std::size_t seeds,
                              const SolverConfig& config, const ParallelOptions& opts) {
  std::vector<EcosystemSpec> specs;
  for (std::size_t t : t_values) {
    if (t < 3) throw Error(ErrorCode::InvalidSpec, "T sweep values must be >= 3");
    EcosystemSpec spec = base;
    spec.generators = t;
    spec.validate();
    specs.push_back(spec);
  }
  return run_sweep(specs, t_values, seeds, config, opts);
}

std::vector<SweepRow> sweep_n(const EcosystemSpec& base, const std::vector<std::size_t>& n_values, std::size_t seeds,
                              const SolverConfig& config, const ParallelOptions& opts) {
  std::vector<EcosystemSpec> specs;
  for (std::size_t i = 0; i < n_values.size(); ++i) {
    if (n_values[i] < 1) throw Error(ErrorCode::InvalidSpec, "N sweep values must be positive");
    if (i > 0 && n_values[i] < n_values[i - 1])
      throw Error(ErrorCode::InvalidSpec, "N sweep values must be non-decreasing");
    EcosystemSpec spec = base;
    spec.n_items = n_values[i];
    spec.analytic = false;
    specs.push_back(spec);
  }
  return run_sweep(specs, n_values, seeds, config, opts);
}

SubBiasMeasurement measure_sub_biases(const EcosystemSpec& spec) {
  const auto with_channels = [&](std::array<bool, 3> channels) {
    EcosystemSpec s = spec;
    s.active_channels = channels;
    return generate(s);
  };
  const Ecosystem none = with_channels({false, false, false});
  const Ecosystem all = with_channels(spec.active_channels);
  const Ecosystem style = with_channels({true, false, false});
  const Ecosystem domain = with_channels({false, true, false});
  const Ecosystem label = with_channels({false, false, true});

  SubBiasMeasurement out;
  for (std::size_t j = 0; j < spec.generators; ++j) {
    const double baseline = none.x(j, j);
    out.total.push_back(evaluation_bias(all.x(j, j), baseline));
    out.style.push_back(sub_bias(style.x(j, j), baseline, SubBiasKind::Style).value);
    out.domain.push_back(sub_bias(domain.x(j, j), baseline, SubBiasKind::Domain).value);
    out.label.push_back(sub_bias(label.x(j, j), baseline, SubBiasKind::Label).value);
  }
  return out;
}

}  // namespace silencer
