// Acceptance suite: one PASS/FAIL line per criterion. Thresholds are fixed
// here and are not tuned to the outcome.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "oracle.hpp"
#include "silencer/bias_metrics.hpp"
#include "silencer/ecosystem.hpp"
#include "silencer/ensemble.hpp"
#include "silencer/io.hpp"
#include "silencer/selflabel.hpp"

using namespace silencer;
namespace fs = std::filesystem;
using V = std::vector<double>;

namespace {

constexpr std::uint64_t kSeed = 1;

struct Outcome {
  bool pass;
  std::string detail;
};

EcosystemSpec acceptance_spec() {
  EcosystemSpec s;  // T = 7, K = 9, n_items = 100, binomial, beta ~ U(0.02, 0.22)
  s.seed = kSeed;
  return s;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

ModelEnsemble random_ensemble(RngStream& r) {
  const std::size_t t = 1 + r.uniform_index(8), y = 2 + r.uniform_index(15);
  std::vector<ModelDistribution> d;
  for (std::size_t i = 0; i < t; ++i) d.emplace_back(normalize_to_simplex(r.dirichlet(y, 1.0)).values());
  return ModelEnsemble(std::move(d));
}

PerformanceMatrix random_matrix(RngStream& r, std::size_t t) {
  std::vector<V> g(t, V(t));
  for (auto& row : g)
    for (auto& e : row) e = r.uniform();
  return PerformanceMatrix::validate(g);
}

int run_cli(const std::string& args, std::string* out = nullptr) {
  const std::string cmd = std::string(SILENCER_CLI) + " " + args + " 2>&1";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (pipe == nullptr) return -1;
  std::string text;
  char buf[4096];
  while (std::fgets(buf, sizeof buf, pipe) != nullptr) text += buf;
  const int status = ::pclose(pipe);
  if (out) *out = text;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

double spearman(const V& a, const V& b) {
  const auto ranks = [](const V& v) {
    V r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      double less = 0, equal = 0;
      for (double w : v) {
        less += w < v[i];
        equal += w == v[i];
      }
      r[i] = less + (equal + 1) / 2;
    }
    return r;
  };
  return oracle::corr(ranks(a), ranks(b));
}

// --- criteria -------------------------------------------------------------

Outcome self_labeling_theorem() {
  RngStream r(kSeed, 1);
  int gap_ok = 0, identity_ok = 0;
  double worst_gap = 1, worst_residual = 0;
  for (int k = 0; k < 1000; ++k) {
    const auto g = gap_identity_check(random_ensemble(r));
    gap_ok += g.gap >= -1e-14;
    identity_ok += g.identity_residual <= 1e-12;
    worst_gap = std::min(worst_gap, g.gap);
    worst_residual = std::max(worst_residual, g.identity_residual);
  }
  return {gap_ok == 1000 && identity_ok == 1000,
          fmt("gap>=-1e-14 %d/1000 (min %.3g), identity<=1e-12 %d/1000 (max %.3g)", gap_ok, worst_gap,
              identity_ok, worst_residual)};
}

Outcome monte_carlo_consistency() {
  RngStream r(kSeed, 2);
  int ok = 0;
  for (int k = 0; k < 100; ++k) {
    const auto ens = random_ensemble(r);
    const auto mc = monte_carlo_accuracies(ens, 200'000, RngStream(kSeed, 1000 + k));
    ok += std::abs(mc.e1_hat - e1(ens)) <= 4 * mc.std_err.first &&
          std::abs(mc.e2_hat - e2(ens)) <= 4 * mc.std_err.second;
  }
  return {ok >= 99, fmt("both estimates within 4 s.e. in %d/100 ensembles (need >= 99)", ok)};
}

Outcome contraction_and_uniqueness() {
  RngStream r(kSeed, 3);
  int converged = 0, monotone = 0, agree = 0;
  std::size_t max_iter = 0;
  double worst_spread = 0;
  SolverConfig cfg;
  cfg.record_trace = true;
  SolverConfig tight;
  tight.conv_epsilon = 1e-13;
  for (int k = 0; k < 1000; ++k) {
    const auto x = random_matrix(r, 3 + k % 8);
    try {
      const auto res = solve(x, cfg);
      ++converged;
      max_iter = std::max(max_iter, res.iterations);
      const auto& d = res.trace->l1_deltas;
      bool dec = true;
      for (std::size_t i = d.size() / 2 + 1; i < d.size(); ++i) dec = dec && d[i] < d[i - 1];
      monotone += dec;
    } catch (const MaxIterationsExceeded&) {
    }
    if (k < 100) {
      RngStream starts(kSeed, 10'000 + k);
      std::vector<WeightVector> ends;
      for (int s = 0; s < 10; ++s)
        ends.push_back(solve(x, tight, normalize_to_simplex(starts.dirichlet(x.size(), 1.0))).weights);
      double spread = 0;
      for (const auto& a : ends)
        for (const auto& b : ends) spread = std::max(spread, a.l1_distance(b));
      agree += spread <= 1e-8;
      worst_spread = std::max(worst_spread, spread);
    }
  }
  return {converged == 1000 && agree == 100 && monotone >= 990,
          fmt("converged %d/1000 (max %zu iters); 10-start agreement %d/100 (worst l1 spread %.3g); "
              "monotone tail %d/1000 (need >= 990)",
              converged, max_iter, agree, worst_spread, monotone)};
}

Outcome one_step_uniform() {
  bool ok = true;
  for (std::size_t t = 2; t <= 10; ++t) {
    // Equal row sums: X times uniform is constant, so no column can correlate
    // positively with any x-bar the iteration reaches.
    std::vector<V> g(t, V(t));
    for (std::size_t i = 0; i < t; ++i)
      for (std::size_t j = 0; j < t; ++j) g[i][j] = 0.1 + 0.8 * static_cast<double>((i + j) % t) / (t - 1);
    const auto x = PerformanceMatrix::validate(g);
    const auto next = apply_update(x, WeightVector::uniform(t), Strategy::silencer());
    for (double w : next.values()) ok = ok && w == next[0];
    ok = ok && solve(x, {}).iterations == 1;
  }
  const auto x = PerformanceMatrix::validate({{0.1, 0.2, 0.3}, {0.5, 0.5, 0.6}, {0.9, 0.7, 0.8}});
  const auto raw = update_alpha(x, V{1.0, 0.5, 0.0}, Strategy::silencer()).raw;
  const auto w = normalize_to_simplex(raw);
  ok = ok && w[0] == w[1] && w[1] == w[2];
  return {ok, "all weights identical after one update for equal-row-sum matrices T=2..10 and for an anti-correlated x-bar"};
}

Outcome scale_invariance() {
  RngStream r(kSeed, 5);
  int ok = 0;
  double worst = 0;
  for (int k = 0; k < 100; ++k) {
    const auto x = random_matrix(r, 3 + k % 8);
    const double d = solve(x, {}).weights.l1_distance(solve(x.scaled(17.3), {}).weights);
    worst = std::max(worst, d);
    ok += d <= 1e-10;
  }
  return {ok == 100, fmt("%d/100 within 1e-10 (max l1 %.3g)", ok, worst)};
}

Outcome oracle_fixed_point() {
  const oracle::Grid g{{0.9, 0.8, 0.2}, {0.5, 0.6, 0.3}, {0.4, 0.4, 0.9}};
  const auto fp = oracle::iterate(g, V(3, 1.0 / 3), 1e-6, 1e-14);
  const auto lib = solve(PerformanceMatrix::validate(g), {});
  const double lib_err = oracle::l1(lib.weights.values(), fp.alpha);

  const fs::path dir = fs::temp_directory_path() / ("silencer_acc_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  std::ofstream(dir / "m.csv") << "model,b1,b2,b3\nA,0.9,0.8,0.2\nB,0.5,0.6,0.3\nC,0.4,0.4,0.9\n";
  std::string out;
  const int code = run_cli("solve --matrix " + (dir / "m.csv").string(), &out);
  fs::remove_all(dir);
  std::istringstream lines(out);
  V cli(3, NAN);
  std::string label;
  for (double& v : cli) lines >> label >> v;
  double cli_err = 0;
  for (std::size_t i = 0; i < 3; ++i) cli_err = std::max(cli_err, std::abs(cli[i] - fp.alpha[i]));
  return {fp.converged && lib_err <= 1e-8 && code == 0 && cli_err <= 1e-8,
          fmt("oracle (%.10g, %.10g, %.4g); library l1 err %.3g; CLI exit %d, max err %.3g", fp.alpha[0],
              fp.alpha[1], fp.alpha[2], lib_err, code, cli_err)};
}

Outcome strategy_ordering() {
  const std::vector<Strategy> strategies{Strategy::silencer(), Strategy::of(StrategyKind::SelfBias),
                                         Strategy::of(StrategyKind::Accuracy)};
  const auto runs = simulate_seeds(acceptance_spec(), strategies, {}, 200);
  std::array<V, 3> corr;
  int silencer_beats_accuracy = 0;
  for (const auto& c : runs) {
    for (std::size_t k = 0; k < 3; ++k) corr[k].push_back(c.outcomes[k].score.weight_bias_corr);
    silencer_beats_accuracy += c.outcomes[0].score.weight_bias_corr > c.outcomes[2].score.weight_bias_corr;
  }
  const double s = mean_se(corr[0]).mean, sb = mean_se(corr[1]).mean, a = mean_se(corr[2]).mean;
  return {s > sb && sb > a && silencer_beats_accuracy >= 160,
          fmt("mean weight_bias_corr silencer %.4f, selfbias %.4f, accuracy %.4f (need silencer > selfbias > "
              "accuracy); silencer > accuracy in %d/200 seeds (need >= 160)",
              s, sb, a, silencer_beats_accuracy)};
}

Outcome reweighting_dominance() {
  const auto spec = acceptance_spec();
  const auto runs = simulate_seeds(spec, {Strategy::silencer()}, {}, 200);
  int dominates = 0, dominates_abs = 0;
  for (const auto& c : runs) {
    dominates += c.outcomes[0].score.residual_self_bias <= c.naive.residual_self_bias;
    dominates_abs += std::abs(c.outcomes[0].score.residual_self_bias) <= std::abs(c.naive.residual_self_bias);
  }
  const std::vector<std::size_t> ts{3, 4, 5, 6, 7};
  const auto trows = sweep_t(spec, ts, 200);
  V tv, tb;
  std::string tdesc;
  bool eff_ok = true;
  for (const auto& row : trows) {
    tv.push_back(static_cast<double>(row.value));
    tb.push_back(row.reweighted_bias.mean);
    eff_ok = eff_ok && row.reweighted_effectiveness.mean >= row.naive_effectiveness.mean;
    tdesc += fmt(" %.4f", row.reweighted_bias.mean);
  }
  const double rho = spearman(tv, tb);
  const auto nrows = sweep_n(spec, {50, 100, 200}, 200);
  bool n_bias = true, n_corr = true;
  std::string ndesc;
  for (std::size_t i = 0; i < nrows.size(); ++i) {
    ndesc += fmt(" (%.4f, %.4f)", nrows[i].reweighted_bias.mean, nrows[i].weight_bias_corr.mean);
    if (i == 0) continue;
    n_bias = n_bias && nrows[i].reweighted_bias.mean <= nrows[i - 1].reweighted_bias.mean;
    n_corr = n_corr && nrows[i].weight_bias_corr.mean >= nrows[i - 1].weight_bias_corr.mean;
  }
  return {dominates >= 180 && rho <= -0.8 && n_bias && n_corr,
          fmt("reweighted <= naive in %d/200 seeds (need >= 180; |B| form %d/200); T-sweep bias means%s, "
              "Spearman %.2f (need <= -0.8), reweighted effectiveness >= naive at every T: %s; "
              "N-sweep (bias, weight_bias_corr)%s: bias non-increasing %s, corr non-decreasing %s",
              dominates, dominates_abs, tdesc.c_str(), rho, eff_ok ? "yes" : "no", ndesc.c_str(),
              n_bias ? "yes" : "no", n_corr ? "yes" : "no")};
}

Outcome bias_arithmetic() {
  const auto c = *bias_decomposition(0.1032, 0.0205, 0.0247, 0.0921).relative_contributions;
  const std::array<double, 3> expected{14.96, 17.99, 67.05};
  double worst = 0;
  for (std::size_t i = 0; i < 3; ++i) worst = std::max(worst, std::abs(100 * c[i] - expected[i]));
  return {worst <= 0.05,
          fmt("contributions %.2f / %.2f / %.2f %% (max deviation %.3f pp)", 100 * c[0], 100 * c[1], 100 * c[2], worst)};
}

Outcome cli_reproducibility() {
  const fs::path dir = fs::temp_directory_path() / ("silencer_rep_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  std::ofstream(dir / "m.csv") << "model,b1,b2,b3\nA,0.9,0.8,0.2\nB,0.5,0.6,0.3\nC,0.4,0.4,0.9\n";
  std::ofstream(dir / "d.txt") << "0.2 0.5 0.3\n0.6 0.3 0.1\n0.1 0.1 0.8\n";
  std::ofstream(dir / "c.json") << R"({"ecosystem": {"seed": 1}, "seeds": 20})";
  const auto p = [&](const char* f) { return (dir / f).string(); };
  const std::vector<std::pair<std::string, std::string>> runs{
      {"solve", "solve --matrix " + p("m.csv") + " --trace " + p("t.csv")},
      {"solve-selfbias", "solve --matrix " + p("m.csv") + " --strategy selfbias"},
      {"simulate", "simulate --config " + p("c.json")},
      {"sweep-t", "sweep-t --config " + p("c.json") + " --t-values 3,5"},
      {"sweep-n", "sweep-n --config " + p("c.json") + " --n-values 50,100"},
      {"selflabel", "selflabel --dists " + p("d.txt") + " --draws 50000 --seed 9"},
      {"bias", "bias --gen 1.1 --human 1.0"},
  };
  int ok = 0;
  std::string failed;
  for (const auto& [name, args] : runs) {
    const auto report = (dir / (name + ".json")).string();
    const bool pass = run_cli(args + " --report " + report) == 0 && run_cli("replay --report " + report) == 0;
    ok += pass;
    if (!pass) failed += " " + name;
  }
  fs::remove_all(dir);
  return {ok == static_cast<int>(runs.size()),
          fmt("%d/%zu commands replay to identical payloads%s%s", ok, runs.size(), failed.empty() ? "" : "; failed:",
              failed.c_str())};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "self-labeling theorem", 5, self_labeling_theorem},
      {2, "Monte Carlo consistency", 30, monte_carlo_consistency},
      {3, "contraction and uniqueness", 60, contraction_and_uniqueness},
      {4, "one-step uniform", 5, one_step_uniform},
      {5, "scale invariance", 5, scale_invariance},
      {6, "oracle fixed point (library + CLI)", 5, oracle_fixed_point},
      {7, "strategy ordering", 300, strategy_ordering},
      {8, "reweighting dominance and sweeps", 600, reweighting_dominance},
      {9, "bias decomposition", 1, bias_arithmetic},
      {10, "CLI reproducibility", 60, cli_reproducibility},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool pass = o.pass && secs <= c.budget_s;
    failures += !pass;
    std::printf("%s  criterion %2d  %-36s %7.2fs / %gs  %s\n", pass ? "PASS" : "FAIL", c.id, c.name, secs,
                c.budget_s, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
