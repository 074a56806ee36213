#include "silencer/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <ostream>

#include <CLI11.hpp>

#include "silencer/bias_metrics.hpp"
#include "silencer/ecosystem.hpp"
#include "silencer/ensemble.hpp"
#include "silencer/selflabel.hpp"

namespace silencer::cli {

using nlohmann::json;

namespace {

constexpr std::size_t kDefaultSeeds = 50;
constexpr std::size_t kDefaultDraws = 200'000;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::MaxIterationsExceeded:
    case ErrorCode::NegativeRawWeight:
      return kNonConvergence;
    case ErrorCode::InvalidConfig:
      return kUsage;
    default:
      return kDataError;
  }
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
}

std::optional<std::uint64_t> seed_from_env() {
  const char* v = std::getenv("SILENCER_SEED");
  if (v == nullptr || *v == '\0') return std::nullopt;
  try {
    std::size_t used = 0;
    const auto seed = std::stoull(v, &used);
    if (used != std::string(v).size()) throw std::invalid_argument(v);
    return seed;
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidConfig, "SILENCER_SEED must be an unsigned integer");
  }
}

std::vector<Strategy> strategies_from(const json& names, double delta) {
  std::vector<Strategy> out;
  for (const auto& n : names) out.push_back({parse_strategy(n.get<std::string>()), delta});
  return out;
}

// Resolved run configuration for the ecosystem commands.
json ecosystem_config(const std::string& path, std::optional<std::size_t> seeds_flag) {
  const json file = read_json_file(path);
  const json& eco = file.contains("ecosystem") ? file.at("ecosystem") : file;
  EcosystemSpec spec = ecosystem_spec_from_json(eco);
  if (const auto env = seed_from_env()) spec.seed = *env;
  const SolverConfig solver = solver_config_from_json(file.value("solver", json::object()));
  json cfg{{"ecosystem", to_json(spec)},
           {"solver", to_json(solver)},
           {"seeds", seeds_flag.value_or(file.value("seeds", kDefaultSeeds))},
           {"strategies", file.value("strategies", json{"silencer", "selfbias", "accuracy"})}};
  return cfg;
}

SolveResult run_solve(const json& cfg) {
  return solve(matrix_from_json(cfg.at("matrix")), solver_config_from_json(cfg.at("solver")));
}

json summarize(const std::vector<StrategyComparison>& runs) {
  json summary = json::array();
  if (runs.empty()) return summary;
  for (std::size_t s = 0; s < runs.front().outcomes.size(); ++s) {
    std::vector<double> wb, eff, bias;
    std::size_t non_converged = 0, beats_naive = 0;
    for (const auto& r : runs) {
      const auto& o = r.outcomes[s];
      wb.push_back(o.score.weight_bias_corr);
      eff.push_back(o.score.effectiveness_corr);
      bias.push_back(o.score.residual_self_bias);
      if (!o.converged) ++non_converged;
      if (o.score.residual_self_bias <= r.naive.residual_self_bias) ++beats_naive;
    }
    const auto m = [](const std::vector<double>& v) {
      const auto ms = mean_se(v);
      return json{{"mean", ms.mean}, {"se", ms.se}};
    };
    summary.push_back(json{{"strategy", std::string(to_string(runs.front().outcomes[s].strategy.kind))},
                           {"weight_bias_corr", m(wb)},
                           {"effectiveness_corr", m(eff)},
                           {"residual_self_bias", m(bias)},
                           {"bias_not_above_naive", beats_naive},
                           {"non_converged", non_converged}});
  }
  std::vector<double> naive;
  for (const auto& r : runs) naive.push_back(r.naive.residual_self_bias);
  const auto ms = mean_se(naive);
  summary.push_back(json{{"strategy", "naive"}, {"residual_self_bias", json{{"mean", ms.mean}, {"se", ms.se}}}});
  return summary;
}

json selflabel_payload(const json& cfg, std::vector<std::string>& warnings) {
  std::vector<ModelDistribution> dists;
  for (const auto& p : cfg.at("distributions")) dists.emplace_back(p.get<std::vector<double>>());
  const ModelEnsemble ens(std::move(dists));
  json payload;
  try {
    const auto g = gap_identity_check(ens);
    payload["e1"] = e1(ens);
    payload["e2"] = e2(ens);
    payload["gap"] = g.gap;
    payload["pairwise_form"] = g.pairwise_form;
    payload["identity_residual"] = g.identity_residual;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::TooLargeForExact) throw;
    warnings.emplace_back("exact sums skipped: " + std::string(e.what()));
  }
  const auto mc = monte_carlo_accuracies(ens, cfg.at("draws").get<std::size_t>(),
                                         RngStream(cfg.at("seed").get<std::uint64_t>(), 0));
  payload["monte_carlo"] = json{{"draws", mc.draws},
                                {"e1_hat", mc.e1_hat},
                                {"e2_hat", mc.e2_hat},
                                {"e1_std_err", mc.std_err.first},
                                {"e2_std_err", mc.std_err.second}};
  return payload;
}

json run_ecosystem_command(const std::string& command, const json& cfg, const ParallelOptions& opts) {
  const EcosystemSpec spec = ecosystem_spec_from_json(cfg.at("ecosystem"));
  const SolverConfig solver = solver_config_from_json(cfg.at("solver"));
  const auto seeds = cfg.at("seeds").get<std::size_t>();
  if (command == "simulate") {
    const auto runs = simulate_seeds(spec, strategies_from(cfg.at("strategies"), solver.strategy.delta), solver,
                                     seeds, opts);
    json per_seed = json::array();
    for (const auto& r : runs) per_seed.push_back(to_json(r));
    return json{{"summary", summarize(runs)}, {"per_seed", per_seed}};
  }
  if (command == "sweep-t")
    return json{{"rows", to_json(sweep_t(spec, cfg.at("t_values").get<std::vector<std::size_t>>(), seeds, solver,
                                         opts))}};
  return json{
      {"rows", to_json(sweep_n(spec, cfg.at("n_values").get<std::vector<std::size_t>>(), seeds, solver, opts))}};
}

json execute_with(const std::string& command, const json& cfg, std::vector<std::string>& warnings,
                  const ParallelOptions& opts) {
  if (command == "solve") {
    const auto result = run_solve(cfg);
    for (std::size_t i = 0; i < result.degeneracy_flags.size(); ++i)
      if (result.degeneracy_flags[i])
        warnings.push_back("correlation fallback fired for generator " + std::to_string(i + 1));
    return to_json(result);
  }
  if (command == "simulate" || command == "sweep-t" || command == "sweep-n")
    return run_ecosystem_command(command, cfg, opts);
  if (command == "selflabel") return selflabel_payload(cfg, warnings);
  if (command == "bias") {
    const double b = evaluation_bias(cfg.at("gen").get<double>(), cfg.at("human").get<double>());
    return json{{"evaluation_bias", b}};
  }
  throw Error(ErrorCode::InvalidConfig, "unknown command '" + command + "'");
}

void print_weights(std::ostream& out, const PerformanceMatrix& x, const SolveResult& r) {
  out << std::setprecision(17);
  for (std::size_t i = 0; i < r.weights.size(); ++i) out << x.labels()[i] << ' ' << r.weights[i] << '\n';
  out << "iterations " << r.iterations << "\nfinal_l1_delta " << r.final_delta << '\n';
}

void print_rows(std::ostream& out, const json& rows, const char* axis) {
  out << axis << "  naive_B  reweighted_B  naive_rp  reweighted_rp  weight_bias_corr\n" << std::setprecision(5);
  for (const auto& r : rows) {
    out << r.at("value").get<std::size_t>() << "  " << r.at("naive_bias").at("mean").get<double>() << "  "
        << r.at("reweighted_bias").at("mean").get<double>() << "  "
        << r.at("naive_effectiveness").at("mean").get<double>() << "  "
        << r.at("reweighted_effectiveness").at("mean").get<double>() << "  "
        << r.at("weight_bias_corr").at("mean").get<double>() << '\n';
  }
}

void emit_report(const std::string& path, const std::string& command, const json& cfg, const json& payload,
                 const std::vector<std::string>& warnings) {
  if (path.empty()) return;
  write_report(RunReport{command, cfg, payload, warnings, provenance_now()}, path);
}

}  // namespace

json execute(const std::string& command, const json& config_echo, std::vector<std::string>& warnings) {
  return execute_with(command, config_echo, warnings, {});
}

int dispatch(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Self-bias analysis for model-generated benchmarks", "silencer"};
  app.require_subcommand(1);

  // solve
  std::string matrix_path, strategy_name = "silencer", trace_path, report_path;
  double delta = Strategy::kDefaultDelta, eps = 1e-6;
  std::size_t max_iter = 10'000;
  auto* solve_cmd = app.add_subcommand("solve", "Fixed-point ensemble weights for a performance matrix");
  solve_cmd->add_option("--matrix", matrix_path, "Matrix CSV")->required();
  solve_cmd->add_option("--strategy", strategy_name, "selfbias|accuracy|consistency|silencer")
      ->check(CLI::IsMember({"selfbias", "accuracy", "consistency", "silencer"}));
  solve_cmd->add_option("--delta", delta, "Silencer additive floor");
  solve_cmd->add_option("--eps", eps, "l1 stopping threshold");
  solve_cmd->add_option("--max-iter", max_iter, "Iteration cap");
  solve_cmd->add_option("--trace", trace_path, "Write the convergence trace CSV here");
  solve_cmd->add_option("--report", report_path, "Write a run report here");

  // simulate / sweeps
  std::string config_path;
  std::optional<std::size_t> seeds;
  int threads = 0;
  std::vector<std::size_t> t_values, n_values;
  auto* sim_cmd = app.add_subcommand("simulate", "Compare strategies over seeded synthetic ecosystems");
  auto* sweep_t_cmd = app.add_subcommand("sweep-t", "Generator-count sweep");
  auto* sweep_n_cmd = app.add_subcommand("sweep-n", "Benchmark-size sweep");
  for (auto* cmd : {sim_cmd, sweep_t_cmd, sweep_n_cmd}) {
    cmd->add_option("--config", config_path, "Ecosystem config (JSON)")->required();
    cmd->add_option("--seeds", seeds, "Number of seeds");
    cmd->add_option("--report", report_path, "Write a run report here");
    cmd->add_option("--threads", threads, "OpenMP threads (0 = default)");
  }
  sweep_t_cmd->add_option("--t-values", t_values, "Comma-separated T values")->delimiter(',')->required();
  sweep_n_cmd->add_option("--n-values", n_values, "Comma-separated N values")->delimiter(',')->required();

  // selflabel
  std::string dists_path;
  std::size_t draws = kDefaultDraws;
  std::optional<std::uint64_t> mc_seed;
  auto* sl_cmd = app.add_subcommand("selflabel", "Self- vs cross-labeling expected accuracy");
  sl_cmd->add_option("--dists", dists_path, "Distributions file")->required();
  sl_cmd->add_option("--draws", draws, "Monte Carlo draws");
  sl_cmd->add_option("--seed", mc_seed, "Monte Carlo seed");
  sl_cmd->add_option("--report", report_path, "Write a run report here");

  // bias
  double gen = 0.0, human = 0.0;
  auto* bias_cmd = app.add_subcommand("bias", "Evaluation bias from two relative performances");
  bias_cmd->add_option("--gen", gen, "Relative performance on the generated benchmark")->required();
  bias_cmd->add_option("--human", human, "Relative performance on the human benchmark")->required();
  bias_cmd->add_option("--report", report_path, "Write a run report here");

  // replay
  std::string replay_path;
  auto* replay_cmd = app.add_subcommand("replay", "Re-run a report from its config_echo and compare payloads");
  replay_cmd->add_option("--report", replay_path, "Report to replay")->required();

  std::vector<const char*> cargv;
  for (const auto& a : argv) cargv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(cargv.size()), cargv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kUsage;
  }

  const ParallelOptions opts{Execution::Parallel, threads};
  try {
    std::vector<std::string> warnings;
    if (*solve_cmd) {
      SolverConfig cfg;
      cfg.strategy = {parse_strategy(strategy_name), delta};
      cfg.conv_epsilon = eps;
      cfg.max_iterations = max_iter;
      cfg.record_trace = !trace_path.empty();
      cfg.validate();
      const PerformanceMatrix x = read_matrix_csv(matrix_path);
      const json config{{"matrix", to_json(x)}, {"solver", to_json(cfg)}};
      SolveResult result = [&] {
        try {
          return run_solve(config);
        } catch (const MaxIterationsExceeded& e) {
          if (!trace_path.empty() && e.last_iterate().trace) write_trace_csv(*e.last_iterate().trace, trace_path);
          throw;
        }
      }();
      if (!trace_path.empty() && result.trace) write_trace_csv(*result.trace, trace_path);
      const json payload = execute_with("solve", config, warnings, opts);
      print_weights(out, x, result);
      for (const auto& w : warnings) err << "warning: " << w << '\n';
      emit_report(report_path, "solve", config, payload, warnings);
      return kOk;
    }
    if (*sim_cmd || *sweep_t_cmd || *sweep_n_cmd) {
      const std::string command = *sim_cmd ? "simulate" : (*sweep_t_cmd ? "sweep-t" : "sweep-n");
      json config = ecosystem_config(config_path, seeds);
      if (*sweep_t_cmd) config["t_values"] = t_values;
      if (*sweep_n_cmd) config["n_values"] = n_values;
      const json payload = execute_with(command, config, warnings, opts);
      if (command == "simulate") {
        out << std::setprecision(5) << "strategy  weight_bias_corr  effectiveness  residual_B  non_converged\n";
        for (const auto& s : payload.at("summary")) {
          out << s.at("strategy").get<std::string>();
          if (s.contains("weight_bias_corr"))
            out << "  " << s.at("weight_bias_corr").at("mean").get<double>() << "  "
                << s.at("effectiveness_corr").at("mean").get<double>();
          out << "  " << s.at("residual_self_bias").at("mean").get<double>();
          if (s.contains("non_converged")) out << "  " << s.at("non_converged").get<std::size_t>();
          out << '\n';
        }
      } else {
        print_rows(out, payload.at("rows"), command == "sweep-t" ? "T" : "N");
      }
      emit_report(report_path, command, config, payload, warnings);
      return kOk;
    }
    if (*sl_cmd) {
      const ModelEnsemble ens = read_distributions(dists_path);
      json dists = json::array();
      for (const auto& d : ens.distributions()) dists.push_back(d.probs());
      std::uint64_t seed = 0;
      if (mc_seed) {
        seed = *mc_seed;
      } else if (const auto env = seed_from_env()) {
        seed = *env;
      }
      const json config{{"distributions", dists}, {"draws", draws}, {"seed", seed}};
      const json payload = execute_with("selflabel", config, warnings, opts);
      out << std::setprecision(12);
      for (const char* key : {"e1", "e2", "gap", "identity_residual"})
        if (payload.contains(key)) out << key << ' ' << payload.at(key).get<double>() << '\n';
      const auto& mc = payload.at("monte_carlo");
      out << "e1_hat " << mc.at("e1_hat").get<double>() << " +- " << mc.at("e1_std_err").get<double>() << '\n'
          << "e2_hat " << mc.at("e2_hat").get<double>() << " +- " << mc.at("e2_std_err").get<double>() << '\n';
      for (const auto& w : warnings) err << "warning: " << w << '\n';
      emit_report(report_path, "selflabel", config, payload, warnings);
      return kOk;
    }
    if (*bias_cmd) {
      const json config{{"gen", gen}, {"human", human}};
      const json payload = execute_with("bias", config, warnings, opts);
      const double b = payload.at("evaluation_bias").get<double>();
      out << std::setprecision(17) << "evaluation_bias " << b << '\n'
          << (b > 0 ? "overestimated on the generated benchmark\n"
                    : b < 0 ? "underestimated on the generated benchmark\n" : "no bias\n");
      emit_report(report_path, "bias", config, payload, warnings);
      return kOk;
    }
    if (*replay_cmd) {
      const RunReport old = read_report(replay_path);
      const json payload = execute_with(old.command, old.config_echo, warnings, opts);
      if (payload == old.payload) {
        out << "payload identical\n";
        return kOk;
      }
      err << "payload differs from the recorded run\n";
      return kDataError;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const json::exception& e) {
    err << "error: malformed configuration: " << e.what() << '\n';
    return kDataError;
  }
  return kUsage;
}

}  // namespace silencer::cli
