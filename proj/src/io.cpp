#include "silencer/io.hpp"

#include <charconv>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "silencer/rng.hpp"

namespace silencer {

using nlohmann::json;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    fields.push_back(trim(std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos
                                                                                            : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return fields;
}

[[noreturn]] void parse_fail(std::size_t line, std::size_t column, const std::string& msg) {
  throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + msg);
}

double parse_number(const std::string& token, std::size_t line, std::size_t column) {
  double v = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (!token.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (token.empty() || ec != std::errc{} || ptr != last) parse_fail(line, column, "'" + token + "' is not a number");
  return v;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for writing");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, "write to '" + path.string() + "' failed");
}

std::string iso_utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

json law_json(const UniformLaw& l) { return json{{"lo", l.lo}, {"hi", l.hi}}; }
UniformLaw law_from(const json& j) { return {j.at("lo").get<double>(), j.at("hi").get<double>()}; }

json mean_se_json(const MeanSe& m) { return json{{"mean", m.mean}, {"se", m.se}}; }

json score_json(const EnsembleScore& s) {
  return json{{"weight_bias_corr", s.weight_bias_corr},
              {"effectiveness_corr", s.effectiveness_corr},
              {"residual_self_bias", s.residual_self_bias}};
}

}  // namespace

PerformanceMatrix parse_matrix_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      header = split_csv(line);
      break;
    }
  }
  if (header.empty()) throw Error(ErrorCode::ParseError, "line 1, column 1: missing header");
  if (header.front() != "model") parse_fail(line_no, 1, "header must start with 'model'");
  const std::size_t t = header.size() - 1;
  if (t == 0) parse_fail(line_no, 1, "header names no benchmarks");

  std::vector<std::vector<double>> grid;
  std::vector<std::string> labels;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != t + 1)
      parse_fail(line_no, 1,
                 "expected " + std::to_string(t) + " values, found " + std::to_string(fields.size() - 1));
    labels.push_back(fields.front());
    std::vector<double> row;
    for (std::size_t c = 1; c < fields.size(); ++c) row.push_back(parse_number(fields[c], line_no, c + 1));
    grid.push_back(std::move(row));
  }
  if (grid.empty()) throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ", column 1: no data rows");
  // Row count vs. header width is a shape question, reported by validation.
  if (grid.size() != t)
    throw Error(ErrorCode::NonSquare, std::to_string(grid.size()) + " model rows for " + std::to_string(t) +
                                          " benchmarks");
  return PerformanceMatrix::validate(grid, labels);
}

PerformanceMatrix read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
  return parse_matrix_csv(in);
}

void write_matrix_csv(const PerformanceMatrix& x, std::ostream& out) {
  out << "model";
  for (std::size_t j = 0; j < x.size(); ++j) out << ",bench_" << (j + 1);
  out << '\n' << std::setprecision(17);
  for (std::size_t i = 0; i < x.size(); ++i) {
    out << x.labels()[i];
    for (std::size_t j = 0; j < x.size(); ++j) out << ',' << x(i, j);
    out << '\n';
  }
}

void write_matrix_csv(const PerformanceMatrix& x, const std::filesystem::path& path) {
  auto out = open_out(path);
  write_matrix_csv(x, out);
  finish(out, path);
}

void write_trace_csv(const ConvergenceTrace& trace, std::ostream& out) {
  const std::size_t t = trace.snapshots.empty() ? 0 : trace.snapshots.front().size();
  out << "iter,l1_delta";
  for (std::size_t i = 0; i < t; ++i) out << ",alpha_" << (i + 1);
  out << '\n' << std::setprecision(17);
  for (std::size_t k = 0; k < trace.l1_deltas.size(); ++k) {
    out << (k + 1) << ',' << trace.l1_deltas[k];
    if (k < trace.snapshots.size())
      for (double w : trace.snapshots[k].values()) out << ',' << w;
    out << '\n';
  }
}

void write_trace_csv(const ConvergenceTrace& trace, const std::filesystem::path& path) {
  auto out = open_out(path);
  write_trace_csv(trace, out);
  finish(out, path);
}

ModelEnsemble parse_distributions(std::istream& in) {
  std::vector<ModelDistribution> dists;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::vector<double> probs;
    std::string tok;
    std::size_t col = 0;
    while (fields >> tok) probs.push_back(parse_number(tok, line_no, ++col));
    if (probs.empty()) continue;
    try {
      dists.emplace_back(std::move(probs));
    } catch (const Error& e) {
      parse_fail(line_no, 1, e.what());
    }
  }
  return ModelEnsemble(std::move(dists));
}

ModelEnsemble read_distributions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
  return parse_distributions(in);
}

json provenance_now() {
  return json{{"tool", "silencer"},
              {"tool_version", kToolVersion},
              {"rng_algorithm", std::string(RngStream::kAlgorithm)},
              {"timestamp", iso_utc_now()}};
}

json to_json(const RunReport& r) {
  return json{{"command", r.command},
              {"config_echo", r.config_echo},
              {"payload", r.payload},
              {"warnings", r.warnings},
              {"provenance", r.provenance}};
}

RunReport report_from_json(const json& j) {
  try {
    RunReport r;
    r.command = j.at("command").get<std::string>();
    r.config_echo = j.at("config_echo");
    r.payload = j.at("payload");
    r.warnings = j.value("warnings", std::vector<std::string>{});
    r.provenance = j.value("provenance", json::object());
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed report: ") + e.what());
  }
}

void write_report(const RunReport& report, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << to_json(report).dump(2) << '\n';
  finish(out, path);
}

RunReport read_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
  try {
    return report_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

json to_json(const PerformanceMatrix& x) { return json{{"labels", x.labels()}, {"rows", x.rows()}}; }

PerformanceMatrix matrix_from_json(const json& j) {
  return PerformanceMatrix::validate(j.at("rows").get<std::vector<std::vector<double>>>(),
                                     j.at("labels").get<std::vector<std::string>>());
}

json to_json(const SolverConfig& c) {
  return json{{"strategy", std::string(to_string(c.strategy.kind))},
              {"delta", c.strategy.delta},
              {"conv_epsilon", c.conv_epsilon},
              {"max_iterations", c.max_iterations},
              {"record_trace", c.record_trace}};
}

SolverConfig solver_config_from_json(const json& j) {
  SolverConfig c;
  c.strategy.kind = parse_strategy(j.value("strategy", std::string("silencer")));
  c.strategy.delta = j.value("delta", Strategy::kDefaultDelta);
  c.conv_epsilon = j.value("conv_epsilon", 1e-6);
  c.max_iterations = j.value("max_iterations", std::size_t{10'000});
  c.record_trace = j.value("record_trace", false);
  c.validate();
  return c;
}

json to_json(const SolveResult& r) {
  json j{{"weights", r.weights.values()},
         {"weighted_performance", r.weighted_performance},
         {"degeneracy_flags", r.degeneracy_flags},
         {"iterations", r.iterations},
         {"final_l1_delta", r.final_delta}};
  if (r.trace) {
    j["trace"] = json{{"l1_deltas", r.trace->l1_deltas}, {"contraction_ratios", r.trace->contraction_ratios},
                      {"converged", r.trace->converged}};
  }
  return j;
}

json to_json(const EcosystemSpec& s) {
  json j{{"generators", s.generators},
         {"references", s.references},
         {"n_items", s.n_items},
         {"analytic", s.analytic},
         {"skill_law", law_json(s.skill_law)},
         {"resample_subsets", s.resample_subsets},
         {"difficulty_law", law_json(s.difficulty_law)},
         {"self_bias_law", law_json(s.self_bias_law)},
         {"sub_bias_mix", s.sub_bias_mix},
         {"active_channels", s.active_channels},
         {"noise_sd", s.noise_sd},
         {"slope", s.slope},
         {"contamination", s.contamination},
         {"max_clamp_rate", s.max_clamp_rate},
         {"seed", s.seed},
         {"stream_id", s.stream_id}};
  if (s.skills) j["skills"] = *s.skills;
  if (s.self_bias) j["self_bias"] = *s.self_bias;
  return j;
}

EcosystemSpec ecosystem_spec_from_json(const json& j) {
  EcosystemSpec s;
  try {
    s.generators = j.value("generators", s.generators);
    s.references = j.value("references", s.references);
    s.n_items = j.value("n_items", s.n_items);
    s.analytic = j.value("analytic", s.analytic);
    if (j.contains("skills")) s.skills = j.at("skills").get<std::vector<double>>();
    if (j.contains("skill_law")) s.skill_law = law_from(j.at("skill_law"));
    s.resample_subsets = j.value("resample_subsets", s.resample_subsets);
    if (j.contains("difficulty_law")) s.difficulty_law = law_from(j.at("difficulty_law"));
    if (j.contains("self_bias")) s.self_bias = j.at("self_bias").get<std::vector<double>>();
    if (j.contains("self_bias_law")) s.self_bias_law = law_from(j.at("self_bias_law"));
    s.sub_bias_mix = j.value("sub_bias_mix", s.sub_bias_mix);
    s.active_channels = j.value("active_channels", s.active_channels);
    s.noise_sd = j.value("noise_sd", s.noise_sd);
    s.slope = j.value("slope", s.slope);
    s.contamination = j.value("contamination", s.contamination);
    s.max_clamp_rate = j.value("max_clamp_rate", s.max_clamp_rate);
    s.seed = j.value("seed", s.seed);
    s.stream_id = j.value("stream_id", s.stream_id);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("ecosystem config: ") + e.what());
  }
  s.validate();
  return s;
}

json to_json(const StrategyComparison& c) {
  json outcomes = json::array();
  for (const auto& o : c.outcomes) {
    json entry = score_json(o.score);
    entry["strategy"] = std::string(to_string(o.strategy.kind));
    entry["weights"] = o.weights.values();
    entry["converged"] = o.converged;
    entry["iterations"] = o.iterations;
    outcomes.push_back(entry);
  }
  return json{{"naive", score_json(c.naive)}, {"strategies", outcomes}};
}

json to_json(const std::vector<SweepRow>& rows) {
  json out = json::array();
  for (const auto& r : rows) {
    out.push_back(json{{"value", r.value},
                       {"naive_bias", mean_se_json(r.naive_bias)},
                       {"naive_effectiveness", mean_se_json(r.naive_effectiveness)},
                       {"reweighted_bias", mean_se_json(r.reweighted_bias)},
                       {"reweighted_effectiveness", mean_se_json(r.reweighted_effectiveness)},
                       {"weight_bias_corr", mean_se_json(r.weight_bias_corr)},
                       {"non_converged", r.non_converged}});
  }
  return out;
}

}  // namespace silencer
