#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "silencer/core.hpp"
#include "silencer/ecosystem.hpp"
#include "silencer/ensemble.hpp"
#include "silencer/selflabel.hpp"

namespace silencer {

inline constexpr const char* kToolVersion = "0.3.0";

/// Matrix CSV: header `model,<bench_1>,...,<bench_T>`, then one row per model.
PerformanceMatrix read_matrix_csv(const std::filesystem::path& path);
PerformanceMatrix parse_matrix_csv(std::istream& in);
void write_matrix_csv(const PerformanceMatrix& x, const std::filesystem::path& path);
void write_matrix_csv(const PerformanceMatrix& x, std::ostream& out);

/// Columns `iter,l1_delta,alpha_1..alpha_T`.
void write_trace_csv(const ConvergenceTrace& trace, const std::filesystem::path& path);
void write_trace_csv(const ConvergenceTrace& trace, std::ostream& out);

/// One model per line, whitespace-separated probabilities, `#` comments.
ModelEnsemble read_distributions(const std::filesystem::path& path);
ModelEnsemble parse_distributions(std::istream& in);

struct RunReport {
  std::string command;
  nlohmann::json config_echo;
  nlohmann::json payload;
  std::vector<std::string> warnings;
  nlohmann::json provenance;
};

nlohmann::json to_json(const RunReport& report);
RunReport report_from_json(const nlohmann::json& j);
void write_report(const RunReport& report, const std::filesystem::path& path);
RunReport read_report(const std::filesystem::path& path);

nlohmann::json provenance_now();

// Serialization of the domain types used in configs and payloads.
nlohmann::json to_json(const PerformanceMatrix& x);
PerformanceMatrix matrix_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SolverConfig& c);
SolverConfig solver_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SolveResult& r);
nlohmann::json to_json(const EcosystemSpec& s);
EcosystemSpec ecosystem_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const StrategyComparison& c);
nlohmann::json to_json(const std::vector<SweepRow>& rows);

}  // namespace silencer
