#pragma once

#include <json.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spe/model.hpp"
#include "spe/qn.hpp"
#include "spe/simulate.hpp"

namespace spe {

enum class SolverChoice { Auto, Exact, Amva, Simulation };

std::string_view to_string(SolverChoice choice);
/// "auto", "exact", "amva" or "sim"; throws InvalidArgument otherwise.
SolverChoice parse_solver_choice(std::string_view text);

struct AnalysisOptions {
  SolverChoice solver = SolverChoice::Auto;
  SolverOptions mva;
  SimulationOptions simulation;
};

/// Auto picks exact MVA when the lattice fits the budget and AMVA otherwise.
/// Simulation returns the point estimates; use simulate() for the intervals.
SolverResult analyze_qn(const QnModel& qn, const AnalysisOptions& options = {});

// ---------------------------------------------------------------------------
// Requirement checks
// ---------------------------------------------------------------------------

struct ResponseCheck {
  std::string requirement;
  std::string qnClass;
  double value = 0.0;  // server-side response, seconds
  double threshold = 0.0;
  bool violated = false;
  bool operator==(const ResponseCheck&) const = default;
};

struct UtilizationCheck {
  std::string requirement;
  std::string center;
  double value = 0.0;
  double threshold = 0.0;
  bool violated = false;
  bool operator==(const UtilizationCheck&) const = default;
};

struct RequirementReport {
  std::vector<ResponseCheck> responses;
  std::vector<UtilizationCheck> utilizations;  // one per queueing center and requirement
  bool satisfied = true;

  std::vector<std::string> violated_classes() const;
  std::vector<std::string> violated_centers() const;
  bool operator==(const RequirementReport&) const = default;
};

/// Response requirements name a workload, which is also the QN class id.
/// Comparisons are strict: a value equal to its threshold passes.
/// Throws UnknownElement when a requirement names a class not in `result`.
RequirementReport check_requirements(const SolverResult& result, const std::vector<Requirement>& requirements);

// ---------------------------------------------------------------------------
// Serialization and text output
// ---------------------------------------------------------------------------

nlohmann::json result_to_json(const SolverResult& result);
SolverResult result_from_json(const nlohmann::json& j, const std::string& pointer = "");
nlohmann::json sim_to_json(const SimResult& sim);
nlohmann::json report_to_json(const RequirementReport& report);
RequirementReport report_from_json(const nlohmann::json& j, const std::string& pointer = "");

/// Per-class response rows and per-center utilization rows, with violated
/// requirements marked. `sim` adds confidence half-widths.
std::string format_tables(const SolverResult& result, const RequirementReport& report,
                          const SimResult* sim = nullptr);

}  // namespace spe
