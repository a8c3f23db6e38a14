#pragma once

#include <json.hpp>

#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "spe/model.hpp"
#include "spe/qn.hpp"
#include "spe/transform.hpp"

namespace spe {

inline constexpr std::string_view kAntipatternSchema = "spe-ap/1";

struct DetectionConfig {
  int blobMinConnections = 3;
  double blobMinUtilization = 0.85;
  double blobMinDemandShare = 0.3;
  double estMinMessages = 5.0;
  double estRemoteCost = 0.02419;     // seconds per remote facade call
  double facadeLocalCost = 0.009626;  // seconds per local facade call

  /// Throws InvalidArgument unless every threshold is positive.
  void validate() const;
};

enum class AntipatternKind { Blob, Est };
std::string_view to_string(AntipatternKind kind);

/// BLOB subjects name a component; EST subjects a (scenario, caller, callee).
struct AntipatternSubject {
  AntipatternKind kind = AntipatternKind::Blob;
  std::string component;
  std::string scenario;
  std::string caller;
  std::string callee;

  /// "BLOB:ProductCatalog", "EST:Register:UserController:Database".
  std::string id() const;
  bool operator==(const AntipatternSubject&) const = default;
};

AntipatternSubject blob_subject(const std::string& component);
AntipatternSubject est_subject(const std::string& scenario, const std::string& caller, const std::string& callee);

struct BlobPart {
  std::string name;
  double probability = 0.0;
  std::vector<std::string> operations;  // empty: keep every operation
  bool operator==(const BlobPart&) const = default;
};

struct BlobSplitSpec {
  std::vector<BlobPart> parts;
  bool operator==(const BlobSplitSpec&) const = default;
};

struct EstFacadeSpec {
  std::string remoteFacade = "RemoteFacade";
  std::string localFacade = "LocalFacade";
  double remoteCost = DetectionConfig{}.estRemoteCost;
  double localCost = DetectionConfig{}.facadeLocalCost;
  bool operator==(const EstFacadeSpec&) const = default;
};

using RefactoringSpec = std::variant<BlobSplitSpec, EstFacadeSpec>;

struct RefactoringPlan {
  std::string description;
  RefactoringSpec spec;
  bool operator==(const RefactoringPlan&) const = default;
};

struct AntipatternOccurrence {
  AntipatternSubject subject;
  std::map<std::string, double> evidence;
  std::vector<RefactoringPlan> candidatePlans;
  bool operator==(const AntipatternOccurrence&) const = default;
};

/// Distinct components linked to `component` by an interface dependency or a
/// message in either direction.
int connection_count(const SoftwareModel& model, const std::string& component);

/// Non-frozen server components with enough connections and either a high
/// utilization or a high share of the total busy time, by utilization
/// descending. `result` must be the solution of forward(model).
std::vector<AntipatternOccurrence> detect_blob(const SoftwareModel& model, const SolverResult& result,
                                               const TraceModel& trace, const DetectionConfig& cfg = {});

/// Every (scenario, caller, callee) whose expected number of remote messages
/// reaches cfg.estMinMessages (inclusive). Local messages are not counted.
std::vector<AntipatternOccurrence> detect_est(const SoftwareModel& model, const DetectionConfig& cfg = {});

/// Splits the BLOB component into the parts of the BlobSplitSpec; see split_component.
/// Throws NoSuchOccurrence, FrozenElement, BadProbabilities, InvalidEdit.
SoftwareModel solve_blob(const SoftwareModel& model, const AntipatternOccurrence& occurrence,
                         const BlobSplitSpec& spec);

/// Session Facade: the caller's top-level remote messages to the callee in
/// the scenario are replaced, at the position of the first one, by one call
/// caller -> remote facade, one call remote facade -> local facade, and the
/// same messages re-sent by the local facade as local messages. Nested
/// messages are re-targeted in place.
/// Throws NoSuchOccurrence, NothingToBatch, FrozenElement, InvalidEdit.
SoftwareModel solve_est(const SoftwareModel& model, const AntipatternOccurrence& occurrence,
                        const EstFacadeSpec& spec);

nlohmann::json refactoring_spec_to_json(const RefactoringSpec& spec);
nlohmann::json occurrence_to_json(const AntipatternOccurrence& occurrence);
nlohmann::json occurrences_to_json(const std::vector<AntipatternOccurrence>& occurrences);
DetectionConfig detection_config_from_json(const nlohmann::json& j, const std::string& pointer = "");
nlohmann::json detection_config_to_json(const DetectionConfig& cfg);

}  // namespace spe
