#pragma once

#include <json.hpp>

#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "spe/model.hpp"
#include "spe/qn.hpp"

namespace spe {

inline constexpr std::string_view kTraceSchema = "spe-trace/1";

// ---------------------------------------------------------------------------
// QN-side edits
// ---------------------------------------------------------------------------

struct SplitPart {
  std::string id;
  double probability = 0.0;
  bool operator==(const SplitPart&) const = default;
};

/// Replace `center` by one center per part; part i receives p_i times the
/// original demand of every class.
struct SplitCenter {
  std::string center;
  std::vector<SplitPart> parts;
  bool operator==(const SplitCenter&) const = default;
};

struct ChangeDemand {
  std::string center;
  std::string qnClass;
  double demand = 0.0;
  bool operator==(const ChangeDemand&) const = default;
};

/// Re-weight the parts of an earlier split of `center`. `parts` lists the
/// part ids in any order, `probabilities` the new weights in the same order.
struct ChangeRouting {
  std::string center;
  std::vector<std::string> parts;
  std::vector<double> probabilities;
  bool operator==(const ChangeRouting&) const = default;
};

struct ChangeThinkTime {
  std::string qnClass;
  double seconds = 0.0;
  bool operator==(const ChangeThinkTime&) const = default;
};

using QnEdit = std::variant<SplitCenter, ChangeDemand, ChangeRouting, ChangeThinkTime>;

// ---------------------------------------------------------------------------
// Trace model
// ---------------------------------------------------------------------------

/// Software component behind a center. Part centers created by a split link
/// back to the component that was split.
struct CenterLink {
  std::string component;  // "/components/<id>"
  std::string center;     // "/centers/<id>"
  bool frozen = false;
  bool client = false;
  bool operator==(const CenterLink&) const = default;
};

struct ClassLink {
  std::string scenario;  // "/scenarios/<id>"
  std::string workload;  // "/workloads/<id>"
  std::string qnClass;   // "/classes/<id>"
  bool operator==(const ClassLink&) const = default;
};

/// How one demand cell was derived: per operation, the expected invocation
/// count, the remote part of it, and the service time and request overhead
/// that were multiplied in.
struct DemandTerm {
  std::string operation;
  double invocations = 0.0;
  double remoteInvocations = 0.0;
  double serviceTime = 0.0;
  double requestOverhead = 0.0;
  bool operator==(const DemandTerm&) const = default;
};

struct DemandLink {
  std::string center;   // "/centers/<id>"
  std::string qnClass;  // "/classes/<id>"
  std::string scenario;
  std::vector<DemandTerm> terms;
  bool operator==(const DemandLink&) const = default;
};

struct SplitLink {
  std::string center;  // the center that was split
  std::vector<SplitPart> parts;
  bool operator==(const SplitLink&) const = default;
};

struct TraceModel {
  int sourceVersion = 0;
  std::vector<CenterLink> centers;
  std::vector<ClassLink> classes;
  std::vector<DemandLink> demands;
  std::vector<SplitLink> splits;
  std::vector<QnEdit> journal;  // append-only, replayed by backward

  const CenterLink* center_link(const std::string& centerId) const;
  const ClassLink* class_link(const std::string& classId) const;
  const SplitLink* split_link(const std::string& centerId) const;

  bool operator==(const TraceModel&) const = default;
};

/// "/components/Database" -> "Database".
std::string path_leaf(const std::string& path);

struct ForwardResult {
  QnModel qn;
  TraceModel trace;
};

// ---------------------------------------------------------------------------
// Transformations
// ---------------------------------------------------------------------------

/// One delay center for the client, one processor-sharing center per server
/// component, one class per scenario named after its workload. The demand of
/// class c at center k sums, over the operations of k invoked by the
/// scenario, the expected invocation count times the service time plus the
/// expected remote invocations times the component's request overhead.
/// Throws InvalidModel, NoClientComponent or MissingDemand.
ForwardResult forward(const SoftwareModel& model);

/// Applies one edit and appends it to the journal. Throws FrozenElement when
/// the edit touches a center traced to a frozen component, BadProbabilities
/// for ill-formed weights, UnknownElement for missing targets and InvalidEdit
/// for other ill-formed edits.
ForwardResult apply_qn_edit(const QnModel& qn, const TraceModel& trace, const QnEdit& edit);

/// Replays the trace journal on `baseModel` and checks that forwarding the
/// outcome reproduces `editedQn`. Throws BackwardUnsupportedEdit when an edit
/// has no software counterpart or `editedQn` carries changes outside the
/// journal.
SoftwareModel backward(const QnModel& editedQn, const TraceModel& trace, const SoftwareModel& baseModel);

/// Software counterpart of SplitCenter, shared with the BLOB refactoring.
/// Every maximal run of top-level steps involving `component` becomes an Alt
/// labelled "split:<component>" with one re-targeted copy per part. Provided
/// interfaces are cloned per part as "<interface>.<part>", restricted to
/// `operations[i]` when that list is non-empty.
/// Throws FrozenElement, BadProbabilities, UnknownElement, InvalidEdit.
SoftwareModel split_component(const SoftwareModel& model, const std::string& component,
                              const std::vector<SplitPart>& parts,
                              const std::vector<std::vector<std::string>>& operations = {});

/// Checks that probabilities lie in (0, 1] and sum to 1 within 1e-9.
void check_probabilities(const std::vector<double>& probabilities, const std::string& what);

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

nlohmann::json qn_edit_to_json(const QnEdit& edit);
QnEdit qn_edit_from_json(const nlohmann::json& j, const std::string& pointer = "");
nlohmann::json trace_to_json(const TraceModel& trace);
TraceModel trace_from_json(const nlohmann::json& doc, const std::string& pointer = "");
nlohmann::json qn_to_json(const QnModel& qn);
QnModel qn_from_json(const nlohmann::json& doc, const std::string& pointer = "");

std::string save_trace(const TraceModel& trace);
TraceModel load_trace(std::string_view document);

}  // namespace spe
