#pragma once

#include <json.hpp>

#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "spe/analysis.hpp"
#include "spe/antipatterns.hpp"
#include "spe/model.hpp"
#include "spe/qn.hpp"
#include "spe/transform.hpp"

namespace spe {

inline constexpr std::string_view kSessionSchema = "spe-session/1";

// ---------------------------------------------------------------------------
// Actions
// ---------------------------------------------------------------------------

struct RootAction {
  bool operator==(const RootAction&) const = default;
};

/// Antipattern refactoring on the software model, followed by forward.
struct SoftwareAction {
  AntipatternSubject subject;
  RefactoringSpec spec;
  bool operator==(const SoftwareAction&) const = default;
};

/// QN edits applied on the performance model; the software model follows
/// only when the node is exported.
struct PerformanceAction {
  std::vector<QnEdit> edits;
  bool operator==(const PerformanceAction&) const = default;
};

using Action = std::variant<RootAction, SoftwareAction, PerformanceAction>;

SoftwareAction blob_split_action(const std::string& component, const std::vector<BlobPart>& parts);
SoftwareAction est_facade_action(const std::string& scenario, const std::string& caller, const std::string& callee,
                                 const EstFacadeSpec& spec = {});

nlohmann::json action_to_json(const Action& action);
/// Accepts the "blobSplit", "estFacade" and "qnEdits" forms. Facade costs
/// default to `cfg`.
Action action_from_json(const nlohmann::json& j, const std::string& pointer = "", const DetectionConfig& cfg = {});

// ---------------------------------------------------------------------------
// Decision tree
// ---------------------------------------------------------------------------

struct DecisionNode {
  std::string id;
  std::string parent;    // empty for the root
  std::string actionId;  // client-supplied idempotency key, may be empty
  Action action;
  SoftwareModel model;  // for performance nodes: the model the trace derives from
  QnModel qn;
  TraceModel trace;
  SolverResult result;
  RequirementReport report;
  std::vector<std::string> children;
  bool operator==(const DecisionNode&) const = default;
};

struct CostLedger {
  int softwareIterations = 0;     // M
  int performanceIterations = 0;  // N
  std::vector<double> tForward;   // seconds per refactor + forward run
  std::vector<double> tForth;     // seconds per QN edit run
  std::vector<double> tBack;      // seconds per backward run
  bool operator==(const CostLedger&) const = default;
};

struct TradeoffReport {
  double lhs = 0.0;  // M * mean(tForward)
  double rhs = 0.0;  // N * (mean(tForth) + mean(tBack))
  bool softwareSideCheaper = false;  // lhs < rhs
};

/// Throws EmptyLedger when no iteration was recorded or a used path lacks
/// timing samples.
TradeoffReport scalability_tradeoff(const CostLedger& ledger);

struct SessionOptions {
  AnalysisOptions analysis;
  DetectionConfig detection;
  bool operator==(const SessionOptions& o) const;
};

/// Plain snapshot of a session, used for persistence and comparison.
struct SessionState {
  std::string id;
  std::string cursor;
  SessionOptions options;
  std::vector<DecisionNode> nodes;
  CostLedger ledger;

  const DecisionNode* find(const std::string& nodeId) const;
  bool operator==(const SessionState&) const = default;
};

/// Round-trip decision tree. Expansions of different nodes may run
/// concurrently; inserting children, moving the cursor and taking snapshots
/// are serialized. Nodes are never removed.
class Session {
 public:
  /// Validates and forwards the model, solves it and creates the root "n0".
  explicit Session(const SoftwareModel& model, SessionOptions options = {}, std::string id = "s0");
  explicit Session(SessionState state);

  /// Applies `action` to node `nodeId` and appends the child. Software
  /// actions first run backward when the parent carries QN edits. Repeating
  /// a non-empty `actionId` under the same parent returns the existing child.
  /// Throws UnknownNode, FrozenElement, BackwardUnsupportedEdit, solver errors.
  DecisionNode expand(const std::string& nodeId, const Action& action, const std::string& actionId = "");

  /// Moves the cursor; throws UnknownNode.
  void backtrack(const std::string& nodeId);

  /// The node's software model with its QN edits propagated back.
  SoftwareModel export_model(const std::string& nodeId);

  /// Detection on the node's software model and result. Nodes carrying QN
  /// edits report on their exported model.
  std::vector<AntipatternOccurrence> detect(const std::string& nodeId);

  DecisionNode node(const std::string& nodeId) const;
  SessionState snapshot() const;
  std::string cursor() const;
  CostLedger ledger() const;
  std::string id() const;

 private:
  DecisionNode require(const std::string& nodeId) const;

  mutable std::mutex mutex_;
  SessionState state_;
};

nlohmann::json node_to_json(const DecisionNode& node);
nlohmann::json session_to_json(const SessionState& state);
SessionState session_from_json(const nlohmann::json& doc, const std::string& pointer = "");
nlohmann::json ledger_to_json(const CostLedger& ledger);
/// Tree outline without the embedded models: ids, actions, satisfaction.
nlohmann::json tree_to_json(const SessionState& state);

std::string save_session(const SessionState& state);
SessionState load_session(std::string_view document);

// ---------------------------------------------------------------------------
// ECS walkthrough
// ---------------------------------------------------------------------------

struct Walkthrough {
  SessionState session;
  std::string root, blob, est, catalogSplit, filmSplit;
  SoftwareModel exported;  // software model of the film-split node
};

/// Replays the two-branch case study on `model` (the ECS fixture): BLOB split
/// 80/20 then the Register session facade on the software side; the same
/// 80/20 catalog split then a balanced FilmCatalog split on the QN side,
/// exported back to the software model.
Walkthrough run_walkthrough(const SoftwareModel& model, const SessionOptions& options = {});

}  // namespace spe
