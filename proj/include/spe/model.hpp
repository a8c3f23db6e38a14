#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace spe {

// ---------------------------------------------------------------------------
// Static view
// ---------------------------------------------------------------------------

struct Operation {
  std::string id;
  std::string name;
  bool operator==(const Operation&) const = default;
};

/// Operation ids are scoped to their interface.
struct Interface {
  std::string id;
  std::string name;
  std::vector<Operation> operations;

  bool has_operation(const std::string& op) const;
  bool operator==(const Interface&) const = default;
};

struct Component {
  std::string id;
  std::string name;
  std::vector<std::string> provided;  // interface ids
  std::vector<std::string> required;  // interface ids
  bool frozen = false;                // legacy constraint: never refactored
  bool client = false;                // workload generator, becomes the delay center
  /// Extra demand charged for every remote (non-local) request the component
  /// receives, on top of the operation's service time. Batching through a
  /// co-located facade removes it.
  double requestOverhead = 0.0;

  bool operator==(const Component&) const = default;
};

// ---------------------------------------------------------------------------
// Dynamic view
// ---------------------------------------------------------------------------

struct Step;
using Body = std::vector<Step>;

/// A request from `from` to `to` invoking `operation` on one of the callee's
/// provided interfaces. Replies are not modelled.
struct Message {
  std::string from;
  std::string to;
  std::string operation;
  bool local = false;  // co-located caller: no request overhead at the callee
  bool operator==(const Message&) const = default;
};

struct Branch {
  double probability = 1.0;
  Body body;
  bool operator==(const Branch&) const = default;
};

/// Probability-weighted alternative. `label` marks fragments created by a
/// component split ("split:<component>") so later routing edits can find them.
struct Alt {
  std::string label;
  std::vector<Branch> branches;
  bool operator==(const Alt&) const = default;
};

/// Repetition with a real-valued mean iteration count.
struct Loop {
  double count = 1.0;
  Body body;
  bool operator==(const Loop&) const = default;
};

struct Step {
  std::variant<Message, Alt, Loop> node;

  Step() = default;
  Step(Message m) : node(std::move(m)) {}
  Step(Alt a) : node(std::move(a)) {}
  Step(Loop l) : node(std::move(l)) {}

  bool operator==(const Step&) const = default;
};

struct Scenario {
  std::string id;
  std::string name;
  std::string workload;  // workload class id
  Body body;
  bool operator==(const Scenario&) const = default;
};

// ---------------------------------------------------------------------------
// Annotations
// ---------------------------------------------------------------------------

struct Workload {
  std::string id;
  std::string name;
  int population = 1;
  double thinkTime = 0.0;  // seconds
  bool operator==(const Workload&) const = default;
};

struct DemandAnnotation {
  std::string component;
  std::string operation;
  double serviceTime = 0.0;  // seconds per invocation
  bool operator==(const DemandAnnotation&) const = default;
};

/// Server-side response time (cycle time minus think time) of one class.
struct ResponseTimeRequirement {
  std::string id;
  std::string workload;
  double maxResponse = 0.0;
  bool operator==(const ResponseTimeRequirement&) const = default;
};

/// Upper bound on the utilization of every queueing center.
struct UtilizationRequirement {
  std::string id;
  double maxUtilization = 1.0;
  bool operator==(const UtilizationRequirement&) const = default;
};

using Requirement = std::variant<ResponseTimeRequirement, UtilizationRequirement>;

const std::string& requirement_id(const Requirement& r);

struct SoftwareModel {
  int version = 1;
  std::vector<Component> components;
  std::vector<Interface> interfaces;
  std::vector<Scenario> scenarios;
  std::vector<Workload> workloads;
  std::vector<DemandAnnotation> demands;
  std::vector<Requirement> requirements;

  const Component* find_component(const std::string& id) const;
  Component* find_component(const std::string& id);
  const Interface* find_interface(const std::string& id) const;
  const Scenario* find_scenario(const std::string& id) const;
  const Workload* find_workload(const std::string& id) const;
  Workload* find_workload(const std::string& id);
  const DemandAnnotation* find_demand(const std::string& component, const std::string& op) const;
  DemandAnnotation* find_demand(const std::string& component, const std::string& op);
  /// The unique client component, or nullptr when there is none.
  const Component* client() const;

  bool operator==(const SoftwareModel&) const = default;
};

/// Sort every id-keyed collection (and the interface lists inside
/// components) so that equal models have equal representations.
void canonicalize(SoftwareModel& model);

// ---------------------------------------------------------------------------
// Queries
// ---------------------------------------------------------------------------

using InvocationKey = std::pair<std::string, std::string>;  // (component, operation)
using InvocationCounts = std::map<InvocationKey, double>;

/// Expected number of invocations of each (component, operation) per scenario
/// execution: every message counts 1 times the product of the enclosing
/// branch probabilities and loop counts.
InvocationCounts expected_invocations(const Scenario& scenario);

/// Same expectation restricted to remote messages (`local == false`).
InvocationCounts expected_remote_invocations(const Scenario& scenario);

/// Expected number of messages sent from `from` to `to` per execution.
double message_count_between(const Scenario& scenario, const std::string& from,
                             const std::string& to);

/// Calls `fn(message, weight)` for every message in `body`, where `weight` is
/// the expected number of times the message is sent.
template <typename Fn>
void for_each_message(const Body& body, double weight, Fn&& fn);

/// Whether a step (recursively) sends or receives a message of `component`.
bool involves(const Step& step, const std::string& component);

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

struct Violation {
  std::string code;  // machine readable, e.g. "ALT_PROB_SUM"
  std::string path;  // element path, e.g. "/scenarios/Register/body/2"
  std::string message;
  bool operator==(const Violation&) const = default;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  bool has(const std::string& code) const;
};

ValidationReport validate_model(const SoftwareModel& model);

/// Throws Error(InvalidModel) listing the violations when the model is invalid.
void require_valid(const SoftwareModel& model);

// ---------------------------------------------------------------------------

template <typename Fn>
void for_each_message(const Body& body, double weight, Fn&& fn) {
  for (const Step& step : body) {
    if (const auto* m = std::get_if<Message>(&step.node)) {
      fn(*m, weight);
    } else if (const auto* alt = std::get_if<Alt>(&step.node)) {
      for (const Branch& b : alt->branches) for_each_message(b.body, weight * b.probability, fn);
    } else if (const auto* loop = std::get_if<Loop>(&step.node)) {
      for_each_message(loop->body, weight * loop->count, fn);
    }
  }
}

}  // namespace spe
