#include "spe/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <tuple>

#include "spe/error.hpp"

namespace spe {

namespace {

constexpr double kProbabilityTolerance = 1e-9;

template <typename T>
auto find_by_id(std::vector<T>& items, const std::string& id) -> T* {
  auto it = std::find_if(items.begin(), items.end(), [&](const T& x) { return x.id == id; });
  return it == items.end() ? nullptr : &*it;
}

template <typename T>
auto find_by_id(const std::vector<T>& items, const std::string& id) -> const T* {
  auto it = std::find_if(items.begin(), items.end(), [&](const T& x) { return x.id == id; });
  return it == items.end() ? nullptr : &*it;
}

template <typename T>
void sort_by_id(std::vector<T>& items) {
  std::sort(items.begin(), items.end(), [](const T& a, const T& b) { return a.id < b.id; });
}

}  // namespace

bool Interface::has_operation(const std::string& op) const {
  return std::any_of(operations.begin(), operations.end(),
                     [&](const Operation& o) { return o.id == op; });
}

const std::string& requirement_id(const Requirement& r) {
  return std::visit([](const auto& x) -> const std::string& { return x.id; }, r);
}

const Component* SoftwareModel::find_component(const std::string& id) const {
  return find_by_id(components, id);
}
Component* SoftwareModel::find_component(const std::string& id) { return find_by_id(components, id); }
const Interface* SoftwareModel::find_interface(const std::string& id) const {
  return find_by_id(interfaces, id);
}
const Scenario* SoftwareModel::find_scenario(const std::string& id) const {
  return find_by_id(scenarios, id);
}
const Workload* SoftwareModel::find_workload(const std::string& id) const {
  return find_by_id(workloads, id);
}
Workload* SoftwareModel::find_workload(const std::string& id) { return find_by_id(workloads, id); }

const DemandAnnotation* SoftwareModel::find_demand(const std::string& component,
                                                   const std::string& op) const {
  auto it = std::find_if(demands.begin(), demands.end(), [&](const DemandAnnotation& d) {
    return d.component == component && d.operation == op;
  });
  return it == demands.end() ? nullptr : &*it;
}

DemandAnnotation* SoftwareModel::find_demand(const std::string& component, const std::string& op) {
  auto it = std::find_if(demands.begin(), demands.end(), [&](const DemandAnnotation& d) {
    return d.component == component && d.operation == op;
  });
  return it == demands.end() ? nullptr : &*it;
}

const Component* SoftwareModel::client() const {
  const Component* found = nullptr;
  for (const Component& c : components) {
    if (!c.client) continue;
    if (found) return nullptr;
    found = &c;
  }
  return found;
}

void canonicalize(SoftwareModel& model) {
  for (Component& c : model.components) {
    std::sort(c.provided.begin(), c.provided.end());
    c.provided.erase(std::unique(c.provided.begin(), c.provided.end()), c.provided.end());
    std::sort(c.required.begin(), c.required.end());
    c.required.erase(std::unique(c.required.begin(), c.required.end()), c.required.end());
  }
  sort_by_id(model.components);
  for (Interface& i : model.interfaces) sort_by_id(i.operations);
  sort_by_id(model.interfaces);
  sort_by_id(model.scenarios);
  sort_by_id(model.workloads);
  std::sort(model.demands.begin(), model.demands.end(),
            [](const DemandAnnotation& a, const DemandAnnotation& b) {
              return std::tie(a.component, a.operation) < std::tie(b.component, b.operation);
            });
  std::sort(model.requirements.begin(), model.requirements.end(),
            [](const Requirement& a, const Requirement& b) {
              return requirement_id(a) < requirement_id(b);
            });
}

// ---------------------------------------------------------------------------
// Queries

InvocationCounts expected_invocations(const Scenario& scenario) {
  InvocationCounts counts;
  for_each_message(scenario.body, 1.0, [&](const Message& m, double w) {
    counts[{m.to, m.operation}] += w;
  });
  return counts;
}

InvocationCounts expected_remote_invocations(const Scenario& scenario) {
  InvocationCounts counts;
  for_each_message(scenario.body, 1.0, [&](const Message& m, double w) {
    if (!m.local) counts[{m.to, m.operation}] += w;
  });
  return counts;
}

double message_count_between(const Scenario& scenario, const std::string& from,
                             const std::string& to) {
  double total = 0.0;
  for_each_message(scenario.body, 1.0, [&](const Message& m, double w) {
    if (m.from == from && m.to == to) total += w;
  });
  return total;
}

bool involves(const Step& step, const std::string& component) {
  bool hit = false;
  for_each_message(Body{step}, 1.0, [&](const Message& m, double) {
    hit = hit || m.from == component || m.to == component;
  });
  return hit;
}

// ---------------------------------------------------------------------------
// Validation

namespace {

class Validator {
 public:
  explicit Validator(const SoftwareModel& m) : model_(m) {}

  ValidationReport run() {
    check_unique_ids();
    check_static_view();
    check_workloads();
    check_demands();
    check_requirements();
    check_scenarios();
    return std::move(report_);
  }

 private:
  void add(std::string code, std::string path, std::string message) {
    report_.violations.push_back({std::move(code), std::move(path), std::move(message)});
  }

  template <typename T>
  void unique_ids(const std::vector<T>& items, const std::string& collection) {
    std::set<std::string> seen;
    for (const T& item : items) {
      if (item.id.empty()) add("EMPTY_ID", "/" + collection, "element with empty id");
      if (!seen.insert(item.id).second)
        add("DUPLICATE_ID", "/" + collection + "/" + item.id, "duplicate id '" + item.id + "'");
    }
  }

  void check_unique_ids() {
    unique_ids(model_.components, "components");
    unique_ids(model_.interfaces, "interfaces");
    unique_ids(model_.scenarios, "scenarios");
    unique_ids(model_.workloads, "workloads");
    std::set<std::string> req;
    for (const Requirement& r : model_.requirements)
      if (!req.insert(requirement_id(r)).second)
        add("DUPLICATE_ID", "/requirements/" + requirement_id(r), "duplicate requirement id");
    for (const Interface& i : model_.interfaces) unique_ids(i.operations, "interfaces/" + i.id + "/operations");
  }

  void check_static_view() {
    int clients = 0;
    for (const Component& c : model_.components) {
      const std::string path = "/components/" + c.id;
      if (c.client) ++clients;
      if (c.client && c.frozen)
        add("FROZEN_CLIENT", path, "the client component cannot carry a freeze constraint");
      if (!(c.requestOverhead >= 0.0) || !std::isfinite(c.requestOverhead))
        add("REQUEST_OVERHEAD", path, "request overhead must be a finite value >= 0");
      for (const std::string& i : c.provided) {
        if (!model_.find_interface(i))
          add("DANGLING_REF", path + "/provided", "unknown interface '" + i + "'");
        if (std::find(c.required.begin(), c.required.end(), i) != c.required.end())
          add("PROVIDED_REQUIRED_OVERLAP", path, "interface '" + i + "' both provided and required");
      }
      for (const std::string& i : c.required)
        if (!model_.find_interface(i))
          add("DANGLING_REF", path + "/required", "unknown interface '" + i + "'");
      // An operation name must resolve to exactly one provided interface.
      std::set<std::string> ops;
      for (const std::string& iid : c.provided) {
        const Interface* iface = model_.find_interface(iid);
        if (!iface) continue;
        for (const Operation& op : iface->operations)
          if (!ops.insert(op.id).second)
            add("AMBIGUOUS_OPERATION", path, "operation '" + op.id + "' provided twice");
      }
    }
    if (clients == 0) add("NO_CLIENT", "/components", "no client component");
    if (clients > 1) add("MULTIPLE_CLIENTS", "/components", "more than one client component");
  }

  void check_workloads() {
    for (const Workload& w : model_.workloads) {
      const std::string path = "/workloads/" + w.id;
      if (w.population < 1) add("POPULATION", path, "population must be >= 1");
      if (!(w.thinkTime >= 0.0) || !std::isfinite(w.thinkTime))
        add("THINK_TIME", path, "think time must be a finite value >= 0");
    }
  }

  void check_demands() {
    std::set<InvocationKey> seen;
    for (const DemandAnnotation& d : model_.demands) {
      const std::string path = "/demands/" + d.component + "/" + d.operation;
      const Component* c = model_.find_component(d.component);
      if (!c) {
        add("DANGLING_REF", path, "unknown component '" + d.component + "'");
      } else if (!provides(*c, d.operation)) {
        add("OPERATION_NOT_PROVIDED", path,
            "component '" + d.component + "' does not provide '" + d.operation + "'");
      }
      if (!(d.serviceTime > 0.0) || !std::isfinite(d.serviceTime))
        add("SERVICE_TIME", path, "service time must be a finite value > 0");
      if (!seen.insert({d.component, d.operation}).second)
        add("DUPLICATE_DEMAND", path, "more than one annotation for the same operation");
    }
  }

  void check_requirements() {
    for (const Requirement& r : model_.requirements) {
      const std::string path = "/requirements/" + requirement_id(r);
      if (const auto* rt = std::get_if<ResponseTimeRequirement>(&r)) {
        if (!model_.find_workload(rt->workload))
          add("DANGLING_REF", path, "unknown workload '" + rt->workload + "'");
        if (!(rt->maxResponse > 0.0)) add("THRESHOLD", path, "threshold must be > 0");
      } else if (const auto* u = std::get_if<UtilizationRequirement>(&r)) {
        if (!(u->maxUtilization > 0.0 && u->maxUtilization <= 1.0))
          add("THRESHOLD", path, "utilization threshold must lie in (0, 1]");
      }
    }
  }

  void check_scenarios() {
    std::set<std::string> used_workloads;
    for (const Scenario& s : model_.scenarios) {
      const std::string path = "/scenarios/" + s.id;
      if (!model_.find_workload(s.workload))
        add("DANGLING_REF", path + "/workload", "unknown workload '" + s.workload + "'");
      else if (!used_workloads.insert(s.workload).second)
        add("SHARED_WORKLOAD", path, "workload '" + s.workload + "' drives more than one scenario");
      if (s.body.empty()) add("EMPTY_SCENARIO", path, "scenario has no steps");
      check_body(s.body, path + "/body");
    }
  }

  void check_body(const Body& body, const std::string& path) {
    for (std::size_t i = 0; i < body.size(); ++i) {
      const std::string p = path + "/" + std::to_string(i);
      const Step& step = body[i];
      if (const auto* m = std::get_if<Message>(&step.node)) {
        check_message(*m, p);
      } else if (const auto* alt = std::get_if<Alt>(&step.node)) {
        if (alt->branches.empty()) add("EMPTY_ALT", p, "alternative without branches");
        double sum = 0.0;
        for (std::size_t b = 0; b < alt->branches.size(); ++b) {
          const Branch& br = alt->branches[b];
          if (!(br.probability >= 0.0 && br.probability <= 1.0))
            add("PROB_RANGE", p + "/branches/" + std::to_string(b), "probability outside [0, 1]");
          sum += br.probability;
          check_body(br.body, p + "/branches/" + std::to_string(b) + "/body");
        }
        if (!alt->branches.empty() && std::abs(sum - 1.0) > kProbabilityTolerance) {
          std::ostringstream os;
          os << "branch probabilities sum to " << sum;
          add("ALT_PROB_SUM", p, os.str());
        }
      } else if (const auto* loop = std::get_if<Loop>(&step.node)) {
        if (!(loop->count > 0.0) || !std::isfinite(loop->count))
          add("LOOP_COUNT", p, "loop count must be a finite value > 0");
        check_body(loop->body, p + "/body");
      }
    }
  }

  void check_message(const Message& m, const std::string& path) {
    const Component* from = model_.find_component(m.from);
    const Component* to = model_.find_component(m.to);
    if (!from) add("DANGLING_REF", path + "/from", "unknown component '" + m.from + "'");
    if (!to) {
      add("DANGLING_REF", path + "/to", "unknown component '" + m.to + "'");
      return;
    }
    if (to->client) add("MESSAGE_TO_CLIENT", path, "messages cannot target the client");
    if (!provides(*to, m.operation))
      add("OPERATION_NOT_PROVIDED", path,
          "component '" + m.to + "' does not provide '" + m.operation + "'");
  }

  bool provides(const Component& c, const std::string& op) const {
    return std::any_of(c.provided.begin(), c.provided.end(), [&](const std::string& iid) {
      const Interface* iface = model_.find_interface(iid);
      return iface && iface->has_operation(op);
    });
  }

  const SoftwareModel& model_;
  ValidationReport report_;
};

}  // namespace

bool ValidationReport::has(const std::string& code) const {
  return std::any_of(violations.begin(), violations.end(),
                     [&](const Violation& v) { return v.code == code; });
}

ValidationReport validate_model(const SoftwareModel& model) { return Validator(model).run(); }

void require_valid(const SoftwareModel& model) {
  ValidationReport report = validate_model(model);
  if (report.ok()) return;
  std::string what = "model is invalid:";
  for (const Violation& v : report.violations) what += " [" + v.code + " " + v.path + "]";
  throw Error(Errc::InvalidModel, what);
}

}  // namespace spe
