#include "spe/antipatterns.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

#include "json_util.hpp"
#include "spe/error.hpp"

namespace spe {

using detail::child;
using detail::Json;

void DetectionConfig::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw Error(Errc::InvalidArgument, std::string(name) + " must be a positive number");
  };
  positive(blobMinConnections, "blobMinConnections");
  positive(blobMinUtilization, "blobMinUtilization");
  positive(blobMinDemandShare, "blobMinDemandShare");
  positive(estMinMessages, "estMinMessages");
  positive(estRemoteCost, "estRemoteCost");
  positive(facadeLocalCost, "facadeLocalCost");
}

std::string_view to_string(AntipatternKind kind) { return kind == AntipatternKind::Blob ? "BLOB" : "EST"; }

std::string AntipatternSubject::id() const {
  if (kind == AntipatternKind::Blob) return "BLOB:" + component;
  return "EST:" + scenario + ":" + caller + ":" + callee;
}

AntipatternSubject blob_subject(const std::string& component) {
  return {AntipatternKind::Blob, component, {}, {}, {}};
}

AntipatternSubject est_subject(const std::string& scenario, const std::string& caller, const std::string& callee) {
  return {AntipatternKind::Est, {}, scenario, caller, callee};
}

namespace {

std::set<std::string> provided_by(const SoftwareModel& m, const std::string& component) {
  const Component* c = m.find_component(component);
  return c ? std::set<std::string>(c->provided.begin(), c->provided.end()) : std::set<std::string>{};
}

double remote_count(const Scenario& s, const std::string& from, const std::string& to) {
  double n = 0.0;
  for_each_message(s.body, 1.0, [&](const Message& m, double w) {
    if (!m.local && m.from == from && m.to == to) n += w;
  });
  return n;
}

bool sends_to(const SoftwareModel& m, const std::string& from, const std::string& to) {
  bool found = false;
  for (const Scenario& s : m.scenarios)
    for_each_message(s.body, 1.0, [&](const Message& msg, double) {
      if (msg.from == from && msg.to == to) found = true;
    });
  return found;
}

std::string unused_id(const SoftwareModel& m, const std::string& stem) {
  std::string id = stem;
  for (int i = 2; m.find_component(id) || m.find_interface("I" + id); ++i) id = stem + std::to_string(i);
  return id;
}

}  // namespace

int connection_count(const SoftwareModel& model, const std::string& component) {
  const Component* self = model.find_component(component);
  if (!self) return 0;
  std::set<std::string> linked;
  const std::set<std::string> mine = provided_by(model, component);
  for (const Component& other : model.components) {
    if (other.id == component) continue;
    for (const std::string& r : other.required)
      if (mine.count(r)) linked.insert(other.id);
    const std::set<std::string> theirs(other.provided.begin(), other.provided.end());
    for (const std::string& r : self->required)
      if (theirs.count(r)) linked.insert(other.id);
  }
  for (const Scenario& s : model.scenarios)
    for_each_message(s.body, 1.0, [&](const Message& m, double) {
      if (m.from == component && m.to != component) linked.insert(m.to);
      if (m.to == component && m.from != component) linked.insert(m.from);
    });
  return static_cast<int>(linked.size());
}

std::vector<AntipatternOccurrence> detect_blob(const SoftwareModel& model, const SolverResult& result,
                                               const TraceModel& trace, const DetectionConfig& cfg) {
  cfg.validate();
  double busy = 0.0;
  for (Eigen::Index k = 0; k < result.utilization.size(); ++k)
    if (result.centerKinds[static_cast<std::size_t>(k)] == CenterKind::Queueing) busy += result.utilization(k);

  std::vector<AntipatternOccurrence> out;
  for (const Component& c : model.components) {
    if (c.frozen || c.client) continue;
    double u = 0.0;
    for (const CenterLink& link : trace.centers) {
      if (path_leaf(link.component) != c.id) continue;
      if (auto k = result.center_index(path_leaf(link.center))) u = std::max(u, result.utilization(*k));
    }
    const double share = busy > 0.0 ? u / busy : 0.0;
    const int connections = connection_count(model, c.id);
    if (connections < cfg.blobMinConnections) continue;
    if (u < cfg.blobMinUtilization && share < cfg.blobMinDemandShare) continue;

    AntipatternOccurrence occ;
    occ.subject = blob_subject(c.id);
    occ.evidence = {{"connections", connections}, {"utilization", u}, {"demandShare", share}};
    occ.candidatePlans.push_back(
        {"split " + c.id + " into two parts taking 80% and 20% of its requests",
         BlobSplitSpec{{{c.id + "A", 0.8, {}}, {c.id + "B", 0.2, {}}}}});
    occ.candidatePlans.push_back({"split " + c.id + " into two balanced parts",
                                  BlobSplitSpec{{{c.id + "A", 0.5, {}}, {c.id + "B", 0.5, {}}}}});
    out.push_back(std::move(occ));
  }
  std::stable_sort(out.begin(), out.end(), [](const AntipatternOccurrence& a, const AntipatternOccurrence& b) {
    return a.evidence.at("utilization") > b.evidence.at("utilization");
  });
  return out;
}

std::vector<AntipatternOccurrence> detect_est(const SoftwareModel& model, const DetectionConfig& cfg) {
  cfg.validate();
  std::vector<AntipatternOccurrence> out;
  for (const Scenario& s : model.scenarios) {
    std::map<std::pair<std::string, std::string>, double> counts;
    for_each_message(s.body, 1.0, [&](const Message& m, double w) {
      if (!m.local) counts[{m.from, m.to}] += w;
    });
    for (const auto& [pair, n] : counts) {
      if (n < cfg.estMinMessages) continue;
      AntipatternOccurrence occ;
      occ.subject = est_subject(s.id, pair.first, pair.second);
      occ.evidence = {{"messages", n}};
      const Component* caller = model.find_component(pair.first);
      if (caller && !caller->frozen) {
        EstFacadeSpec spec{unused_id(model, "RemoteFacade"), unused_id(model, "LocalFacade"), cfg.estRemoteCost,
                           cfg.facadeLocalCost};
        occ.candidatePlans.push_back({"batch the " + pair.first + " requests to " + pair.second +
                                         " through a session facade",
                                     spec});
      }
      out.push_back(std::move(occ));
    }
  }
  return out;
}

SoftwareModel solve_blob(const SoftwareModel& model, const AntipatternOccurrence& occurrence,
                         const BlobSplitSpec& spec) {
  const AntipatternSubject& subject = occurrence.subject;
  if (subject.kind != AntipatternKind::Blob || !model.find_component(subject.component))
    throw Error(Errc::NoSuchOccurrence, "'" + subject.id() + "' is not a BLOB of this model");
  std::vector<SplitPart> parts;
  std::vector<std::vector<std::string>> operations;
  bool subsets = false;
  for (const BlobPart& p : spec.parts) {
    parts.push_back({p.name, p.probability});
    operations.push_back(p.operations);
    subsets = subsets || !p.operations.empty();
  }
  for (auto& ops : operations)
    if (subsets && ops.empty())
      for (const std::string& iface : model.find_component(subject.component)->provided)
        if (const Interface* i = model.find_interface(iface))
          for (const Operation& op : i->operations) ops.push_back(op.id);
  SoftwareModel m = split_component(model, subject.component, parts, subsets ? operations : decltype(operations){});
  m.version = model.version + 1;
  return m;
}

SoftwareModel solve_est(const SoftwareModel& model, const AntipatternOccurrence& occurrence,
                        const EstFacadeSpec& spec) {
  const AntipatternSubject& subject = occurrence.subject;
  const Scenario* scenario = model.find_scenario(subject.scenario);
  if (subject.kind != AntipatternKind::Est || !scenario || !model.find_component(subject.caller) ||
      !model.find_component(subject.callee))
    throw Error(Errc::NoSuchOccurrence, "'" + subject.id() + "' is not an EST of this model");
  if (model.find_component(subject.caller)->frozen)
    throw Error(Errc::FrozenElement, "caller '" + subject.caller + "' is frozen");
  const double k = remote_count(*scenario, subject.caller, subject.callee);
  if (k < 2.0)
    throw Error(Errc::NothingToBatch, "scenario '" + scenario->id + "' sends " + std::to_string(k) +
                                          " request(s) from " + subject.caller + " to " + subject.callee);
  const std::string& rf = spec.remoteFacade;
  const std::string& lf = spec.localFacade;
  if (rf.empty() || lf.empty() || rf == lf)
    throw Error(Errc::InvalidEdit, "facade names must be distinct and non-empty");
  for (const std::string& id : {rf, lf})
    if (model.find_component(id) || model.find_interface("I" + id))
      throw Error(Errc::InvalidEdit, "component or interface '" + id + "' already exists");
  if (!(spec.remoteCost > 0.0) || !(spec.localCost > 0.0))
    throw Error(Errc::InvalidEdit, "facade costs must be positive");

  SoftwareModel m = model;
  const std::string op = "execute" + scenario->id;
  const std::string& caller = subject.caller;
  const std::string& callee = subject.callee;

  auto is_batched = [&](const Message& msg) { return !msg.local && msg.from == caller && msg.to == callee; };
  std::function<void(Body&)> relay_nested = [&](Body& body) {
    for (Step& step : body) {
      if (auto* msg = std::get_if<Message>(&step.node)) {
        if (is_batched(*msg)) {
          msg->from = lf;
          msg->local = true;
        }
      } else if (auto* alt = std::get_if<Alt>(&step.node)) {
        for (Branch& b : alt->branches) relay_nested(b.body);
      } else if (auto* loop = std::get_if<Loop>(&step.node)) {
        relay_nested(loop->body);
      }
    }
  };

  Scenario& s = *std::find_if(m.scenarios.begin(), m.scenarios.end(),
                              [&](const Scenario& x) { return x.id == scenario->id; });
  Body batch;
  Body rest;
  std::ptrdiff_t insert_at = -1;
  for (const Step& step : s.body) {
    const auto* msg = std::get_if<Message>(&step.node);
    if (msg && is_batched(*msg)) {
      if (insert_at < 0) insert_at = static_cast<std::ptrdiff_t>(rest.size());
      batch.push_back(Message{lf, callee, msg->operation, true});
      continue;
    }
    Body single{step};
    if (insert_at < 0 && remote_count(Scenario{"", "", "", single}, caller, callee) > 0.0)
      insert_at = static_cast<std::ptrdiff_t>(rest.size());
    relay_nested(single);
    rest.push_back(std::move(single.front()));
  }
  Body chain{Message{caller, rf, op, false}, Message{rf, lf, op, false}};
  chain.insert(chain.end(), batch.begin(), batch.end());
  rest.insert(rest.begin() + insert_at, chain.begin(), chain.end());
  s.body = std::move(rest);

  // Static view: facades and their interfaces.
  std::set<std::string> callee_ifaces;
  for_each_message(s.body, 1.0, [&](const Message& msg, double) {
    if (msg.from != lf || msg.to != callee) return;
    for (const std::string& i : model.find_component(callee)->provided)
      if (const Interface* iface = model.find_interface(i); iface && iface->has_operation(msg.operation))
        callee_ifaces.insert(i);
  });
  m.interfaces.push_back({"I" + rf, "I" + rf, {{op, op}}});
  m.interfaces.push_back({"I" + lf, "I" + lf, {{op, op}}});
  Component remote{rf, rf, {"I" + rf}, {"I" + lf}};
  Component local{lf, lf, {"I" + lf}, {callee_ifaces.begin(), callee_ifaces.end()}};
  m.components.push_back(remote);
  m.components.push_back(local);
  Component& c = *m.find_component(caller);
  c.required.push_back("I" + rf);
  if (!sends_to(m, caller, callee)) {
    const std::set<std::string> dropped = provided_by(m, callee);
    std::erase_if(c.required, [&](const std::string& r) { return dropped.count(r) > 0; });
  }
  m.demands.push_back({rf, op, spec.remoteCost});
  m.demands.push_back({lf, op, spec.localCost});
  m.version = model.version + 1;
  canonicalize(m);

  const ValidationReport report = validate_model(m);
  if (!report.ok())
    throw Error(Errc::InvalidEdit, "facade insertion produced an invalid model: " + report.violations.front().code);
  return m;
}

// ---------------------------------------------------------------------------

Json refactoring_spec_to_json(const RefactoringSpec& spec) {
  if (const auto* b = std::get_if<BlobSplitSpec>(&spec)) {
    Json parts = Json::array();
    for (const BlobPart& p : b->parts)
      parts.push_back({{"name", p.name}, {"probability", p.probability}, {"operations", p.operations}});
    return {{"kind", "blobSplit"}, {"parts", parts}};
  }
  const auto& e = std::get<EstFacadeSpec>(spec);
  return {{"kind", "estFacade"},
          {"remoteFacade", e.remoteFacade},
          {"localFacade", e.localFacade},
          {"remoteCostSec", e.remoteCost},
          {"localCostSec", e.localCost}};
}

Json occurrence_to_json(const AntipatternOccurrence& occ) {
  Json j;
  j["id"] = occ.subject.id();
  j["kind"] = to_string(occ.subject.kind);
  if (occ.subject.kind == AntipatternKind::Blob) {
    j["component"] = occ.subject.component;
  } else {
    j["scenario"] = occ.subject.scenario;
    j["caller"] = occ.subject.caller;
    j["callee"] = occ.subject.callee;
  }
  j["evidence"] = occ.evidence;
  Json plans = Json::array();
  for (const RefactoringPlan& p : occ.candidatePlans)
    plans.push_back({{"description", p.description}, {"spec", refactoring_spec_to_json(p.spec)}});
  j["candidatePlans"] = std::move(plans);
  return j;
}

Json occurrences_to_json(const std::vector<AntipatternOccurrence>& occurrences) {
  Json doc;
  doc["schema"] = kAntipatternSchema;
  Json list = Json::array();
  for (const auto& o : occurrences) list.push_back(occurrence_to_json(o));
  doc["occurrences"] = std::move(list);
  return doc;
}

DetectionConfig detection_config_from_json(const Json& j, const std::string& ptr) {
  detail::expect_object(j, ptr);
  DetectionConfig cfg;
  auto number = [&](std::string_view key, double& target) {
    if (detail::optional_field(j, key)) target = detail::get_number(j, ptr, key);
  };
  if (detail::optional_field(j, "blobMinConnections"))
    cfg.blobMinConnections = static_cast<int>(detail::get_integer(j, ptr, "blobMinConnections"));
  number("blobMinUtilization", cfg.blobMinUtilization);
  number("blobMinDemandShare", cfg.blobMinDemandShare);
  number("estMinMessages", cfg.estMinMessages);
  number("estRemoteCostSec", cfg.estRemoteCost);
  number("facadeLocalCostSec", cfg.facadeLocalCost);
  return cfg;
}

Json detection_config_to_json(const DetectionConfig& cfg) {
  return {{"blobMinConnections", cfg.blobMinConnections}, {"blobMinUtilization", cfg.blobMinUtilization},
          {"blobMinDemandShare", cfg.blobMinDemandShare}, {"estMinMessages", cfg.estMinMessages},
          {"estRemoteCostSec", cfg.estRemoteCost},       {"facadeLocalCostSec", cfg.facadeLocalCost}};
}

}  // namespace spe
