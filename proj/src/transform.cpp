#include "spe/transform.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "json_util.hpp"
#include "spe/error.hpp"

namespace spe {

using detail::child;
using detail::Json;

namespace {

constexpr double kProbabilityTolerance = 1e-9;
constexpr double kBackwardTolerance = 1e-9;

std::string component_path(const std::string& id) { return "/components/" + id; }
std::string center_path(const std::string& id) { return "/centers/" + id; }
std::string class_path(const std::string& id) { return "/classes/" + id; }

template <typename Links>
auto find_link(const Links& links, const std::string& path) {
  return std::find_if(links.begin(), links.end(), [&](const auto& l) { return l.center == path; });
}

// ---------------------------------------------------------------------------
// Component split on the software side
// ---------------------------------------------------------------------------

struct SplitContext {
  std::string component;
  std::vector<SplitPart> parts;
  std::vector<std::set<std::string>> operations;  // empty set: all operations
};

void retarget(Body& body, const std::string& from, const std::string& to,
              const std::set<std::string>& allowed) {
  for (Step& step : body) {
    if (auto* m = std::get_if<Message>(&step.node)) {
      if (m->to == from) {
        if (!allowed.empty() && !allowed.count(m->operation))
          throw Error(Errc::InvalidEdit, "part '" + to + "' does not keep operation '" + m->operation +
                                             "' invoked in its branch");
        m->to = to;
      }
      if (m->from == from) m->from = to;
    } else if (auto* alt = std::get_if<Alt>(&step.node)) {
      for (Branch& b : alt->branches) retarget(b.body, from, to, allowed);
    } else if (auto* loop = std::get_if<Loop>(&step.node)) {
      retarget(loop->body, from, to, allowed);
    }
  }
}

Body split_body(const Body& body, const SplitContext& ctx);

void flush_run(Body& out, Body& run, const SplitContext& ctx) {
  if (run.empty()) return;
  if (ctx.parts.size() == 1) {
    retarget(run, ctx.component, ctx.parts[0].id, ctx.operations[0]);
    for (Step& s : run) out.push_back(std::move(s));
  } else {
    Alt alt{"split:" + ctx.component, {}};
    for (std::size_t i = 0; i < ctx.parts.size(); ++i) {
      Body copy = run;
      retarget(copy, ctx.component, ctx.parts[i].id, ctx.operations[i]);
      alt.branches.push_back(Branch{ctx.parts[i].probability, std::move(copy)});
    }
    out.push_back(std::move(alt));
  }
  run.clear();
}

// Alternatives are entered so nested splits stay local to the branch that
// involves the component; messages and loops are grouped into runs.
Body split_body(const Body& body, const SplitContext& ctx) {
  Body out;
  Body run;
  for (const Step& step : body) {
    if (!involves(step, ctx.component)) {
      flush_run(out, run, ctx);
      out.push_back(step);
      continue;
    }
    if (const auto* alt = std::get_if<Alt>(&step.node)) {
      flush_run(out, run, ctx);
      Alt copy = *alt;
      for (Branch& b : copy.branches) b.body = split_body(b.body, ctx);
      out.push_back(std::move(copy));
      continue;
    }
    run.push_back(step);
  }
  flush_run(out, run, ctx);
  return out;
}

// ---------------------------------------------------------------------------
// Demand derivation
// ---------------------------------------------------------------------------

struct CellDerivation {
  std::vector<DemandTerm> terms;
  double demand() const {
    double d = 0.0;
    for (const DemandTerm& t : terms) d += t.invocations * t.serviceTime + t.remoteInvocations * t.requestOverhead;
    return d;
  }
};

// (component -> derivation) for one scenario.
std::map<std::string, CellDerivation> derive_scenario(const SoftwareModel& model, const Scenario& s) {
  const InvocationCounts all = expected_invocations(s);
  const InvocationCounts remote = expected_remote_invocations(s);
  std::map<std::string, CellDerivation> cells;
  for (const auto& [key, count] : all) {
    const auto& [componentId, op] = key;
    const DemandAnnotation* d = model.find_demand(componentId, op);
    if (!d)
      throw Error(Errc::MissingDemand, "operation '" + op + "' of component '" + componentId +
                                           "' is invoked by scenario '" + s.id + "' but has no demand annotation");
    const Component* c = model.find_component(componentId);
    auto r = remote.find(key);
    DemandTerm term{op, count, r == remote.end() ? 0.0 : r->second, d->serviceTime,
                    c ? c->requestOverhead : 0.0};
    cells[componentId].terms.push_back(term);
  }
  return cells;
}

// ---------------------------------------------------------------------------
// Backward replay of individual edits
// ---------------------------------------------------------------------------

const Scenario* scenario_of(const SoftwareModel& m, const std::string& workload) {
  auto it = std::find_if(m.scenarios.begin(), m.scenarios.end(),
                         [&](const Scenario& s) { return s.workload == workload; });
  return it == m.scenarios.end() ? nullptr : &*it;
}

void replay_change_demand(SoftwareModel& m, const ChangeDemand& e) {
  const Scenario* s = scenario_of(m, e.qnClass);
  const Component* comp = m.find_component(e.center);
  if (!s || !comp)
    throw Error(Errc::BackwardUnsupportedEdit, "demand edit on (" + e.center + ", " + e.qnClass +
                                                   ") has no traced software element");
  const auto cells = derive_scenario(m, *s);
  auto cell = cells.find(e.center);
  if (cell == cells.end())
    throw Error(Errc::BackwardUnsupportedEdit,
                "scenario '" + s->id + "' does not invoke '" + e.center + "'; a demand cannot be created");
  double service = 0.0, overhead = 0.0;
  for (const DemandTerm& t : cell->second.terms) {
    service += t.invocations * t.serviceTime;
    overhead += t.remoteInvocations * t.requestOverhead;
  }
  const double factor = (e.demand - overhead) / service;
  if (!(factor > 0.0) || !std::isfinite(factor))
    throw Error(Errc::BackwardUnsupportedEdit, "demand " + std::to_string(e.demand) + " at '" + e.center +
                                                   "' is not reachable by rescaling service times");
  for (const DemandTerm& t : cell->second.terms) {
    for (const Scenario& other : m.scenarios) {
      if (other.id == s->id) continue;
      const InvocationCounts n = expected_invocations(other);
      auto it = n.find({e.center, t.operation});
      if (it != n.end() && it->second > 0.0)
        throw Error(Errc::BackwardUnsupportedEdit, "operation '" + e.center + "." + t.operation +
                                                       "' is shared with scenario '" + other.id +
                                                       "'; rescaling it would change another class");
    }
  }
  for (const DemandTerm& t : cell->second.terms) m.find_demand(e.center, t.operation)->serviceTime *= factor;
}

bool reweight(Body& body, const std::string& label, const std::map<std::string, double>& weights) {
  bool found = false;
  for (Step& step : body) {
    if (auto* alt = std::get_if<Alt>(&step.node)) {
      if (alt->label == label) {
        for (Branch& b : alt->branches) {
          for (const auto& [part, p] : weights) {
            Step probe{Loop{1.0, b.body}};
            if (involves(probe, part)) {
              b.probability = p;
              break;
            }
          }
        }
        found = true;
      }
      for (Branch& b : alt->branches) found = reweight(b.body, label, weights) || found;
    } else if (auto* loop = std::get_if<Loop>(&step.node)) {
      found = reweight(loop->body, label, weights) || found;
    }
  }
  return found;
}

void replay_change_routing(SoftwareModel& m, const ChangeRouting& e) {
  std::map<std::string, double> weights;
  for (std::size_t i = 0; i < e.parts.size(); ++i) weights[e.parts[i]] = e.probabilities[i];
  bool found = false;
  for (Scenario& s : m.scenarios) found = reweight(s.body, "split:" + e.center, weights) || found;
  if (!found)
    throw Error(Errc::BackwardUnsupportedEdit, "no split fragment of '" + e.center + "' in the software model");
}

void replay(SoftwareModel& m, const QnEdit& edit) {
  if (const auto* e = std::get_if<SplitCenter>(&edit)) {
    m = split_component(m, e->center, e->parts);
  } else if (const auto* e = std::get_if<ChangeDemand>(&edit)) {
    replay_change_demand(m, *e);
  } else if (const auto* e = std::get_if<ChangeRouting>(&edit)) {
    replay_change_routing(m, *e);
  } else if (const auto* e = std::get_if<ChangeThinkTime>(&edit)) {
    Workload* w = m.find_workload(e->qnClass);
    if (!w) throw Error(Errc::BackwardUnsupportedEdit, "class '" + e->qnClass + "' has no traced workload");
    w->thinkTime = e->seconds;
  }
}

}  // namespace

// ---------------------------------------------------------------------------

const CenterLink* TraceModel::center_link(const std::string& centerId) const {
  auto it = find_link(centers, center_path(centerId));
  return it == centers.end() ? nullptr : &*it;
}

const ClassLink* TraceModel::class_link(const std::string& classId) const {
  auto it = std::find_if(classes.begin(), classes.end(),
                         [&](const ClassLink& l) { return l.qnClass == class_path(classId); });
  return it == classes.end() ? nullptr : &*it;
}

const SplitLink* TraceModel::split_link(const std::string& centerId) const {
  auto it = std::find_if(splits.begin(), splits.end(), [&](const SplitLink& l) { return l.center == centerId; });
  return it == splits.end() ? nullptr : &*it;
}

std::string path_leaf(const std::string& path) {
  auto pos = path.rfind('/');
  return pos == std::string::npos ? path : path.substr(pos + 1);
}

void check_probabilities(const std::vector<double>& probabilities, const std::string& what) {
  if (probabilities.empty()) throw Error(Errc::BadProbabilities, what + ": no parts given");
  double sum = 0.0;
  for (double p : probabilities) {
    if (!(p > 0.0 && p <= 1.0))
      throw Error(Errc::BadProbabilities, what + ": probability " + std::to_string(p) + " outside (0, 1]");
    sum += p;
  }
  if (std::abs(sum - 1.0) > kProbabilityTolerance)
    throw Error(Errc::BadProbabilities, what + ": probabilities sum to " + std::to_string(sum));
}

ForwardResult forward(const SoftwareModel& model) {
  if (std::none_of(model.components.begin(), model.components.end(), [](const Component& c) { return c.client; }))
    throw Error(Errc::NoClientComponent, "the model has no client component to map onto the delay center");
  require_valid(model);

  ForwardResult out;
  QnModel& qn = out.qn;
  TraceModel& trace = out.trace;
  trace.sourceVersion = model.version;

  const Component* client = model.client();
  qn.centers.push_back({client->id, CenterKind::Delay});
  trace.centers.push_back({component_path(client->id), center_path(client->id), client->frozen, true});
  for (const Component& c : model.components) {
    if (c.client) continue;
    qn.centers.push_back({c.id, CenterKind::Queueing});
    trace.centers.push_back({component_path(c.id), center_path(c.id), c.frozen, false});
  }

  for (const Scenario& s : model.scenarios) {
    const Workload* w = model.find_workload(s.workload);
    qn.classes.push_back({w->id, w->population, w->thinkTime});
    trace.classes.push_back({"/scenarios/" + s.id, "/workloads/" + w->id, class_path(w->id)});
  }

  qn.demand = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(qn.centers.size()),
                                    static_cast<Eigen::Index>(qn.classes.size()));
  for (std::size_t c = 0; c < model.scenarios.size(); ++c) {
    const Scenario& s = model.scenarios[c];
    for (const auto& [componentId, cell] : derive_scenario(model, s)) {
      const Eigen::Index k = *qn.center_index(componentId);
      qn.demand(k, static_cast<Eigen::Index>(c)) = cell.demand();
      trace.demands.push_back({center_path(componentId), class_path(s.workload), s.id, cell.terms});
    }
  }
  return out;
}

ForwardResult apply_qn_edit(const QnModel& qn, const TraceModel& trace, const QnEdit& edit) {
  ForwardResult out{qn, trace};
  auto require_center = [&](const std::string& id) -> Eigen::Index {
    auto k = qn.center_index(id);
    if (!k) throw Error(Errc::UnknownElement, "unknown center '" + id + "'");
    const CenterLink* link = trace.center_link(id);
    if (link && link->frozen)
      throw Error(Errc::FrozenElement, "center '" + id + "' traces to frozen component '" +
                                           path_leaf(link->component) + "'");
    if (qn.centers[*k].kind == CenterKind::Delay)
      throw Error(Errc::InvalidEdit, "center '" + id + "' is the delay center; edit think times instead");
    return *k;
  };
  auto require_class = [&](const std::string& id) -> Eigen::Index {
    auto c = qn.class_index(id);
    if (!c) throw Error(Errc::UnknownElement, "unknown class '" + id + "'");
    return *c;
  };

  if (const auto* e = std::get_if<SplitCenter>(&edit)) {
    const Eigen::Index k = require_center(e->center);
    std::vector<double> probs;
    std::set<std::string> ids;
    for (const SplitPart& p : e->parts) {
      probs.push_back(p.probability);
      if (p.id.empty() || !ids.insert(p.id).second || qn.center_index(p.id))
        throw Error(Errc::InvalidEdit, "split part id '" + p.id + "' is empty, repeated or already in use");
    }
    check_probabilities(probs, "split of '" + e->center + "'");

    const Eigen::Index n = static_cast<Eigen::Index>(e->parts.size());
    QnModel& q = out.qn;
    q.centers.erase(q.centers.begin() + k);
    Eigen::MatrixXd demand(qn.demand.rows() - 1 + n, qn.demand.cols());
    demand.topRows(k) = qn.demand.topRows(k);
    for (Eigen::Index i = 0; i < n; ++i) {
      q.centers.insert(q.centers.begin() + k + i, QnCenter{e->parts[i].id, CenterKind::Queueing});
      demand.row(k + i) = e->parts[i].probability * qn.demand.row(k);
    }
    demand.bottomRows(qn.demand.rows() - k - 1) = qn.demand.bottomRows(qn.demand.rows() - k - 1);
    q.demand = std::move(demand);

    TraceModel& t = out.trace;
    auto link = find_link(t.centers, center_path(e->center));
    const std::string component = link == t.centers.end() ? component_path(e->center) : link->component;
    if (link != t.centers.end()) t.centers.erase(link);
    for (const SplitPart& p : e->parts) t.centers.push_back({component, center_path(p.id), false, false});

    std::vector<DemandLink> demands;
    for (const DemandLink& d : t.demands) {
      if (d.center != center_path(e->center)) {
        demands.push_back(d);
        continue;
      }
      for (const SplitPart& p : e->parts) {
        DemandLink scaled = d;
        scaled.center = center_path(p.id);
        for (DemandTerm& term : scaled.terms) {
          term.invocations *= p.probability;
          term.remoteInvocations *= p.probability;
        }
        demands.push_back(std::move(scaled));
      }
    }
    t.demands = std::move(demands);
    t.splits.push_back({e->center, e->parts});
  } else if (const auto* e = std::get_if<ChangeDemand>(&edit)) {
    const Eigen::Index k = require_center(e->center);
    const Eigen::Index c = require_class(e->qnClass);
    if (!(e->demand >= 0.0) || !std::isfinite(e->demand))
      throw Error(Errc::InvalidEdit, "demand must be a finite value >= 0");
    out.qn.demand(k, c) = e->demand;
  } else if (const auto* e = std::get_if<ChangeRouting>(&edit)) {
    const SplitLink* split = trace.split_link(e->center);
    if (!split) throw Error(Errc::UnknownElement, "'" + e->center + "' has not been split");
    if (e->parts.size() != e->probabilities.size())
      throw Error(Errc::InvalidEdit, "routing edit needs one probability per part");
    std::set<std::string> expected, given(e->parts.begin(), e->parts.end());
    for (const SplitPart& p : split->parts) expected.insert(p.id);
    if (expected != given || given.size() != e->parts.size())
      throw Error(Errc::InvalidEdit, "routing edit must list exactly the parts of '" + e->center + "'");
    check_probabilities(e->probabilities, "routing of '" + e->center + "'");
    std::vector<Eigen::Index> rows;
    for (const std::string& part : e->parts) rows.push_back(require_center(part));
    Eigen::RowVectorXd total = Eigen::RowVectorXd::Zero(qn.demand.cols());
    for (Eigen::Index k : rows) total += qn.demand.row(k);
    for (std::size_t i = 0; i < rows.size(); ++i) out.qn.demand.row(rows[i]) = e->probabilities[i] * total;
    auto it = std::find_if(out.trace.splits.begin(), out.trace.splits.end(),
                           [&](const SplitLink& l) { return l.center == e->center; });
    for (SplitPart& p : it->parts) {
      auto pos = std::find(e->parts.begin(), e->parts.end(), p.id) - e->parts.begin();
      p.probability = e->probabilities[static_cast<std::size_t>(pos)];
    }
  } else if (const auto* e = std::get_if<ChangeThinkTime>(&edit)) {
    const Eigen::Index c = require_class(e->qnClass);
    if (!(e->seconds >= 0.0) || !std::isfinite(e->seconds))
      throw Error(Errc::InvalidEdit, "think time must be a finite value >= 0");
    out.qn.classes[static_cast<std::size_t>(c)].thinkTime = e->seconds;
  }
  out.trace.journal.push_back(edit);
  return out;
}

SoftwareModel backward(const QnModel& editedQn, const TraceModel& trace, const SoftwareModel& baseModel) {
  if (trace.sourceVersion != baseModel.version)
    throw Error(Errc::BackwardUnsupportedEdit, "trace was produced from model version " +
                                                   std::to_string(trace.sourceVersion) + ", not " +
                                                   std::to_string(baseModel.version));
  for (const QnCenter& c : editedQn.centers)
    if (!trace.center_link(c.id))
      throw Error(Errc::BackwardUnsupportedEdit, "center '" + c.id + "' has no trace link");
  for (const QnClass& c : editedQn.classes)
    if (!trace.class_link(c.id))
      throw Error(Errc::BackwardUnsupportedEdit, "class '" + c.id + "' has no trace link");

  SoftwareModel m = baseModel;
  for (const QnEdit& edit : trace.journal) replay(m, edit);
  if (!trace.journal.empty()) m.version = baseModel.version + 1;
  canonicalize(m);

  const ValidationReport report = validate_model(m);
  if (!report.ok())
    throw Error(Errc::BackwardUnsupportedEdit, "replayed model is invalid: " + report.violations.front().code +
                                                   " at " + report.violations.front().path);
  if (!equivalent(forward(m).qn, editedQn, kBackwardTolerance))
    throw Error(Errc::BackwardUnsupportedEdit,
                "the edited network differs from the recorded edits; hand edits outside the journal are not supported");
  return m;
}

SoftwareModel split_component(const SoftwareModel& model, const std::string& component,
                              const std::vector<SplitPart>& parts,
                              const std::vector<std::vector<std::string>>& operations) {
  const Component* original = model.find_component(component);
  if (!original) throw Error(Errc::UnknownElement, "unknown component '" + component + "'");
  if (original->frozen) throw Error(Errc::FrozenElement, "component '" + component + "' is frozen");
  if (original->client) throw Error(Errc::InvalidEdit, "the client component cannot be split");
  if (!operations.empty() && operations.size() != parts.size())
    throw Error(Errc::InvalidEdit, "operation subsets must be given for every part or for none");

  std::vector<double> probs;
  std::set<std::string> ids;
  for (const SplitPart& p : parts) {
    probs.push_back(p.probability);
    if (p.id.empty() || !ids.insert(p.id).second || model.find_component(p.id))
      throw Error(Errc::InvalidEdit, "split part id '" + p.id + "' is empty, repeated or already in use");
  }
  check_probabilities(probs, "split of '" + component + "'");

  SplitContext ctx{component, parts, {}};
  std::set<std::string> provided_ops;
  for (const std::string& ifaceId : original->provided)
    if (const Interface* iface = model.find_interface(ifaceId))
      for (const Operation& op : iface->operations) provided_ops.insert(op.id);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    std::set<std::string> subset;
    if (!operations.empty()) subset.insert(operations[i].begin(), operations[i].end());
    for (const std::string& op : subset)
      if (!provided_ops.count(op))
        throw Error(Errc::InvalidEdit, "'" + component + "' does not provide operation '" + op + "'");
    ctx.operations.push_back(std::move(subset));
  }

  SoftwareModel m = model;
  const Component orig = *original;

  // Interfaces: clone per part, drop originals nobody else provides.
  std::map<std::string, std::vector<std::string>> clones;  // original -> clone ids
  std::vector<std::vector<std::string>> provided(parts.size());
  for (const std::string& ifaceId : orig.provided) {
    const Interface* iface = model.find_interface(ifaceId);
    if (!iface) continue;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      Interface copy{ifaceId + "." + parts[i].id, iface->name + "." + parts[i].id, {}};
      for (const Operation& op : iface->operations)
        if (ctx.operations[i].empty() || ctx.operations[i].count(op.id)) copy.operations.push_back(op);
      if (copy.operations.empty()) continue;
      clones[ifaceId].push_back(copy.id);
      provided[i].push_back(copy.id);
      m.interfaces.push_back(std::move(copy));
    }
  }
  std::set<std::string> dropped;
  for (const std::string& ifaceId : orig.provided) {
    bool shared = std::any_of(model.components.begin(), model.components.end(), [&](const Component& c) {
      return c.id != component && std::count(c.provided.begin(), c.provided.end(), ifaceId);
    });
    if (!shared) dropped.insert(ifaceId);
  }
  std::erase_if(m.interfaces, [&](const Interface& i) { return dropped.count(i.id) > 0; });

  std::erase_if(m.components, [&](const Component& c) { return c.id == component; });
  for (Component& c : m.components) {
    std::vector<std::string> required;
    for (const std::string& r : c.required) {
      if (!dropped.count(r)) required.push_back(r);
      if (auto it = clones.find(r); it != clones.end())
        required.insert(required.end(), it->second.begin(), it->second.end());
    }
    c.required = std::move(required);
  }
  for (std::size_t i = 0; i < parts.size(); ++i) {
    Component part = orig;
    part.id = parts[i].id;
    part.name = parts[i].id;
    part.provided = provided[i];
    m.components.push_back(std::move(part));
  }

  std::vector<DemandAnnotation> demands;
  for (const DemandAnnotation& d : m.demands) {
    if (d.component != component) {
      demands.push_back(d);
      continue;
    }
    for (std::size_t i = 0; i < parts.size(); ++i)
      if (ctx.operations[i].empty() || ctx.operations[i].count(d.operation))
        demands.push_back({parts[i].id, d.operation, d.serviceTime});
  }
  m.demands = std::move(demands);

  for (Scenario& s : m.scenarios) s.body = split_body(s.body, ctx);
  canonicalize(m);
  return m;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {

Json parts_to_json(const std::vector<SplitPart>& parts) {
  Json a = Json::array();
  for (const SplitPart& p : parts) a.push_back({{"id", p.id}, {"probability", p.probability}});
  return a;
}

std::vector<SplitPart> parts_from_json(const Json& j, const std::string& ptr) {
  std::vector<SplitPart> parts;
  const Json& arr = detail::get_array(j, ptr, "parts");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string p = child(child(ptr, "parts"), i);
    parts.push_back({detail::get_string(arr[i], p, "id"), detail::get_number(arr[i], p, "probability")});
  }
  return parts;
}

Json terms_to_json(const std::vector<DemandTerm>& terms) {
  Json a = Json::array();
  for (const DemandTerm& t : terms)
    a.push_back({{"operation", t.operation},
                 {"invocations", t.invocations},
                 {"remoteInvocations", t.remoteInvocations},
                 {"serviceTimeSec", t.serviceTime},
                 {"requestOverheadSec", t.requestOverhead}});
  return a;
}

}  // namespace

Json qn_edit_to_json(const QnEdit& edit) {
  if (const auto* e = std::get_if<SplitCenter>(&edit))
    return {{"kind", "splitCenter"}, {"center", e->center}, {"parts", parts_to_json(e->parts)}};
  if (const auto* e = std::get_if<ChangeDemand>(&edit))
    return {{"kind", "changeDemand"}, {"center", e->center}, {"class", e->qnClass}, {"demandSec", e->demand}};
  if (const auto* e = std::get_if<ChangeRouting>(&edit)) {
    Json parts = Json::array();
    for (std::size_t i = 0; i < e->parts.size(); ++i)
      parts.push_back({{"id", e->parts[i]}, {"probability", e->probabilities[i]}});
    return {{"kind", "changeRouting"}, {"center", e->center}, {"parts", parts}};
  }
  const auto& e = std::get<ChangeThinkTime>(edit);
  return {{"kind", "changeThinkTime"}, {"class", e.qnClass}, {"thinkTimeSec", e.seconds}};
}

QnEdit qn_edit_from_json(const Json& j, const std::string& ptr) {
  detail::expect_object(j, ptr);
  const std::string kind = detail::get_string(j, ptr, "kind");
  if (kind == "splitCenter") return SplitCenter{detail::get_string(j, ptr, "center"), parts_from_json(j, ptr)};
  if (kind == "changeDemand")
    return ChangeDemand{detail::get_string(j, ptr, "center"), detail::get_string(j, ptr, "class"),
                        detail::get_number(j, ptr, "demandSec")};
  if (kind == "changeRouting") {
    ChangeRouting e{detail::get_string(j, ptr, "center"), {}, {}};
    for (const SplitPart& p : parts_from_json(j, ptr)) {
      e.parts.push_back(p.id);
      e.probabilities.push_back(p.probability);
    }
    return e;
  }
  if (kind == "changeThinkTime")
    return ChangeThinkTime{detail::get_string(j, ptr, "class"), detail::get_number(j, ptr, "thinkTimeSec")};
  throw SchemaError(child(ptr, "kind"), "unknown edit kind '" + kind + "'");
}

Json trace_to_json(const TraceModel& t) {
  Json doc;
  doc["schema"] = kTraceSchema;
  doc["sourceVersion"] = t.sourceVersion;
  Json links = Json::array();
  for (const CenterLink& l : t.centers)
    links.push_back({{"kind", "componentToCenter"}, {"software", l.component}, {"qn", l.center},
                     {"frozen", l.frozen}, {"client", l.client}});
  for (const ClassLink& l : t.classes)
    links.push_back({{"kind", "scenarioToClass"}, {"software", l.scenario}, {"workload", l.workload},
                     {"qn", l.qnClass}});
  for (const DemandLink& l : t.demands)
    links.push_back({{"kind", "demandDerivation"}, {"software", "/scenarios/" + l.scenario},
                     {"qn", l.center + l.qnClass}, {"center", l.center}, {"class", l.qnClass},
                     {"scenario", l.scenario}, {"weights", terms_to_json(l.terms)}});
  for (const SplitLink& l : t.splits)
    links.push_back({{"kind", "splitProvenance"}, {"qn", center_path(l.center)}, {"center", l.center},
                     {"parts", parts_to_json(l.parts)}});
  doc["links"] = std::move(links);
  Json journal = Json::array();
  for (const QnEdit& e : t.journal) journal.push_back(qn_edit_to_json(e));
  doc["journal"] = std::move(journal);
  return doc;
}

TraceModel trace_from_json(const Json& doc, const std::string& base) {
  detail::expect_object(doc, base);
  const std::string schema = detail::get_string(doc, base, "schema");
  if (schema != kTraceSchema) throw SchemaError(child(base, "schema"), "expected schema '" + std::string(kTraceSchema) + "'");
  TraceModel t;
  t.sourceVersion = static_cast<int>(detail::get_integer(doc, base, "sourceVersion"));
  const Json& links = detail::get_array(doc, base, "links");
  for (std::size_t i = 0; i < links.size(); ++i) {
    const std::string p = child(child(base, "links"), i);
    const Json& l = links[i];
    const std::string kind = detail::get_string(l, p, "kind");
    if (kind == "componentToCenter") {
      t.centers.push_back({detail::get_string(l, p, "software"), detail::get_string(l, p, "qn"),
                           detail::get_bool(l, p, "frozen", false), detail::get_bool(l, p, "client", false)});
    } else if (kind == "scenarioToClass") {
      t.classes.push_back({detail::get_string(l, p, "software"), detail::get_string(l, p, "workload"),
                           detail::get_string(l, p, "qn")});
    } else if (kind == "demandDerivation") {
      DemandLink d{detail::get_string(l, p, "center"), detail::get_string(l, p, "class"),
                   detail::get_string(l, p, "scenario"), {}};
      const Json& w = detail::get_array(l, p, "weights");
      for (std::size_t k = 0; k < w.size(); ++k) {
        const std::string wp = child(child(p, "weights"), k);
        d.terms.push_back({detail::get_string(w[k], wp, "operation"), detail::get_number(w[k], wp, "invocations"),
                           detail::get_number(w[k], wp, "remoteInvocations"),
                           detail::get_number(w[k], wp, "serviceTimeSec"),
                           detail::get_number(w[k], wp, "requestOverheadSec")});
      }
      t.demands.push_back(std::move(d));
    } else if (kind == "splitProvenance") {
      t.splits.push_back({detail::get_string(l, p, "center"), parts_from_json(l, p)});
    } else {
      throw SchemaError(child(p, "kind"), "unknown link kind '" + kind + "'");
    }
  }
  const Json& journal = detail::get_array(doc, base, "journal");
  for (std::size_t i = 0; i < journal.size(); ++i)
    t.journal.push_back(qn_edit_from_json(journal[i], child(child(base, "journal"), i)));
  return t;
}

Json qn_to_json(const QnModel& qn) {
  Json doc;
  Json classes = Json::array();
  for (const QnClass& c : qn.classes)
    classes.push_back({{"id", c.id}, {"population", c.population}, {"thinkTimeSec", c.thinkTime}});
  Json centers = Json::array();
  for (std::size_t k = 0; k < qn.centers.size(); ++k) {
    Json demand = Json::object();
    for (std::size_t c = 0; c < qn.classes.size(); ++c)
      demand[qn.classes[c].id] = qn.demand(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(c));
    centers.push_back({{"id", qn.centers[k].id},
                       {"kind", qn.centers[k].kind == CenterKind::Delay ? "delay" : "ps"},
                       {"demandSec", demand}});
  }
  doc["classes"] = std::move(classes);
  doc["centers"] = std::move(centers);
  return doc;
}

QnModel qn_from_json(const Json& doc, const std::string& base) {
  QnModel qn;
  const Json& classes = detail::get_array(doc, base, "classes");
  for (std::size_t i = 0; i < classes.size(); ++i) {
    const std::string p = child(child(base, "classes"), i);
    qn.classes.push_back({detail::get_string(classes[i], p, "id"),
                          static_cast<int>(detail::get_integer(classes[i], p, "population")),
                          detail::get_number(classes[i], p, "thinkTimeSec")});
  }
  const Json& centers = detail::get_array(doc, base, "centers");
  qn.demand = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(centers.size()),
                                    static_cast<Eigen::Index>(qn.classes.size()));
  for (std::size_t k = 0; k < centers.size(); ++k) {
    const std::string p = child(child(base, "centers"), k);
    const std::string kind = detail::get_string(centers[k], p, "kind");
    if (kind != "delay" && kind != "ps") throw SchemaError(child(p, "kind"), "expected 'delay' or 'ps'");
    qn.centers.push_back({detail::get_string(centers[k], p, "id"),
                          kind == "delay" ? CenterKind::Delay : CenterKind::Queueing});
    const Json& demand = detail::get_object(centers[k], p, "demandSec");
    for (std::size_t c = 0; c < qn.classes.size(); ++c)
      if (demand.contains(qn.classes[c].id))
        qn.demand(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(c)) =
            detail::get_number(demand, child(p, "demandSec"), qn.classes[c].id);
  }
  return qn;
}

std::string save_trace(const TraceModel& trace) { return detail::dump_document(trace_to_json(trace)); }

TraceModel load_trace(std::string_view document) { return trace_from_json(detail::parse_document(document)); }

}  // namespace spe
