#include "spe/session.hpp"

#include <chrono>
#include <numeric>

#include "json_util.hpp"
#include "spe/error.hpp"
#include "spe/model_io.hpp"

namespace spe {

using detail::child;
using detail::Json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

SoftwareAction blob_split_action(const std::string& component, const std::vector<BlobPart>& parts) {
  return {blob_subject(component), BlobSplitSpec{parts}};
}

SoftwareAction est_facade_action(const std::string& scenario, const std::string& caller, const std::string& callee,
                                 const EstFacadeSpec& spec) {
  return {est_subject(scenario, caller, callee), spec};
}

TradeoffReport scalability_tradeoff(const CostLedger& l) {
  if (l.softwareIterations == 0 && l.performanceIterations == 0)
    throw Error(Errc::EmptyLedger, "no iteration has been recorded");
  if (l.softwareIterations > 0 && l.tForward.empty())
    throw Error(Errc::EmptyLedger, "software-side iterations lack forward timings");
  if (l.performanceIterations > 0 && (l.tForth.empty() || l.tBack.empty()))
    throw Error(Errc::EmptyLedger, "performance-side iterations need forth and back timings; export a node first");
  TradeoffReport r;
  r.lhs = l.softwareIterations * mean(l.tForward);
  r.rhs = l.performanceIterations * (mean(l.tForth) + mean(l.tBack));
  r.softwareSideCheaper = r.lhs < r.rhs;
  return r;
}

bool SessionOptions::operator==(const SessionOptions& o) const {
  const AnalysisOptions& a = analysis;
  const AnalysisOptions& b = o.analysis;
  return a.solver == b.solver && a.mva.latticeBudget == b.mva.latticeBudget &&
         a.mva.amvaTolerance == b.mva.amvaTolerance && a.mva.amvaMaxIterations == b.mva.amvaMaxIterations &&
         a.simulation.horizon == b.simulation.horizon && a.simulation.warmup == b.simulation.warmup &&
         a.simulation.seed == b.simulation.seed && a.simulation.batches == b.simulation.batches &&
         a.simulation.confidence == b.simulation.confidence &&
         detection_config_to_json(detection) == detection_config_to_json(o.detection);
}

const DecisionNode* SessionState::find(const std::string& nodeId) const {
  for (const DecisionNode& n : nodes)
    if (n.id == nodeId) return &n;
  return nullptr;
}

// ---------------------------------------------------------------------------

Session::Session(const SoftwareModel& model, SessionOptions options, std::string id) {
  state_.id = std::move(id);
  state_.options = std::move(options);
  DecisionNode root;
  root.id = "n0";
  root.action = RootAction{};
  root.model = model;
  canonicalize(root.model);
  ForwardResult f = forward(root.model);
  root.qn = std::move(f.qn);
  root.trace = std::move(f.trace);
  root.result = analyze_qn(root.qn, state_.options.analysis);
  root.report = check_requirements(root.result, root.model.requirements);
  state_.nodes.push_back(std::move(root));
  state_.cursor = "n0";
}

Session::Session(SessionState state) : state_(std::move(state)) {}

DecisionNode Session::require(const std::string& nodeId) const {
  std::lock_guard lock(mutex_);
  const DecisionNode* n = state_.find(nodeId);
  if (!n) throw Error(Errc::UnknownNode, "unknown node '" + nodeId + "'");
  return *n;
}

DecisionNode Session::expand(const std::string& nodeId, const Action& action, const std::string& actionId) {
  auto existing = [&]() -> const DecisionNode* {
    if (actionId.empty()) return nullptr;
    for (const DecisionNode& n : state_.nodes)
      if (n.parent == nodeId && n.actionId == actionId) {
        if (!(n.action == action))
          throw Error(Errc::InvalidArgument, "action id '" + actionId + "' was used for a different action");
        return &n;
      }
    return nullptr;
  };
  DecisionNode parent;
  SessionOptions options;
  {
    std::lock_guard lock(mutex_);
    const DecisionNode* p = state_.find(nodeId);
    if (!p) throw Error(Errc::UnknownNode, "unknown node '" + nodeId + "'");
    if (const DecisionNode* n = existing()) return *n;
    parent = *p;
    options = state_.options;
  }

  DecisionNode child;
  child.parent = nodeId;
  child.actionId = actionId;
  child.action = action;
  std::optional<double> tForward, tForth, tBack;

  if (const auto* sw = std::get_if<SoftwareAction>(&action)) {
    SoftwareModel base = parent.model;
    if (!parent.trace.journal.empty()) {
      const auto start = Clock::now();
      base = backward(parent.qn, parent.trace, parent.model);
      tBack = seconds_since(start);
    }
    const auto start = Clock::now();
    const AntipatternOccurrence occurrence{sw->subject, {}, {}};
    if (const auto* blob = std::get_if<BlobSplitSpec>(&sw->spec)) {
      if (sw->subject.kind != AntipatternKind::Blob)
        throw Error(Errc::InvalidArgument, "a component split needs a BLOB subject");
      child.model = solve_blob(base, occurrence, *blob);
    } else {
      if (sw->subject.kind != AntipatternKind::Est)
        throw Error(Errc::InvalidArgument, "a session facade needs an EST subject");
      child.model = solve_est(base, occurrence, std::get<EstFacadeSpec>(sw->spec));
    }
    ForwardResult f = forward(child.model);
    tForward = seconds_since(start);
    child.qn = std::move(f.qn);
    child.trace = std::move(f.trace);
  } else if (const auto* perf = std::get_if<PerformanceAction>(&action)) {
    if (perf->edits.empty()) throw Error(Errc::InvalidEdit, "a performance action needs at least one edit");
    const auto start = Clock::now();
    ForwardResult f{parent.qn, parent.trace};
    for (const QnEdit& e : perf->edits) f = apply_qn_edit(f.qn, f.trace, e);
    tForth = seconds_since(start);
    child.model = parent.model;
    child.qn = std::move(f.qn);
    child.trace = std::move(f.trace);
  } else {
    throw Error(Errc::InvalidArgument, "the root action cannot be applied to a node");
  }
  child.result = analyze_qn(child.qn, options.analysis);
  child.report = check_requirements(child.result, child.model.requirements);

  std::lock_guard lock(mutex_);
  if (const DecisionNode* n = existing()) return *n;
  child.id = "n" + std::to_string(state_.nodes.size());
  for (DecisionNode& n : state_.nodes)
    if (n.id == nodeId) n.children.push_back(child.id);
  CostLedger& ledger = state_.ledger;
  if (tBack) ledger.tBack.push_back(*tBack);
  if (tForward) {
    ++ledger.softwareIterations;
    ledger.tForward.push_back(*tForward);
  }
  if (tForth) {
    ++ledger.performanceIterations;
    ledger.tForth.push_back(*tForth);
  }
  state_.nodes.push_back(child);
  state_.cursor = child.id;
  return child;
}

void Session::backtrack(const std::string& nodeId) {
  std::lock_guard lock(mutex_);
  if (!state_.find(nodeId)) throw Error(Errc::UnknownNode, "unknown node '" + nodeId + "'");
  state_.cursor = nodeId;
}

SoftwareModel Session::export_model(const std::string& nodeId) {
  const DecisionNode n = require(nodeId);
  if (n.trace.journal.empty()) return n.model;
  const auto start = Clock::now();
  SoftwareModel m = backward(n.qn, n.trace, n.model);
  const double elapsed = seconds_since(start);
  std::lock_guard lock(mutex_);
  state_.ledger.tBack.push_back(elapsed);
  return m;
}

std::vector<AntipatternOccurrence> Session::detect(const std::string& nodeId) {
  const DecisionNode n = require(nodeId);
  DetectionConfig cfg;
  {
    std::lock_guard lock(mutex_);
    cfg = state_.options.detection;
  }
  std::vector<AntipatternOccurrence> out;
  if (n.trace.journal.empty()) {
    out = detect_blob(n.model, n.result, n.trace, cfg);
    for (auto& o : detect_est(n.model, cfg)) out.push_back(std::move(o));
    return out;
  }
  const SoftwareModel m = export_model(nodeId);
  const ForwardResult f = forward(m);
  out = detect_blob(m, analyze_qn(f.qn, state_.options.analysis), f.trace, cfg);
  for (auto& o : detect_est(m, cfg)) out.push_back(std::move(o));
  return out;
}

DecisionNode Session::node(const std::string& nodeId) const { return require(nodeId); }

SessionState Session::snapshot() const {
  std::lock_guard lock(mutex_);
  return state_;
}

std::string Session::cursor() const {
  std::lock_guard lock(mutex_);
  return state_.cursor;
}

CostLedger Session::ledger() const {
  std::lock_guard lock(mutex_);
  return state_.ledger;
}

std::string Session::id() const {
  std::lock_guard lock(mutex_);
  return state_.id;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {

AntipatternSubject subject_from_json(const Json& j, const std::string& ptr, AntipatternKind kind) {
  if (kind == AntipatternKind::Blob) return blob_subject(detail::get_string(j, ptr, "component"));
  return est_subject(detail::get_string(j, ptr, "scenario"), detail::get_string(j, ptr, "caller"),
                     detail::get_string(j, ptr, "callee"));
}

Json options_to_json(const SessionOptions& o) {
  const AnalysisOptions& a = o.analysis;
  return {{"solver", to_string(a.solver)},
          {"latticeBudget", a.mva.latticeBudget},
          {"amvaTolerance", a.mva.amvaTolerance},
          {"amvaMaxIterations", a.mva.amvaMaxIterations},
          {"simulation",
           {{"horizonSec", a.simulation.horizon},
            {"warmupSec", a.simulation.warmup},
            {"seed", a.simulation.seed},
            {"batches", a.simulation.batches},
            {"confidence", a.simulation.confidence}}},
          {"detection", detection_config_to_json(o.detection)}};
}

SessionOptions options_from_json(const Json& j, const std::string& ptr) {
  SessionOptions o;
  AnalysisOptions& a = o.analysis;
  try {
    a.solver = parse_solver_choice(detail::get_string(j, ptr, "solver"));
  } catch (const SchemaError&) {
    throw;
  } catch (const Error& e) {
    throw SchemaError(child(ptr, "solver"), e.what());
  }
  a.mva.latticeBudget = static_cast<std::uint64_t>(detail::get_integer(j, ptr, "latticeBudget"));
  a.mva.amvaTolerance = detail::get_number(j, ptr, "amvaTolerance");
  a.mva.amvaMaxIterations = static_cast<int>(detail::get_integer(j, ptr, "amvaMaxIterations"));
  const std::string sp = child(ptr, "simulation");
  const Json& sim = detail::get_object(j, ptr, "simulation");
  a.simulation.horizon = detail::get_number(sim, sp, "horizonSec");
  a.simulation.warmup = detail::get_number(sim, sp, "warmupSec");
  a.simulation.seed = static_cast<std::uint64_t>(detail::get_integer(sim, sp, "seed"));
  a.simulation.batches = static_cast<int>(detail::get_integer(sim, sp, "batches"));
  a.simulation.confidence = detail::get_number(sim, sp, "confidence");
  o.detection = detection_config_from_json(detail::get_object(j, ptr, "detection"), child(ptr, "detection"));
  return o;
}

Json doubles(const std::vector<double>& v) { return Json(v); }

std::vector<double> read_doubles(const Json& j, const std::string& ptr, std::string_view key) {
  std::vector<double> out;
  const Json& a = detail::get_array(j, ptr, key);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a[i].is_number()) throw SchemaError(child(child(ptr, key), i), "expected a number");
    out.push_back(a[i].get<double>());
  }
  return out;
}

}  // namespace

Json action_to_json(const Action& action) {
  if (std::holds_alternative<RootAction>(action)) return {{"kind", "root"}};
  if (const auto* p = std::get_if<PerformanceAction>(&action)) {
    Json edits = Json::array();
    for (const QnEdit& e : p->edits) edits.push_back(qn_edit_to_json(e));
    return {{"kind", "qnEdits"}, {"edits", edits}};
  }
  const auto& s = std::get<SoftwareAction>(action);
  Json j = refactoring_spec_to_json(s.spec);
  if (s.subject.kind == AntipatternKind::Blob) {
    j["component"] = s.subject.component;
  } else {
    j["scenario"] = s.subject.scenario;
    j["caller"] = s.subject.caller;
    j["callee"] = s.subject.callee;
  }
  return j;
}

Action action_from_json(const Json& j, const std::string& ptr, const DetectionConfig& cfg) {
  detail::expect_object(j, ptr);
  const std::string kind = detail::get_string(j, ptr, "kind");
  if (kind == "root") return RootAction{};
  if (kind == "qnEdits") {
    PerformanceAction p;
    const Json& edits = detail::get_array(j, ptr, "edits");
    for (std::size_t i = 0; i < edits.size(); ++i)
      p.edits.push_back(qn_edit_from_json(edits[i], child(child(ptr, "edits"), i)));
    return p;
  }
  if (kind == "blobSplit") {
    BlobSplitSpec spec;
    const Json& parts = detail::get_array(j, ptr, "parts");
    for (std::size_t i = 0; i < parts.size(); ++i) {
      const std::string p = child(child(ptr, "parts"), i);
      BlobPart part{detail::get_string(parts[i], p, "name"), detail::get_number(parts[i], p, "probability"), {}};
      if (const Json* ops = detail::optional_field(parts[i], "operations")) {
        if (!ops->is_array()) throw SchemaError(child(p, "operations"), "expected an array");
        for (std::size_t k = 0; k < ops->size(); ++k) {
          if (!(*ops)[k].is_string()) throw SchemaError(child(child(p, "operations"), k), "expected a string");
          part.operations.push_back((*ops)[k].get<std::string>());
        }
      }
      spec.parts.push_back(std::move(part));
    }
    return SoftwareAction{subject_from_json(j, ptr, AntipatternKind::Blob), spec};
  }
  if (kind == "estFacade") {
    EstFacadeSpec spec{"RemoteFacade", "LocalFacade", cfg.estRemoteCost, cfg.facadeLocalCost};
    if (detail::optional_field(j, "remoteFacade")) spec.remoteFacade = detail::get_string(j, ptr, "remoteFacade");
    if (detail::optional_field(j, "localFacade")) spec.localFacade = detail::get_string(j, ptr, "localFacade");
    if (detail::optional_field(j, "remoteCostSec")) spec.remoteCost = detail::get_number(j, ptr, "remoteCostSec");
    if (detail::optional_field(j, "localCostSec")) spec.localCost = detail::get_number(j, ptr, "localCostSec");
    return SoftwareAction{subject_from_json(j, ptr, AntipatternKind::Est), spec};
  }
  throw SchemaError(child(ptr, "kind"), "unknown action kind '" + kind + "'");
}

Json ledger_to_json(const CostLedger& l) {
  Json j = {{"M", l.softwareIterations},
            {"N", l.performanceIterations},
            {"tForwardSec", doubles(l.tForward)},
            {"tForthSec", doubles(l.tForth)},
            {"tBackSec", doubles(l.tBack)}};
  try {
    const TradeoffReport r = scalability_tradeoff(l);
    j["tradeoff"] = {{"lhs", r.lhs}, {"rhs", r.rhs}, {"softwareSideCheaper", r.softwareSideCheaper}};
  } catch (const Error&) {
    j["tradeoff"] = nullptr;
  }
  return j;
}

Json node_to_json(const DecisionNode& n) {
  return {{"id", n.id},
          {"parent", n.parent},
          {"actionId", n.actionId},
          {"action", action_to_json(n.action)},
          {"model", model_to_json(n.model)},
          {"qn", qn_to_json(n.qn)},
          {"trace", trace_to_json(n.trace)},
          {"result", result_to_json(n.result)},
          {"report", report_to_json(n.report)},
          {"children", n.children}};
}

Json session_to_json(const SessionState& s) {
  Json nodes = Json::array();
  for (const DecisionNode& n : s.nodes) nodes.push_back(node_to_json(n));
  Json ledger = ledger_to_json(s.ledger);
  ledger.erase("tradeoff");
  return {{"schema", kSessionSchema}, {"id", s.id},         {"cursor", s.cursor},
          {"options", options_to_json(s.options)},          {"nodes", nodes},
          {"ledger", ledger}};
}

SessionState session_from_json(const Json& doc, const std::string& base) {
  detail::expect_object(doc, base);
  if (detail::get_string(doc, base, "schema") != kSessionSchema)
    throw SchemaError(child(base, "schema"), "expected schema '" + std::string(kSessionSchema) + "'");
  SessionState s;
  s.id = detail::get_string(doc, base, "id");
  s.cursor = detail::get_string(doc, base, "cursor");
  s.options = options_from_json(detail::get_object(doc, base, "options"), child(base, "options"));
  const Json& nodes = detail::get_array(doc, base, "nodes");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string p = child(child(base, "nodes"), i);
    const Json& n = nodes[i];
    DecisionNode node;
    node.id = detail::get_string(n, p, "id");
    node.parent = detail::get_string(n, p, "parent");
    node.actionId = detail::get_string(n, p, "actionId");
    node.action = action_from_json(detail::get_object(n, p, "action"), child(p, "action"), s.options.detection);
    node.model = model_from_json(detail::get_object(n, p, "model"), child(p, "model"));
    node.qn = qn_from_json(detail::get_object(n, p, "qn"), child(p, "qn"));
    node.trace = trace_from_json(detail::get_object(n, p, "trace"), child(p, "trace"));
    node.result = result_from_json(detail::get_object(n, p, "result"), child(p, "result"));
    node.report = report_from_json(detail::get_object(n, p, "report"), child(p, "report"));
    const Json& children = detail::get_array(n, p, "children");
    for (std::size_t k = 0; k < children.size(); ++k) {
      if (!children[k].is_string()) throw SchemaError(child(child(p, "children"), k), "expected a string");
      node.children.push_back(children[k].get<std::string>());
    }
    s.nodes.push_back(std::move(node));
  }
  if (!s.find(s.cursor)) throw SchemaError(child(base, "cursor"), "cursor names no node");
  const std::string lp = child(base, "ledger");
  const Json& l = detail::get_object(doc, base, "ledger");
  s.ledger.softwareIterations = static_cast<int>(detail::get_integer(l, lp, "M"));
  s.ledger.performanceIterations = static_cast<int>(detail::get_integer(l, lp, "N"));
  s.ledger.tForward = read_doubles(l, lp, "tForwardSec");
  s.ledger.tForth = read_doubles(l, lp, "tForthSec");
  s.ledger.tBack = read_doubles(l, lp, "tBackSec");
  return s;
}

Json tree_to_json(const SessionState& s) {
  Json nodes = Json::array();
  for (const DecisionNode& n : s.nodes) {
    nodes.push_back({{"id", n.id},
                     {"parent", n.parent.empty() ? Json(nullptr) : Json(n.parent)},
                     {"action", action_to_json(n.action)},
                     {"children", n.children},
                     {"solver", to_string(n.result.solver)},
                     {"satisfied", n.report.satisfied},
                     {"pendingQnEdits", n.trace.journal.size()},
                     {"violations", report_to_json(n.report)["violations"]}});
  }
  return {{"id", s.id}, {"cursor", s.cursor}, {"nodes", nodes}};
}

std::string save_session(const SessionState& state) { return detail::dump_document(session_to_json(state)); }

SessionState load_session(std::string_view document) { return session_from_json(detail::parse_document(document)); }

// ---------------------------------------------------------------------------

Walkthrough run_walkthrough(const SoftwareModel& model, const SessionOptions& options) {
  Session session(model, options, "walkthrough");
  Walkthrough w;
  w.root = "n0";
  const std::vector<BlobPart> catalogParts{{"FilmCatalog", 0.8, {}}, {"BookCatalog", 0.2, {}}};
  EstFacadeSpec facade{"RemoteFacade", "LocalFacade", options.detection.estRemoteCost,
                       options.detection.facadeLocalCost};

  w.blob = session.expand(w.root, blob_split_action("ProductCatalog", catalogParts)).id;
  w.est = session.expand(w.blob, est_facade_action("Register", "UserController", "Database", facade)).id;

  session.backtrack(w.root);
  w.catalogSplit =
      session.expand(w.root, PerformanceAction{{SplitCenter{"ProductCatalog", {{"FilmCatalog", 0.8}, {"BookCatalog", 0.2}}}}})
          .id;
  w.filmSplit =
      session
          .expand(w.catalogSplit,
                  PerformanceAction{{SplitCenter{"FilmCatalog", {{"FilmCatalog1", 0.5}, {"FilmCatalog2", 0.5}}}}})
          .id;
  w.exported = session.export_model(w.filmSplit);
  w.session = session.snapshot();
  return w;
}

}  // namespace spe
