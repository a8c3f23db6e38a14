#include "spe/cli.hpp"

#include <CLI11.hpp>
#include <fmt/core.h>

#include <algorithm>
#include <csignal>
#include <sstream>

#include "json_util.hpp"
#include "spe/analysis.hpp"
#include "spe/antipatterns.hpp"
#include "spe/ecs.hpp"
#include "spe/error.hpp"
#include "spe/model_io.hpp"
#include "spe/service.hpp"
#include "spe/session.hpp"
#include "spe/simulate.hpp"
#include "spe/transform.hpp"

namespace spe {

using detail::Json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::string model;
  std::string out;
  std::string solver = "auto";
  std::uint64_t seed = 1;
  std::string format = "text";

  bool structured() const { return format == "structured"; }

  AnalysisOptions analysis() const {
    AnalysisOptions o;
    try {
      o.solver = parse_solver_choice(solver);
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
    o.simulation.seed = seed;
    return o;
  }

  SoftwareModel load() const {
    if (model.empty()) throw UsageError("--model is required");
    return load_model_file(model);
  }
};

/// Writes `text` to --out when given, otherwise to `out`.
void emit(const Globals& g, std::ostream& out, const std::string& text) {
  if (g.out.empty())
    out << text;
  else
    write_text_file(g.out, text);
}

std::string dump(const Json& j) { return detail::dump_document(j); }

// ---------------------------------------------------------------------------
// analyze

struct Analysis {
  SolverResult result;
  RequirementReport report;
  std::optional<SimResult> sim;
};

Analysis run_analysis(const SoftwareModel& m, const AnalysisOptions& o) {
  const QnModel qn = forward(m).qn;
  Analysis a;
  if (o.solver == SolverChoice::Simulation) {
    a.sim = simulate(qn, o.simulation);
    a.result = a.sim->estimate;
  } else {
    a.result = analyze_qn(qn, o);
  }
  a.report = check_requirements(a.result, m.requirements);
  return a;
}

int cmd_analyze(const Globals& g, std::ostream& out) {
  const AnalysisOptions o = g.analysis();
  const SoftwareModel m = g.load();
  const Analysis a = run_analysis(m, o);
  if (g.structured()) {
    Json j = {{"result", result_to_json(a.result)}, {"report", report_to_json(a.report)}};
    if (a.sim) j["simulation"] = sim_to_json(*a.sim);
    emit(g, out, dump(j));
  } else {
    emit(g, out, format_tables(a.result, a.report, a.sim ? &*a.sim : nullptr));
  }
  return a.report.satisfied ? kExitOk : kExitViolations;
}

// ---------------------------------------------------------------------------
// detect

struct Thresholds {
  std::string file;
  std::optional<int> blobMinConnections;
  std::optional<double> blobMinUtilization, blobMinShare, estMinMessages;

  DetectionConfig config() const {
    DetectionConfig cfg;
    if (!file.empty()) cfg = detection_config_from_json(detail::parse_document(read_text_file(file)));
    if (blobMinConnections) cfg.blobMinConnections = *blobMinConnections;
    if (blobMinUtilization) cfg.blobMinUtilization = *blobMinUtilization;
    if (blobMinShare) cfg.blobMinDemandShare = *blobMinShare;
    if (estMinMessages) cfg.estMinMessages = *estMinMessages;
    try {
      cfg.validate();
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
    return cfg;
  }
};

void add_thresholds(CLI::App* cmd, Thresholds& t) {
  cmd->add_option("--thresholds", t.file, "detection settings file");
  cmd->add_option("--blob-min-connections", t.blobMinConnections, "BLOB: minimum connected components");
  cmd->add_option("--blob-min-utilization", t.blobMinUtilization, "BLOB: minimum utilization");
  cmd->add_option("--blob-min-share", t.blobMinShare, "BLOB: minimum share of the total busy time");
  cmd->add_option("--est-min-messages", t.estMinMessages, "EST: minimum requests per scenario execution");
}

std::string describe(const AntipatternOccurrence& o) {
  std::string line = o.subject.id();
  for (const auto& [key, value] : o.evidence) line += fmt::format("  {}={:.4g}", key, value);
  line += "\n";
  for (const RefactoringPlan& p : o.candidatePlans) line += "    plan: " + p.description + "\n";
  return line;
}

int cmd_detect(const Globals& g, const Thresholds& t, std::ostream& out) {
  const DetectionConfig cfg = t.config();
  const AnalysisOptions o = g.analysis();
  const SoftwareModel m = g.load();
  const ForwardResult f = forward(m);
  auto found = detect_blob(m, analyze_qn(f.qn, o), f.trace, cfg);
  for (auto& e : detect_est(m, cfg)) found.push_back(std::move(e));
  if (g.structured()) {
    emit(g, out, dump(occurrences_to_json(found)));
  } else {
    std::string text = found.empty() ? "no antipattern found\n" : "";
    for (const auto& occ : found) text += describe(occ);
    emit(g, out, text);
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// refactor

struct RefactorArgs {
  std::string actionFile;
  std::string blob;
  std::vector<std::string> parts;
  std::string est;
  std::string remoteFacade = "RemoteFacade", localFacade = "LocalFacade";
};

Action refactor_action(const RefactorArgs& a, const DetectionConfig& cfg) {
  const int given = !a.actionFile.empty() + !a.blob.empty() + !a.est.empty();
  if (given != 1) throw UsageError("give exactly one of --action, --blob or --est");
  if (!a.actionFile.empty()) return action_from_json(detail::parse_document(read_text_file(a.actionFile)), "", cfg);
  if (!a.blob.empty()) {
    std::vector<BlobPart> parts;
    for (const std::string& p : a.parts) {
      const auto eq = p.find('=');
      if (eq == std::string::npos) throw UsageError("--part expects NAME=PROBABILITY, got '" + p + "'");
      try {
        parts.push_back({p.substr(0, eq), std::stod(p.substr(eq + 1)), {}});
      } catch (const std::exception&) {
        throw UsageError("--part expects NAME=PROBABILITY, got '" + p + "'");
      }
    }
    if (parts.empty()) parts = {{a.blob + "A", 0.8, {}}, {a.blob + "B", 0.2, {}}};
    return blob_split_action(a.blob, parts);
  }
  std::vector<std::string> f;
  std::stringstream ss(a.est);
  for (std::string item; std::getline(ss, item, ':');) f.push_back(item);
  if (f.size() != 3) throw UsageError("--est expects SCENARIO:CALLER:CALLEE");
  return est_facade_action(f[0], f[1], f[2], {a.remoteFacade, a.localFacade, cfg.estRemoteCost, cfg.facadeLocalCost});
}

/// Applies a software action directly, or QN edits followed by backward.
SoftwareModel apply_action(const SoftwareModel& m, const Action& action) {
  if (const auto* sw = std::get_if<SoftwareAction>(&action)) {
    const AntipatternOccurrence occ{sw->subject, {}, {}};
    if (const auto* blob = std::get_if<BlobSplitSpec>(&sw->spec)) return solve_blob(m, occ, *blob);
    return solve_est(m, occ, std::get<EstFacadeSpec>(sw->spec));
  }
  if (const auto* perf = std::get_if<PerformanceAction>(&action)) {
    ForwardResult f = forward(m);
    for (const QnEdit& e : perf->edits) f = apply_qn_edit(f.qn, f.trace, e);
    return backward(f.qn, f.trace, m);
  }
  throw UsageError("the root action changes nothing");
}

int cmd_refactor(const Globals& g, const RefactorArgs& a, std::ostream& out) {
  const Action action = refactor_action(a, DetectionConfig{});
  const SoftwareModel m = g.load();
  emit(g, out, save_model(apply_action(m, action)));
  return kExitOk;
}

// ---------------------------------------------------------------------------
// session

struct SessionArgs {
  std::string file;
  std::string node;
  std::string actionFile;
  std::string actionId;
};

SessionState load_state(const SessionArgs& a) {
  if (a.file.empty()) throw UsageError("--session is required");
  return load_session(read_text_file(a.file));
}

/// Writes the session back to --out, or in place.
void store_state(const Globals& g, const SessionArgs& a, const SessionState& s) {
  write_text_file(g.out.empty() ? a.file : g.out, save_session(s));
}

std::string tree_text(const SessionState& s) {
  std::string text;
  std::function<void(const std::string&, int)> walk = [&](const std::string& id, int depth) {
    const DecisionNode& n = *s.find(id);
    std::string what = "root";
    if (const auto* sw = std::get_if<SoftwareAction>(&n.action))
      what = "software " + sw->subject.id();
    else if (const auto* p = std::get_if<PerformanceAction>(&n.action))
      what = fmt::format("performance, {} QN edit(s)", p->edits.size());
    std::string status = n.report.satisfied ? "satisfied" : "violates";
    if (!n.report.satisfied) {
      for (const auto& c : n.report.violated_classes()) status += " " + c;
      for (const auto& c : n.report.violated_centers()) status += " " + c;
    }
    text += fmt::format("{}{}{} [{}] {}\n", std::string(2 * depth, ' '), n.id, id == s.cursor ? " *" : "", what,
                        status);
    for (const auto& c : n.children) walk(c, depth + 1);
  };
  walk(s.nodes.front().id, 0);
  return text;
}

std::string ledger_text(const CostLedger& l) {
  std::string text = fmt::format("M = {} software iterations, N = {} performance iterations\n",
                                 l.softwareIterations, l.performanceIterations);
  try {
    const TradeoffReport r = scalability_tradeoff(l);
    text += fmt::format("M * mean(t_forward) = {:.6f} s\nN * (mean(t_forth) + mean(t_back)) = {:.6f} s\n", r.lhs,
                        r.rhs);
    text += r.softwareSideCheaper ? "the software side is cheaper\n" : "the performance side is cheaper\n";
  } catch (const Error& e) {
    text += std::string("tradeoff: ") + e.what() + "\n";
  }
  return text;
}

int cmd_session_new(const Globals& g, std::ostream& out) {
  if (g.out.empty()) throw UsageError("session new needs --out");
  SessionOptions o;
  o.analysis = g.analysis();
  Session s(g.load(), o);
  write_text_file(g.out, save_session(s.snapshot()));
  out << tree_text(s.snapshot());
  return kExitOk;
}

int cmd_session_show(const Globals& g, const SessionArgs& a, std::ostream& out) {
  const SessionState s = load_state(a);
  out << (g.structured() ? dump(tree_to_json(s)) : tree_text(s));
  return kExitOk;
}

int cmd_session_expand(const Globals& g, const SessionArgs& a, std::ostream& out) {
  if (a.node.empty() || a.actionFile.empty()) throw UsageError("session expand needs --node and --action");
  Session s(load_state(a));
  const Action action = action_from_json(detail::parse_document(read_text_file(a.actionFile)), "",
                                         s.snapshot().options.detection);
  const DecisionNode n = s.expand(a.node, action, a.actionId);
  store_state(g, a, s.snapshot());
  if (g.structured())
    out << dump(node_to_json(n));
  else
    out << "created " << n.id << "\n" << format_tables(n.result, n.report);
  return kExitOk;
}

int cmd_session_backtrack(const Globals& g, const SessionArgs& a, std::ostream& out) {
  if (a.node.empty()) throw UsageError("session backtrack needs --node");
  Session s(load_state(a));
  s.backtrack(a.node);
  store_state(g, a, s.snapshot());
  out << tree_text(s.snapshot());
  return kExitOk;
}

int cmd_session_export(const Globals& g, const SessionArgs& a, std::ostream& out) {
  if (a.node.empty() || g.out.empty()) throw UsageError("session export needs --node and --out");
  Session s(load_state(a));
  const SoftwareModel m = s.export_model(a.node);
  save_model_file(m, g.out);
  write_text_file(a.file, save_session(s.snapshot()));
  out << "wrote " << g.out << "\n";
  return kExitOk;
}

int cmd_session_ledger(const Globals& g, const SessionArgs& a, std::ostream& out) {
  const SessionState s = load_state(a);
  out << (g.structured() ? dump(ledger_to_json(s.ledger)) : ledger_text(s.ledger));
  return kExitOk;
}

// ---------------------------------------------------------------------------
// walkthrough

int cmd_walkthrough(const Globals& g, std::ostream& out) {
  SessionOptions o;
  o.analysis = g.analysis();
  const SoftwareModel m = g.model.empty() ? ecs_model() : g.load();
  const Walkthrough w = run_walkthrough(m, o);
  const SessionState& s = w.session;
  if (!g.out.empty()) write_text_file(g.out, save_session(s));

  const std::vector<std::pair<std::string, std::string>> steps{
      {w.root, "initial model"},
      {w.blob, "software side, step 1: split ProductCatalog into FilmCatalog (0.8) and BookCatalog (0.2)"},
      {w.est, "software side, step 2: session facade for the Register requests to Database"},
      {w.catalogSplit, "performance side, step 1: split the ProductCatalog center 0.8 / 0.2"},
      {w.filmSplit, "performance side, step 2: split the FilmCatalog center 0.5 / 0.5"}};
  if (g.structured()) {
    Json j = {{"tree", tree_to_json(s)}, {"ledger", ledger_to_json(s.ledger)}, {"steps", Json::array()}};
    for (const auto& [id, title] : steps) {
      const DecisionNode& n = *s.find(id);
      j["steps"].push_back({{"node", id}, {"title", title}, {"result", result_to_json(n.result)},
                            {"report", report_to_json(n.report)}});
    }
    out << dump(j);
    return kExitOk;
  }
  for (const auto& [id, title] : steps) {
    const DecisionNode& n = *s.find(id);
    out << "== " << id << ": " << title << "\n\n" << format_tables(n.result, n.report) << "\n";
  }
  out << "== decision tree\n\n" << tree_text(s) << "\n== cost ledger\n\n" << ledger_text(s.ledger);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// serve

Service* g_service = nullptr;

int cmd_serve(const std::string& host, int port, const ServiceOptions& options, std::ostream& out) {
  Service service(options);
  const int bound = service.bind(host, port);
  if (bound < 0) throw Error(Errc::InvalidArgument, fmt::format("cannot bind {}:{}", host, port));
  out << fmt::format("listening on http://{}:{}/api/v1\n", host, bound) << std::flush;
  g_service = &service;
  auto previous = std::signal(SIGINT, [](int) {
    if (g_service) g_service->stop();
  });
  service.listen();
  std::signal(SIGINT, previous);
  g_service = nullptr;
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Round-trip software performance engineering"};
  app.name("spe");
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--model", g.model, "software model file");
  app.add_option("--out", g.out, "output file");
  app.add_option("--solver", g.solver, "auto, exact, amva or sim");
  app.add_option("--seed", g.seed, "simulation seed");
  app.add_option("--format", g.format, "text or structured")->check(CLI::IsMember({"text", "structured"}));

  std::function<int()> action;
  auto* analyze = app.add_subcommand("analyze", "solve a model and check its requirements");
  analyze->callback([&] { action = [&] { return cmd_analyze(g, out); }; });

  Thresholds thresholds;
  auto* detect = app.add_subcommand("detect", "list BLOB and EST occurrences");
  add_thresholds(detect, thresholds);
  detect->callback([&] { action = [&] { return cmd_detect(g, thresholds, out); }; });

  RefactorArgs ref;
  auto* refactor = app.add_subcommand("refactor", "apply a refactoring and write the new model");
  refactor->add_option("--action", ref.actionFile, "action file (blobSplit, estFacade or qnEdits)");
  refactor->add_option("--blob", ref.blob, "component to split");
  refactor->add_option("--part", ref.parts, "split part NAME=PROBABILITY, repeatable");
  refactor->add_option("--est", ref.est, "SCENARIO:CALLER:CALLEE to batch through a session facade");
  refactor->add_option("--remote-facade", ref.remoteFacade, "remote facade name");
  refactor->add_option("--local-facade", ref.localFacade, "local facade name");
  refactor->callback([&] { action = [&] { return cmd_refactor(g, ref, out); }; });

  SessionArgs sa;
  auto* session = app.add_subcommand("session", "work with a decision tree file");
  session->require_subcommand(1);
  auto session_cmd = [&](const char* name, const char* help, std::function<int()> fn) {
    auto* c = session->add_subcommand(name, help);
    c->add_option("--session", sa.file, "session file");
    c->add_option("--node", sa.node, "node id");
    c->callback([&action, fn] { action = fn; });
    return c;
  };
  session_cmd("new", "create a session from --model and write it to --out", [&] { return cmd_session_new(g, out); });
  session_cmd("show", "print the decision tree", [&] { return cmd_session_show(g, sa, out); });
  auto* expand = session_cmd("expand", "apply an action to a node", [&] { return cmd_session_expand(g, sa, out); });
  expand->add_option("--action", sa.actionFile, "action file");
  expand->add_option("--action-id", sa.actionId, "idempotency key");
  session_cmd("backtrack", "move the cursor", [&] { return cmd_session_backtrack(g, sa, out); });
  session_cmd("export", "write a node's software model to --out", [&] { return cmd_session_export(g, sa, out); });
  session_cmd("ledger", "print the cost ledger", [&] { return cmd_session_ledger(g, sa, out); });

  auto* walkthrough = app.add_subcommand("walkthrough", "replay the two-branch case study");
  walkthrough->callback([&] { action = [&] { return cmd_walkthrough(g, out); }; });

  std::string host = "127.0.0.1";
  int port = 8080;
  int budgetMs = 2000;
  ServiceOptions serviceOptions;
  auto* serve = app.add_subcommand("serve", "start the HTTP service");
  serve->add_option("--host", host, "listen address");
  serve->add_option("--port", port, "listen port, 0 for any")->check(CLI::Range(0, 65535));
  serve->add_option("--token", serviceOptions.token, "required bearer token");
  serve->add_option("--store", serviceOptions.storeDirectory, "directory for models and sessions");
  serve->add_option("--budget-ms", budgetMs, "solver time before answering with a job")->check(CLI::NonNegativeNumber);
  serve->callback([&] {
    action = [&] {
      serviceOptions.syncBudget = std::chrono::milliseconds(budgetMs);
      return cmd_serve(host, port, serviceOptions, out);
    };
  });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    return action();
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace spe
