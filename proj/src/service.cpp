#include "spe/service.hpp"

#include <filesystem>
#include <future>
#include <map>
#include <mutex>

#include "json_util.hpp"
#include "spe/analysis.hpp"
#include "spe/antipatterns.hpp"
#include "spe/error.hpp"
#include "spe/model_io.hpp"
#include "spe/session.hpp"
#include "spe/transform.hpp"

// After Eigen: <resolv.h> defines a macro that clashes with Eigen parameter names.
#include <httplib.h>

namespace spe {

using detail::Json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kBase = "/api/v1";

struct Reply {
  int status = 200;
  Json body;
};

/// Failure answered with a fixed status, for conditions that are not core
/// errors (unknown ids in the URL, missing fields).
struct HttpError {
  int status;
  std::string code;
  std::string message;
};

Reply error_reply(int status, std::string_view code, const std::string& message, const std::string* pointer = nullptr) {
  Json e = {{"code", code}, {"message", message}};
  if (pointer) e["pointer"] = *pointer;
  return {status, {{"error", e}}};
}

int status_of(Errc code) {
  switch (code) {
    case Errc::ParseError:
    case Errc::SchemaError:
    case Errc::InvalidArgument: return 400;
    case Errc::UnknownNode: return 404;
    case Errc::FrozenElement:
    case Errc::BackwardUnsupportedEdit: return 409;
    default: return 422;
  }
}

/// Runs `fn` and converts every failure into an error reply.
Reply guarded(const std::function<Reply()>& fn) {
  try {
    return fn();
  } catch (const HttpError& e) {
    return error_reply(e.status, e.code, e.message);
  } catch (const SchemaError& e) {
    return error_reply(400, to_string(e.code()), e.what(), &e.pointer());
  } catch (const Error& e) {
    return error_reply(status_of(e.code()), to_string(e.code()), e.what());
  } catch (const nlohmann::json::exception& e) {
    return error_reply(400, "SchemaError", e.what());
  } catch (const std::exception& e) {
    return error_reply(500, "Internal", e.what());
  }
}

Json parse_body(const httplib::Request& req) {
  if (req.body.empty()) throw HttpError{400, "ParseError", "request body is empty"};
  Json j = detail::parse_document(req.body);
  detail::expect_object(j, "");
  return j;
}

std::vector<std::string> frozen_centers(const TraceModel& trace) {
  std::vector<std::string> out;
  for (const CenterLink& l : trace.centers)
    if (l.frozen) out.push_back(path_leaf(l.center));
  return out;
}

}  // namespace

struct Service::Impl {
  struct ApiSession {
    std::string id;
    std::string owner;
    std::shared_ptr<Session> session;
    std::mutex writer;  // one mutating request at a time
  };

  ServiceOptions options;
  httplib::Server server;

  std::mutex mutex;  // guards the maps and counters below
  std::map<std::string, SoftwareModel> models;
  std::map<std::string, std::shared_ptr<ApiSession>> sessions;
  std::map<std::string, std::shared_future<Reply>> jobs;
  int nextModel = 1, nextSession = 1, nextJob = 1;

  explicit Impl(ServiceOptions o) : options(std::move(o)) {
    load_store();
    routes();
  }

  ~Impl() {
    server.stop();
    std::lock_guard lock(mutex);
    for (auto& [id, job] : jobs) job.wait();
  }

  // -------------------------------------------------------------------------
  // Store

  fs::path store_path(const char* kind, const std::string& id) const {
    return fs::path(options.storeDirectory) / kind / (id + ".json");
  }

  static int counter_of(const std::string& id) {
    try {
      return std::stoi(id.substr(1));
    } catch (...) {
      return 0;
    }
  }

  void load_store() {
    if (options.storeDirectory.empty()) return;
    for (const char* kind : {"models", "sessions"}) fs::create_directories(fs::path(options.storeDirectory) / kind);
    for (const auto& entry : fs::directory_iterator(fs::path(options.storeDirectory) / "models")) {
      const std::string id = entry.path().stem().string();
      models[id] = load_model_file(entry.path().string());
      nextModel = std::max(nextModel, counter_of(id) + 1);
    }
    for (const auto& entry : fs::directory_iterator(fs::path(options.storeDirectory) / "sessions")) {
      SessionState state = load_session(read_text_file(entry.path().string()));
      auto api = std::make_shared<ApiSession>();
      api->id = state.id;
      api->session = std::make_shared<Session>(std::move(state));
      nextSession = std::max(nextSession, counter_of(api->id) + 1);
      sessions[api->id] = std::move(api);
    }
  }

  void persist_model(const std::string& id, const SoftwareModel& m) const {
    if (!options.storeDirectory.empty()) save_model_file(m, store_path("models", id).string());
  }

  void persist_session(const ApiSession& api) const {
    if (!options.storeDirectory.empty())
      write_text_file(store_path("sessions", api.id).string(), save_session(api.session->snapshot()));
  }

  SoftwareModel model(const std::string& id) {
    std::lock_guard lock(mutex);
    auto it = models.find(id);
    if (it == models.end()) throw HttpError{404, "UnknownModel", "unknown model '" + id + "'"};
    return it->second;
  }

  std::shared_ptr<ApiSession> session(const std::string& id) {
    std::lock_guard lock(mutex);
    auto it = sessions.find(id);
    if (it == sessions.end()) throw HttpError{404, "UnknownSession", "unknown session '" + id + "'"};
    return it->second;
  }

  // -------------------------------------------------------------------------
  // Long work: answered inline within the budget, otherwise through a job.

  Reply deferred(std::function<Reply()> work) {
    std::shared_future<Reply> f = std::async(std::launch::async, [w = std::move(work)] { return guarded(w); }).share();
    if (f.wait_for(options.syncBudget) == std::future_status::ready) return f.get();
    std::lock_guard lock(mutex);
    const std::string id = "j" + std::to_string(nextJob++);
    jobs[id] = f;
    return {202, {{"job", id}, {"status", "running"}, {"poll", std::string(kBase) + "/jobs/" + id}}};
  }

  // -------------------------------------------------------------------------
  // Handlers

  Reply upload_model(const httplib::Request& req) {
    const SoftwareModel m = model_from_json(parse_body(req));
    const ValidationReport report = validate_model(m);
    if (!report.ok()) {
      Reply r = error_reply(422, "InvalidModel", "the model violates its structural rules");
      r.body["error"]["violations"] = validation_to_json(report);
      return r;
    }
    std::string id;
    {
      std::lock_guard lock(mutex);
      id = "m" + std::to_string(nextModel++);
      models[id] = m;
    }
    persist_model(id, m);
    return {201, {{"id", id}, {"location", std::string(kBase) + "/models/" + id}}};
  }

  Reply analyze(const httplib::Request& req, const std::string& id) {
    const SoftwareModel m = model(id);
    AnalysisOptions o;
    if (req.has_param("solver")) o.solver = parse_solver_choice(req.get_param_value("solver"));
    if (req.has_param("seed")) {
      try {
        o.simulation.seed = std::stoull(req.get_param_value("seed"));
      } catch (const std::exception&) {
        throw Error(Errc::InvalidArgument, "seed must be a non-negative integer");
      }
    }
    return deferred([m, o] {
      const QnModel qn = forward(m).qn;
      Json body;
      SolverResult result;
      if (o.solver == SolverChoice::Simulation) {
        const SimResult sim = simulate(qn, o.simulation);
        result = sim.estimate;
        body["simulation"] = sim_to_json(sim);
      } else {
        result = analyze_qn(qn, o);
      }
      body["model"] = m.version;
      body["result"] = result_to_json(result);
      body["report"] = report_to_json(check_requirements(result, m.requirements));
      return Reply{200, body};
    });
  }

  static DetectionConfig thresholds(const httplib::Request& req) {
    DetectionConfig cfg;
    if (req.has_param("thresholds"))
      cfg = detection_config_from_json(detail::parse_document(req.get_param_value("thresholds")));
    cfg.validate();
    return cfg;
  }

  Reply detect_model(const httplib::Request& req, const std::string& id) {
    const SoftwareModel m = model(id);
    const DetectionConfig cfg = thresholds(req);
    return deferred([m, cfg] {
      const ForwardResult f = forward(m);
      auto found = detect_blob(m, solve(f.qn), f.trace, cfg);
      for (auto& o : detect_est(m, cfg)) found.push_back(std::move(o));
      return Reply{200, occurrences_to_json(found)};
    });
  }

  static SessionOptions session_options(const Json& body) {
    SessionOptions o;
    const Json* j = detail::optional_field(body, "options");
    if (!j) return o;
    detail::expect_object(*j, "/options");
    if (detail::optional_field(*j, "solver")) {
      try {
        o.analysis.solver = parse_solver_choice(detail::get_string(*j, "/options", "solver"));
      } catch (const SchemaError&) {
        throw;
      } catch (const Error& e) {
        throw SchemaError("/options/solver", e.what());
      }
    }
    if (detail::optional_field(*j, "seed"))
      o.analysis.simulation.seed = static_cast<std::uint64_t>(detail::get_integer(*j, "/options", "seed"));
    if (detail::optional_field(*j, "detection")) {
      o.detection = detection_config_from_json(detail::get_object(*j, "/options", "detection"), "/options/detection");
      o.detection.validate();
    }
    return o;
  }

  Reply create_session(const httplib::Request& req) {
    const Json body = parse_body(req);
    const SoftwareModel m = model(detail::get_string(body, "", "model"));
    const SessionOptions o = session_options(body);
    const std::string owner = req.get_header_value("Authorization");
    return deferred([this, m, o, owner] {
      auto api = std::make_shared<ApiSession>();
      {
        std::lock_guard lock(mutex);
        api->id = "s" + std::to_string(nextSession++);
      }
      api->owner = owner;
      api->session = std::make_shared<Session>(m, o, api->id);
      {
        std::lock_guard lock(mutex);
        sessions[api->id] = api;
      }
      persist_session(*api);
      return Reply{201,
                   {{"id", api->id},
                    {"location", std::string(kBase) + "/sessions/" + api->id},
                    {"tree", tree_to_json(api->session->snapshot())}}};
    });
  }

  Reply expand(const std::string& sid, const std::string& nid, const std::string& actionId, const Action& action) {
    auto api = session(sid);
    api->session->node(nid);  // 404 before any work
    return deferred([this, api, nid, actionId, action] {
      std::lock_guard writer(api->writer);
      bool existed = false;
      if (!actionId.empty())
        for (const DecisionNode& n : api->session->snapshot().nodes)
          existed = existed || (n.parent == nid && n.actionId == actionId);
      const DecisionNode node = api->session->expand(nid, action, actionId);
      if (!existed) persist_session(*api);
      return Reply{existed ? 200 : 201, node_to_json(node)};
    });
  }

  static std::string action_id(const Json& body) {
    return detail::optional_field(body, "actionId") ? detail::get_string(body, "", "actionId") : std::string();
  }

  Reply expand_action(const httplib::Request& req, const std::string& sid, const std::string& nid) {
    const Json body = parse_body(req);
    auto api = session(sid);
    const DetectionConfig cfg = api->session->snapshot().options.detection;
    const Action action = action_from_json(detail::get_object(body, "", "action"), "/action", cfg);
    return expand(sid, nid, action_id(body), action);
  }

  Reply expand_edits(const httplib::Request& req, const std::string& sid, const std::string& nid) {
    Json body = parse_body(req);
    PerformanceAction action;
    const Json& edits = detail::get_array(body, "", "edits");
    for (std::size_t i = 0; i < edits.size(); ++i)
      action.edits.push_back(qn_edit_from_json(edits[i], detail::child("/edits", i)));
    return expand(sid, nid, action_id(body), action);
  }

  Reply move_cursor(const httplib::Request& req, const std::string& sid) {
    const Json body = parse_body(req);
    auto api = session(sid);
    std::lock_guard writer(api->writer);
    api->session->backtrack(detail::get_string(body, "", "node"));
    persist_session(*api);
    return {200, {{"cursor", api->session->cursor()}}};
  }

  Reply qn_view(const std::string& sid, const std::string& nid) {
    const DecisionNode n = session(sid)->session->node(nid);
    return {200,
            {{"node", n.id},
             {"qn", qn_to_json(n.qn)},
             {"trace", trace_to_json(n.trace)},
             {"frozenCenters", frozen_centers(n.trace)},
             {"result", result_to_json(n.result)},
             {"report", report_to_json(n.report)}}};
  }

  /// Read-only export: runs backward without touching the cost ledger.
  static SoftwareModel exported(const DecisionNode& n) {
    return n.trace.journal.empty() ? n.model : backward(n.qn, n.trace, n.model);
  }

  Reply node_model(const std::string& sid, const std::string& nid) {
    const DecisionNode n = session(sid)->session->node(nid);
    return {200, model_to_json(exported(n))};
  }

  Reply export_node(const std::string& sid, const std::string& nid) {
    auto api = session(sid);
    std::lock_guard writer(api->writer);
    const SoftwareModel m = api->session->export_model(nid);
    persist_session(*api);
    return {200, model_to_json(m)};
  }

  Reply detect_node(const httplib::Request& req, const std::string& sid, const std::string& nid) {
    auto api = session(sid);
    const DecisionNode n = api->session->node(nid);
    const SessionOptions o = api->session->snapshot().options;
    const DetectionConfig cfg = req.has_param("thresholds") ? thresholds(req) : o.detection;
    return deferred([n, o, cfg] {
      std::vector<AntipatternOccurrence> found;
      if (n.trace.journal.empty()) {
        found = detect_blob(n.model, n.result, n.trace, cfg);
        for (auto& occ : detect_est(n.model, cfg)) found.push_back(std::move(occ));
      } else {
        const SoftwareModel m = exported(n);
        const ForwardResult f = forward(m);
        found = detect_blob(m, analyze_qn(f.qn, o.analysis), f.trace, cfg);
        for (auto& occ : detect_est(m, cfg)) found.push_back(std::move(occ));
      }
      return Reply{200, occurrences_to_json(found)};
    });
  }

  Reply job(const std::string& id) {
    std::shared_future<Reply> f;
    {
      std::lock_guard lock(mutex);
      auto it = jobs.find(id);
      if (it == jobs.end()) throw HttpError{404, "UnknownJob", "unknown job '" + id + "'"};
      f = it->second;
    }
    if (f.wait_for(std::chrono::seconds(0)) != std::future_status::ready)
      return {202, {{"job", id}, {"status", "running"}, {"poll", std::string(kBase) + "/jobs/" + id}}};
    return f.get();
  }

  // -------------------------------------------------------------------------

  using Handler = std::function<Reply(const httplib::Request&)>;

  static void respond(httplib::Response& res, const Reply& r) {
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  }

  void get(const std::string& pattern, Handler h) {
    server.Get(std::string(kBase) + pattern,
               [h](const httplib::Request& req, httplib::Response& res) { respond(res, guarded([&] { return h(req); })); });
  }

  void post(const std::string& pattern, Handler h) {
    server.Post(std::string(kBase) + pattern,
                [h](const httplib::Request& req, httplib::Response& res) { respond(res, guarded([&] { return h(req); })); });
  }

  void routes() {
    server.set_pre_routing_handler([this](const httplib::Request& req, httplib::Response& res) {
      if (options.token.empty() || req.get_header_value("Authorization") == "Bearer " + options.token)
        return httplib::Server::HandlerResponse::Unhandled;
      respond(res, error_reply(401, "Unauthorized", "missing or wrong bearer token"));
      return httplib::Server::HandlerResponse::Handled;
    });
    server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
      if (res.body.empty()) respond(res, error_reply(res.status, "NotFound", "no such resource"));
    });

    const std::string id = "([^/]+)";
    post("/models", [this](const auto& req) { return upload_model(req); });
    get("/models/" + id, [this](const auto& req) { return Reply{200, model_to_json(model(req.matches[1]))}; });
    post("/models/" + id + "/analysis", [this](const auto& req) { return analyze(req, req.matches[1]); });
    get("/models/" + id + "/antipatterns", [this](const auto& req) { return detect_model(req, req.matches[1]); });

    post("/sessions", [this](const auto& req) { return create_session(req); });
    get("/sessions/" + id + "/tree",
        [this](const auto& req) { return Reply{200, tree_to_json(session(req.matches[1])->session->snapshot())}; });
    get("/sessions/" + id + "/ledger",
        [this](const auto& req) { return Reply{200, ledger_to_json(session(req.matches[1])->session->ledger())}; });
    post("/sessions/" + id + "/cursor", [this](const auto& req) { return move_cursor(req, req.matches[1]); });
    get("/sessions/" + id + "/nodes/" + id, [this](const auto& req) {
      return Reply{200, node_to_json(session(req.matches[1])->session->node(req.matches[2]))};
    });
    post("/sessions/" + id + "/nodes/" + id + "/expand",
         [this](const auto& req) { return expand_action(req, req.matches[1], req.matches[2]); });
    get("/sessions/" + id + "/nodes/" + id + "/qn",
        [this](const auto& req) { return qn_view(req.matches[1], req.matches[2]); });
    post("/sessions/" + id + "/nodes/" + id + "/qn-edits",
         [this](const auto& req) { return expand_edits(req, req.matches[1], req.matches[2]); });
    get("/sessions/" + id + "/nodes/" + id + "/antipatterns",
        [this](const auto& req) { return detect_node(req, req.matches[1], req.matches[2]); });
    get("/sessions/" + id + "/nodes/" + id + "/model",
        [this](const auto& req) { return node_model(req.matches[1], req.matches[2]); });
    post("/sessions/" + id + "/nodes/" + id + "/export",
         [this](const auto& req) { return export_node(req.matches[1], req.matches[2]); });
    get("/jobs/" + id, [this](const auto& req) { return job(req.matches[1]); });
  }
};

Service::Service(ServiceOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {}

Service::~Service() = default;

int Service::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool Service::listen() { return impl_->server.listen_after_bind(); }

void Service::stop() { impl_->server.stop(); }

void Service::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace spe
