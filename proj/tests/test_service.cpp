#include <doctest.h>

#include <filesystem>
#include <random>
#include <thread>

#include "spe/ecs.hpp"
#include "spe/model_io.hpp"
#include "spe/service.hpp"

// After Eigen: <resolv.h> defines a macro that clashes with Eigen parameter names.
#include <httplib.h>

using namespace spe;
using Json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

/// Service on a free loopback port, stopped on destruction.
class Server {
 public:
  explicit Server(ServiceOptions options = {}) : service_(std::move(options)) {
    port_ = service_.bind("127.0.0.1", 0);
    REQUIRE(port_ > 0);
    thread_ = std::thread([this] { service_.listen(); });
    service_.wait_until_ready();
  }
  ~Server() {
    service_.stop();
    thread_.join();
  }

  httplib::Client client(const std::string& token = "") const {
    httplib::Client c("127.0.0.1", port_);
    c.set_read_timeout(120, 0);
    if (!token.empty()) c.set_bearer_token_auth(token);
    return c;
  }

 private:
  Service service_;
  int port_ = -1;
  std::thread thread_;
};

struct Reply {
  int status;
  Json body;
};

Reply call(httplib::Client& c, const std::string& method, const std::string& path, const Json& body = nullptr) {
  const std::string url = "/api/v1" + path;
  httplib::Result r = method == "GET" ? c.Get(url) : c.Post(url, body.is_null() ? "" : body.dump(), "application/json");
  REQUIRE(r);
  return {r->status, r->body.empty() ? Json() : Json::parse(r->body)};
}

Json ecs_document() { return model_to_json(ecs_model()); }

Json blob_action(const std::string& component, double p) {
  return {{"kind", "blobSplit"},
          {"component", component},
          {"parts", {{{"name", component + "A"}, {"probability", p}}, {{"name", component + "B"}, {"probability", 1 - p}}}}};
}

Json split_edit(const std::string& center, const std::string& a, const std::string& b, double p) {
  return {{"kind", "splitCenter"},
          {"center", center},
          {"parts", {{{"id", a}, {"probability", p}}, {{"id", b}, {"probability", 1 - p}}}}};
}

std::string upload(httplib::Client& c) {
  const Reply r = call(c, "POST", "/models", ecs_document());
  REQUIRE(r.status == 201);
  return r.body["id"];
}

std::string new_session(httplib::Client& c, const std::string& model) {
  const Reply r = call(c, "POST", "/sessions", {{"model", model}});
  REQUIRE(r.status == 201);
  return r.body["id"];
}

}  // namespace

TEST_CASE("models upload, read back and analyze") {
  Server server;
  auto c = server.client();
  const std::string id = upload(c);
  const Reply got = call(c, "GET", "/models/" + id);
  CHECK(got.status == 200);
  CHECK(model_from_json(got.body) == ecs_model());

  const Reply a = call(c, "POST", "/models/" + id + "/analysis?solver=exact");
  CHECK(a.status == 200);
  CHECK_FALSE(a.body["report"]["violations"].empty());
  CHECK(a.body["result"]["solver"] == "exact");
  CHECK(call(c, "POST", "/models/" + id + "/analysis?solver=amva").body["result"]["solver"] == "amva");
  CHECK(call(c, "POST", "/models/" + id + "/analysis?solver=warp").status == 400);

  const Reply ap = call(c, "GET", "/models/" + id + "/antipatterns");
  CHECK(ap.status == 200);
  CHECK(ap.body["schema"] == "spe-ap/1");
  CHECK(ap.body["occurrences"].size() == 2);
  CHECK(call(c, "GET", "/models/" + id + "/antipatterns?thresholds=%7B%22estMinMessages%22%3A7%7D")
            .body["occurrences"]
            .size() == 1);
  CHECK(call(c, "GET", "/models/" + id + "/antipatterns?thresholds=%7B%22estMinMessages%22%3A0%7D").status == 400);
}

TEST_CASE("request errors map onto status codes") {
  Server server;
  auto c = server.client();
  CHECK(call(c, "GET", "/models/m404").status == 404);
  CHECK(call(c, "GET", "/sessions/s404/tree").status == 404);
  CHECK(call(c, "GET", "/jobs/j404").status == 404);
  CHECK(call(c, "GET", "/nothing/here").status == 404);

  httplib::Result broken = c.Post("/api/v1/models", "{\"schema\": ", "application/json");
  REQUIRE(broken);
  CHECK(broken->status == 400);
  CHECK(Json::parse(broken->body)["error"]["code"] == "ParseError");

  Json bad = ecs_document();
  bad["workloads"][0]["population"] = "many";
  const Reply schema = call(c, "POST", "/models", bad);
  CHECK(schema.status == 400);
  CHECK(schema.body["error"]["pointer"] == "/workloads/0/population");

  Json invalid = ecs_document();
  invalid["workloads"][0]["population"] = 0;
  const Reply inv = call(c, "POST", "/models", invalid);
  CHECK(inv.status == 422);
  CHECK_FALSE(inv.body["error"]["violations"].empty());
}

TEST_CASE("sessions expand, backtrack and report the ledger") {
  Server server;
  auto c = server.client();
  const std::string sid = new_session(c, upload(c));
  const std::string base = "/sessions/" + sid;

  const Reply blob = call(c, "POST", base + "/nodes/n0/expand",
                          {{"actionId", "a1"}, {"action", blob_action("ProductCatalog", 0.8)}});
  CHECK(blob.status == 201);
  CHECK(blob.body["id"] == "n1");
  const Reply again = call(c, "POST", base + "/nodes/n0/expand",
                           {{"actionId", "a1"}, {"action", blob_action("ProductCatalog", 0.8)}});
  CHECK(again.status == 200);
  CHECK(again.body == blob.body);

  const Reply est = call(c, "POST", base + "/nodes/n1/expand",
                         {{"action", {{"kind", "estFacade"},
                                      {"scenario", "Register"},
                                      {"caller", "UserController"},
                                      {"callee", "Database"}}}});
  CHECK(est.status == 201);
  CHECK(est.body["report"]["responseTimes"].size() == 3);

  const Reply view = call(c, "GET", base + "/nodes/n0/qn");
  CHECK(view.status == 200);
  CHECK(view.body["frozenCenters"] == Json::array({"Database"}));
  CHECK(view.body["qn"]["centers"].size() == 5);

  const Reply edits = call(c, "POST", base + "/nodes/n0/qn-edits",
                           {{"actionId", "e1"}, {"edits", {split_edit("ProductCatalog", "FilmCatalog", "BookCatalog", 0.8)}}});
  CHECK(edits.status == 201);
  const std::string split = edits.body["id"];
  CHECK(call(c, "POST", base + "/nodes/" + split + "/qn-edits",
             {{"edits", {split_edit("FilmCatalog", "FilmCatalog1", "FilmCatalog2", 0.5)}}})
            .status == 201);

  CHECK(call(c, "POST", base + "/cursor", {{"node", "n0"}}).body["cursor"] == "n0");
  CHECK(call(c, "POST", base + "/cursor", {{"node", "n77"}}).status == 404);
  const Reply tree = call(c, "GET", base + "/tree");
  CHECK(tree.body["nodes"].size() == 5);
  CHECK(tree.body["cursor"] == "n0");

  const Reply before = call(c, "GET", base + "/ledger");
  CHECK(before.body["M"] == 2);
  CHECK(before.body["N"] == 2);
  CHECK(before.body["tradeoff"].is_null());

  // GET leaves the ledger alone; the POST export records a backward run.
  const Reply model = call(c, "GET", base + "/nodes/n4/model");
  CHECK(model.status == 200);
  CHECK(model_from_json(model.body).find_component("FilmCatalog2"));
  CHECK(call(c, "GET", base + "/ledger").body == before.body);
  CHECK(call(c, "GET", base + "/nodes/n4/antipatterns").status == 200);
  CHECK(call(c, "GET", base + "/ledger").body == before.body);
  CHECK(call(c, "POST", base + "/nodes/n4/export").status == 200);
  CHECK_FALSE(call(c, "GET", base + "/ledger").body["tradeoff"].is_null());
}

TEST_CASE("the service rejects refactoring the frozen Database") {
  Server server;
  auto c = server.client();
  const std::string sid = new_session(c, upload(c));
  const Reply sw = call(c, "POST", "/sessions/" + sid + "/nodes/n0/expand", {{"action", blob_action("Database", 0.5)}});
  CHECK(sw.status == 409);
  CHECK(sw.body["error"]["code"] == "FrozenElement");
  const Reply qn = call(c, "POST", "/sessions/" + sid + "/nodes/n0/qn-edits",
                        {{"edits", {split_edit("Database", "D1", "D2", 0.5)}}});
  CHECK(qn.status == 409);
  const Reply prob = call(c, "POST", "/sessions/" + sid + "/nodes/n0/qn-edits",
                          {{"edits", {split_edit("ProductCatalog", "P1", "P2", 1.5)}}});
  CHECK(prob.status == 422);
  CHECK(call(c, "POST", "/sessions/" + sid + "/nodes/n9/expand", {{"action", blob_action("ProductCatalog", 0.8)}})
            .status == 404);
  CHECK(call(c, "GET", "/sessions/" + sid + "/tree").body["nodes"].size() == 1);
}

TEST_CASE("slow requests answer 202 and a job to poll") {
  ServiceOptions o;
  o.syncBudget = std::chrono::milliseconds(0);
  Server server(o);
  auto c = server.client();
  const std::string id = upload(c);
  const Reply first = call(c, "POST", "/models/" + id + "/analysis?solver=sim&seed=5");
  REQUIRE(first.status == 202);
  const std::string poll = first.body["poll"];
  CHECK(poll.rfind("/api/v1/jobs/", 0) == 0);
  Reply done{202, {}};
  for (int i = 0; i < 600 && done.status == 202; ++i) {
    done = call(c, "GET", poll.substr(7));
    if (done.status == 202) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  }
  CHECK(done.status == 200);
  CHECK(done.body["simulation"]["seed"] == 5);
}

TEST_CASE("a bearer token guards every endpoint") {
  ServiceOptions o;
  o.token = "secret";
  Server server(o);
  auto anonymous = server.client();
  CHECK(call(anonymous, "POST", "/models", ecs_document()).status == 401);
  auto wrong = server.client("guess");
  CHECK(call(wrong, "GET", "/models/m1").status == 401);
  auto owner = server.client("secret");
  CHECK(call(owner, "POST", "/models", ecs_document()).status == 201);
}

TEST_CASE("a store directory keeps models and sessions across restarts") {
  const fs::path dir = fs::temp_directory_path() / ("spe-store-" + std::to_string(std::random_device{}()));
  ServiceOptions o;
  o.storeDirectory = dir.string();
  std::string mid, sid;
  Json tree;
  {
    Server server(o);
    auto c = server.client();
    mid = upload(c);
    sid = new_session(c, mid);
    call(c, "POST", "/sessions/" + sid + "/nodes/n0/expand", {{"action", blob_action("ProductCatalog", 0.8)}});
    tree = call(c, "GET", "/sessions/" + sid + "/tree").body;
  }
  {
    Server server(o);
    auto c = server.client();
    CHECK(call(c, "GET", "/models/" + mid).status == 200);
    CHECK(call(c, "GET", "/sessions/" + sid + "/tree").body == tree);
    CHECK(upload(c) != mid);
    CHECK(new_session(c, mid) != sid);
  }
  fs::remove_all(dir);
}
