#include <doctest.h>

#include <filesystem>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "spe/cli.hpp"
#include "spe/ecs.hpp"
#include "spe/model_io.hpp"
#include "spe/session.hpp"

using namespace spe;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run spe_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("spe-cli-" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

const std::string kEcs = std::string(SPE_DATA_DIR) + "/ecs.json";

}  // namespace

TEST_CASE("analyze exits 2 on violations, 0 when satisfied and 1 on errors") {
  TempDir dir;
  const Run ecs = spe_cli({"analyze", "--model", kEcs});
  CHECK(ecs.code == kExitViolations);
  CHECK(ecs.out.find("VIOLATED R1.MakePurchase") != std::string::npos);

  SoftwareModel free = testing::tiny();
  free.requirements.clear();
  save_model_file(free, dir / "free.json");
  CHECK(spe_cli({"analyze", "--model", dir / "free.json"}).code == kExitOk);

  const Run missing = spe_cli({"analyze", "--model", dir / "missing.json"});
  CHECK(missing.code == kExitFailure);
  CHECK_FALSE(missing.err.empty());

  CHECK(spe_cli({"analyze"}).code == kExitUsage);
  CHECK(spe_cli({"analyze", "--model", kEcs, "--solver", "fast"}).code == kExitUsage);
  CHECK(spe_cli({"analyze", "--model", kEcs, "--format", "xml"}).code == kExitUsage);
  CHECK(spe_cli({"frobnicate"}).code == kExitUsage);
}

TEST_CASE("structured analysis output re-loads") {
  TempDir dir;
  CHECK(spe_cli({"--format", "structured", "analyze", "--model", kEcs, "--out", dir / "r.json"}).code ==
        kExitViolations);
  const nlohmann::json j = nlohmann::json::parse(read_text_file(dir / "r.json"));
  CHECK(j["report"]["satisfied"] == false);
  CHECK(j["result"]["solver"] == "exact");
}

TEST_CASE("simulation runs are reproducible with --seed") {
  TempDir dir;
  SoftwareModel m = testing::tiny();
  save_model_file(m, dir / "tiny.json");
  auto sim = [&](const std::string& seed) {
    return spe_cli({"analyze", "--model", dir / "tiny.json", "--solver", "sim", "--seed", seed, "--format", "structured"})
        .out;
  };
  CHECK(sim("7") == sim("7"));
  CHECK(sim("7") != sim("8"));
}

TEST_CASE("detect lists the fixture antipatterns and rejects bad thresholds") {
  TempDir dir;
  const Run r = spe_cli({"detect", "--model", kEcs});
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("BLOB:ProductCatalog") != std::string::npos);
  CHECK(r.out.find("EST:Register:UserController:Database") != std::string::npos);

  save_model_file(testing::tiny(), dir / "tiny.json");
  const Run clean = spe_cli({"detect", "--model", dir / "tiny.json"});
  CHECK(clean.code == kExitOk);
  CHECK(clean.out.find("no antipattern") != std::string::npos);

  CHECK(spe_cli({"detect", "--model", kEcs, "--blob-min-utilization", "0"}).code == kExitUsage);
  CHECK(spe_cli({"detect", "--model", kEcs, "--est-min-messages", "-1"}).code == kExitUsage);
}

TEST_CASE("refactor writes models that re-load") {
  TempDir dir;
  CHECK(spe_cli({"refactor", "--model", kEcs, "--blob", "ProductCatalog", "--part", "FilmCatalog=0.8", "--part",
                 "BookCatalog=0.2", "--out", dir / "blob.json"})
            .code == kExitOk);
  const SoftwareModel blob = load_model_file(dir / "blob.json");
  CHECK(validate_model(blob).ok());
  CHECK(blob.find_component("FilmCatalog"));

  CHECK(spe_cli({"refactor", "--model", dir / "blob.json", "--est", "Register:UserController:Database", "--out",
                 dir / "est.json"})
            .code == kExitOk);
  CHECK(load_model_file(dir / "est.json").find_component("RemoteFacade"));
  CHECK(spe_cli({"analyze", "--model", dir / "est.json"}).out.find("VIOLATED R1") == std::string::npos);

  write_text_file(dir / "edits.json",
                  R"({"kind": "qnEdits", "edits": [{"kind": "splitCenter", "center": "ProductCatalog",
                      "parts": [{"id": "FilmCatalog", "probability": 0.8}, {"id": "BookCatalog", "probability": 0.2}]}]})");
  CHECK(spe_cli({"refactor", "--model", kEcs, "--action", dir / "edits.json", "--out", dir / "qn.json"}).code ==
        kExitOk);
  CHECK(load_model_file(dir / "qn.json") == blob);
}

TEST_CASE("refactoring the frozen Database fails on the command line") {
  const Run blob = spe_cli({"refactor", "--model", kEcs, "--blob", "Database"});
  CHECK(blob.code == kExitFailure);
  CHECK(blob.err.find("FrozenElement") != std::string::npos);

  TempDir dir;
  write_text_file(dir / "edit.json",
                  R"({"kind": "qnEdits", "edits": [{"kind": "splitCenter", "center": "Database",
                      "parts": [{"id": "D1", "probability": 0.5}, {"id": "D2", "probability": 0.5}]}]})");
  const Run qn = spe_cli({"refactor", "--model", kEcs, "--action", dir / "edit.json"});
  CHECK(qn.code == kExitFailure);
  CHECK(qn.err.find("FrozenElement") != std::string::npos);

  CHECK(spe_cli({"refactor", "--model", kEcs}).code == kExitUsage);
  CHECK(spe_cli({"refactor", "--model", kEcs, "--est", "Register"}).code == kExitUsage);
}

TEST_CASE("session commands drive a decision tree file") {
  TempDir dir;
  const std::string file = dir / "s.json";
  CHECK(spe_cli({"session", "new", "--model", kEcs, "--out", file}).code == kExitOk);
  write_text_file(dir / "blob.json",
                  R"({"kind": "blobSplit", "component": "ProductCatalog",
                      "parts": [{"name": "FilmCatalog", "probability": 0.8}, {"name": "BookCatalog", "probability": 0.2}]})");
  const Run e = spe_cli({"session", "expand", "--session", file, "--node", "n0", "--action", dir / "blob.json"});
  CHECK(e.code == kExitOk);
  CHECK(e.out.find("created n1") != std::string::npos);
  CHECK(spe_cli({"session", "backtrack", "--session", file, "--node", "n0"}).code == kExitOk);
  const SessionState s = load_session(read_text_file(file));
  CHECK(s.nodes.size() == 2);
  CHECK(s.cursor == "n0");
  CHECK(spe_cli({"session", "export", "--session", file, "--node", "n1", "--out", dir / "m.json"}).code == kExitOk);
  CHECK(load_model_file(dir / "m.json").find_component("BookCatalog"));
  CHECK(spe_cli({"session", "ledger", "--session", file}).out.find("M = 1") != std::string::npos);
  CHECK(spe_cli({"session", "backtrack", "--session", file, "--node", "n9"}).code == kExitFailure);

  write_text_file(dir / "db.json",
                  R"({"kind": "blobSplit", "component": "Database",
                      "parts": [{"name": "D1", "probability": 0.5}, {"name": "D2", "probability": 0.5}]})");
  CHECK(spe_cli({"session", "expand", "--session", file, "--node", "n0", "--action", dir / "db.json"}).code ==
        kExitFailure);
  write_text_file(dir / "broken.json", "{\"schema\": ");
  CHECK(spe_cli({"session", "show", "--session", dir / "broken.json"}).code == kExitFailure);
}

TEST_CASE("walkthrough prints four steps and the ledger") {
  TempDir dir;
  const Run r = spe_cli({"walkthrough", "--out", dir / "w.json"});
  CHECK(r.code == kExitOk);
  for (const char* node : {"== n1", "== n2", "== n3", "== n4", "cost ledger"})
    CHECK(r.out.find(node) != std::string::npos);
  const SessionState s = load_session(read_text_file(dir / "w.json"));
  CHECK(s.ledger.softwareIterations == 2);
  CHECK(s.ledger.performanceIterations == 2);
}
