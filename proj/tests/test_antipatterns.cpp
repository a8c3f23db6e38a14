#include <doctest.h>

#include "fixtures.hpp"
#include "spe/antipatterns.hpp"
#include "spe/ecs.hpp"
#include "spe/error.hpp"
#include "spe/qn.hpp"
#include "spe/transform.hpp"

using namespace spe;

namespace {

std::vector<AntipatternOccurrence> blobs(const SoftwareModel& m, const DetectionConfig& cfg = {}) {
  const ForwardResult f = forward(m);
  return detect_blob(m, solve(f.qn), f.trace, cfg);
}

const BlobSplitSpec kCatalogSplit{{{"FilmCatalog", 0.8, {}}, {"BookCatalog", 0.2, {}}}};

SoftwareModel after_blob(const SoftwareModel& m) {
  return solve_blob(m, {blob_subject("ProductCatalog"), {}, {}}, kCatalogSplit);
}

SoftwareModel after_est(const SoftwareModel& m) {
  return solve_est(m, {est_subject("Register", "UserController", "Database"), {}, {}}, EstFacadeSpec{});
}

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::InvalidArgument;
}

}  // namespace

TEST_CASE("connection counts include interface dependencies and messages") {
  const SoftwareModel m = ecs_model();
  CHECK(connection_count(m, "ProductCatalog") == 3);
  CHECK(connection_count(m, "Database") == 2);
  CHECK(connection_count(m, "CatalogController") == 2);
}

TEST_CASE("the ECS fixture has a ProductCatalog BLOB and a Register EST") {
  const SoftwareModel m = ecs_model();
  const auto b = blobs(m);
  REQUIRE(b.size() == 1);
  CHECK(b[0].subject.id() == "BLOB:ProductCatalog");
  CHECK(b[0].evidence.at("utilization") > 0.97);
  CHECK(b[0].evidence.at("demandShare") > 0.3);
  REQUIRE(b[0].candidatePlans.size() == 2);
  CHECK(std::get<BlobSplitSpec>(b[0].candidatePlans[0].spec).parts[0].probability == 0.8);

  const auto e = detect_est(m);
  REQUIRE(e.size() == 1);
  CHECK(e[0].subject.id() == "EST:Register:UserController:Database");
  CHECK(e[0].evidence.at("messages") == 6.0);
  REQUIRE(e[0].candidatePlans.size() == 1);
}

TEST_CASE("detection thresholds are inclusive and must be positive") {
  const SoftwareModel m = ecs_model();
  DetectionConfig cfg;
  cfg.estMinMessages = 6.0;
  CHECK(detect_est(m, cfg).size() == 1);
  cfg.estMinMessages = 6.0 + 1e-9;
  CHECK(detect_est(m, cfg).empty());

  DetectionConfig strict;
  strict.blobMinConnections = 4;
  CHECK(blobs(m, strict).empty());
  strict = {};
  strict.blobMinUtilization = 1.0;
  strict.blobMinDemandShare = 0.9;
  CHECK(blobs(m, strict).empty());

  DetectionConfig bad;
  bad.estMinMessages = 0.0;
  CHECK(code_of([&] { detect_est(m, bad); }) == Errc::InvalidArgument);
  bad = {};
  bad.blobMinUtilization = -0.5;
  CHECK(code_of([&] { blobs(m, bad); }) == Errc::InvalidArgument);
}

TEST_CASE("a small model has no antipatterns") {
  const SoftwareModel m = testing::tiny();
  CHECK(blobs(m).empty());
  CHECK(detect_est(m).empty());
}

TEST_CASE("the BLOB split keeps the network equivalent to the QN split") {
  const SoftwareModel m = ecs_model();
  const SoftwareModel r = after_blob(m);
  CHECK(r.version == m.version + 1);
  CHECK(validate_model(r).ok());
  CHECK_FALSE(r.find_component("ProductCatalog"));
  CHECK(r.find_component("FilmCatalog"));
  const QnModel q = forward(r).qn;
  const QnModel base = forward(m).qn;
  for (const QnClass& c : base.classes) {
    const double d = base.demand(*base.center_index("ProductCatalog"), *base.class_index(c.id));
    CHECK(q.demand(*q.center_index("FilmCatalog"), *q.class_index(c.id)) == doctest::Approx(0.8 * d).epsilon(1e-14));
  }
  // The larger part is the next split candidate.
  const auto next = blobs(r);
  REQUIRE(next.size() == 1);
  CHECK(next[0].subject.component == "FilmCatalog");
}

TEST_CASE("refactoring errors") {
  const SoftwareModel m = ecs_model();
  CHECK(code_of([&] { solve_blob(m, {blob_subject("Database"), {}, {}}, {{{"D1", 0.5, {}}, {"D2", 0.5, {}}}}); }) ==
        Errc::FrozenElement);
  CHECK(code_of([&] { solve_blob(m, {blob_subject("Ghost"), {}, {}}, kCatalogSplit); }) == Errc::NoSuchOccurrence);
  CHECK(code_of([&] {
          solve_blob(m, {blob_subject("ProductCatalog"), {}, {}}, {{{"A", 0.7, {}}, {"B", 0.2, {}}}});
        }) == Errc::BadProbabilities);
  CHECK(code_of([&] {
          solve_est(m, {est_subject("MakePurchase", "ProductCatalog", "Database"), {}, {}}, EstFacadeSpec{});
        }) == Errc::NothingToBatch);
  CHECK(code_of([&] { solve_est(m, {est_subject("Nope", "UserController", "Database"), {}, {}}, {}); }) ==
        Errc::NoSuchOccurrence);
  EstFacadeSpec clash;
  clash.remoteFacade = "Database";
  CHECK(code_of([&] {
          solve_est(m, {est_subject("Register", "UserController", "Database"), {}, {}}, clash);
        }) == Errc::InvalidEdit);
}

TEST_CASE("the session facade batches the Register requests") {
  const SoftwareModel m = ecs_model();
  const SoftwareModel r = after_est(m);
  CHECK(r.version == m.version + 1);
  CHECK(validate_model(r).ok());
  const Scenario& reg = *r.find_scenario("Register");
  CHECK(message_count_between(reg, "UserController", "Database") == 0.0);
  CHECK(message_count_between(reg, "UserController", "RemoteFacade") == 1.0);
  CHECK(message_count_between(reg, "RemoteFacade", "LocalFacade") == 1.0);
  CHECK(message_count_between(reg, "LocalFacade", "Database") == 6.0);
  CHECK(expected_remote_invocations(reg).count({"Database", "checkUsername"}) == 0);
  CHECK(detect_est(r).empty());

  // Only the batched cell changes: the request overhead on six calls moves to the facades.
  const QnModel before = forward(m).qn, after = forward(r).qn;
  const EcsDemands d;
  const auto cls = *after.class_index("Register");
  CHECK(after.demand(*after.center_index("Database"), cls) == doctest::Approx(6 * d.checkUsername).epsilon(1e-14));
  CHECK(after.demand(*after.center_index("RemoteFacade"), cls) == EstFacadeSpec{}.remoteCost);
  CHECK(after.demand(*after.center_index("LocalFacade"), cls) == EstFacadeSpec{}.localCost);
  const auto mp = *after.class_index("MakePurchase");
  CHECK(after.demand(*after.center_index("Database"), mp) == before.demand(*before.center_index("Database"), mp));
}

TEST_CASE("BLOB and EST refactorings commute") {
  const SoftwareModel m = ecs_model();
  const SoftwareModel a = after_est(after_blob(m));
  const SoftwareModel b = after_blob(after_est(m));
  CHECK(a == b);
}

TEST_CASE("occurrences and detection settings serialize") {
  const SoftwareModel m = ecs_model();
  auto all = blobs(m);
  for (auto& o : detect_est(m)) all.push_back(o);
  const nlohmann::json j = occurrences_to_json(all);
  CHECK(j["schema"] == "spe-ap/1");
  REQUIRE(j["occurrences"].size() == 2);
  CHECK(j["occurrences"][0]["id"] == "BLOB:ProductCatalog");
  CHECK(j["occurrences"][1]["kind"] == "EST");
  CHECK(j["occurrences"][1]["candidatePlans"][0]["spec"]["kind"] == "estFacade");

  DetectionConfig cfg;
  cfg.estMinMessages = 3.5;
  cfg.blobMinConnections = 2;
  const DetectionConfig back = detection_config_from_json(detection_config_to_json(cfg));
  CHECK(back.estMinMessages == 3.5);
  CHECK(back.blobMinConnections == 2);
  try {
    detection_config_from_json(nlohmann::json{{"estMinMessages", "many"}});
    FAIL("expected an error");
  } catch (const SchemaError& e) {
    CHECK(e.pointer() == "/estMinMessages");
  }
}
