#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "marvin/gateway.hpp"
#include "marvin/json_io.hpp"
#include "support/fixtures.hpp"

using namespace marvin;
using marvin::testing::fixtures_dir;
using marvin::testing::golden_dir;
using marvin::testing::read_file;
using marvin::testing::TempDir;

namespace {

struct Loaded {
  Catalog catalog;
  Gateway gateway{catalog};
  Loaded() { testing::load_catalog_dir(catalog, fixtures_dir() / "catalog"); }

  ApiResponse get(const std::string &path, std::multimap<std::string, std::string> params = {}) const {
    return gateway.handle({"GET", path, std::move(params), ""});
  }
  ApiResponse post(const std::string &path, std::string body,
                   std::multimap<std::string, std::string> params = {}) const {
    return gateway.handle({"POST", path, std::move(params), std::move(body)});
  }
};

Json body_of(const ApiResponse &r) { return *parse_json(r.body); }

std::string pipeline_text(const std::string &name) {
  return read_file(fixtures_dir() / "pipelines" / (name + ".json"));
}

}  // namespace

TEST_CASE("status mapping") {
  CHECK(status_for("MISSING_FIELD") == 400);
  CHECK(status_for("BAD_QUERY") == 400);
  CHECK(status_for("UNKNOWN_FIELD") == 400);
  CHECK(status_for("NOT_FOUND") == 404);
  CHECK(status_for("UNKNOWN_DATASET") == 404);
  CHECK(status_for("NO_PIPELINE_FOUND") == 404);
  CHECK(status_for("VERSION_CONFLICT") == 409);
  CHECK(status_for("SOMETHING_ELSE") == 500);
}

TEST_CASE("family filter") {
  Loaded g;
  auto r = g.get("/primitives", {{"filter.primitive_family", "CLASSIFICATION"}});
  REQUIRE(r.status == 200);
  auto j = body_of(r);
  CHECK(j["total"] == 5);
  for (const auto &hit : j["hits"]) CHECK(hit["document"]["primitive_family"] == "CLASSIFICATION");
  CHECK(j["facets"]["primitive_family"]["CLASSIFICATION"] == 5);
}

TEST_CASE("query parameters") {
  Loaded g;
  auto r = g.get("/primitives", {{"q", "classifier"}, {"page_size", "2"}, {"page", "2"}});
  REQUIRE(r.status == 200);
  auto j = body_of(r);
  CHECK(j["page"] == 2);
  CHECK(j["hits"].size() <= 2);
  CHECK(g.get("/primitives", {{"filter.colour", "red"}}).status == 400);
  CHECK(g.get("/primitives", {{"bogus", "1"}}).status == 400);
  CHECK(g.get("/primitives", {{"page", "zero"}}).status == 400);
  CHECK(g.get("/datasets", {{"filter.modalities", "VIDEO"}}).status == 200);
}

TEST_CASE("fetch by id") {
  Loaded g;
  auto r = g.get("/primitives/d3m.nlp.tokenizer");
  REQUIRE(r.status == 200);
  CHECK(body_of(r)["version"] == "1.0.0");
  CHECK(g.get("/primitives/d3m.nlp.tokenizer", {{"version", "1.0.0"}}).status == 200);
  CHECK(g.get("/primitives/d3m.nlp.tokenizer", {{"version", "9.0.0"}}).status == 404);
  CHECK(g.get("/primitives/nothing").status == 404);
  CHECK(g.get("/datasets/news_articles").status == 200);
  CHECK(g.get("/no/such/route").status == 404);
}

TEST_CASE("ingest endpoint") {
  Loaded g;
  auto bad = g.post("/primitives", R"({"id":"d3m.x","name":"X","version":"1.0.0","algorithm_types":["PCA"]})");
  CHECK(bad.status == 400);
  auto j = body_of(bad);
  CHECK(j["code"] == "INVALID_DOCUMENT");
  bool saw = false;
  for (const auto &v : j["violations"]) saw = saw || (v["code"] == "MISSING_FIELD" && v["path"] == "primitive_family");
  CHECK(saw);
  CHECK(g.catalog.count(DocKind::Primitive) == 10);

  auto ok = g.post("/primitives", R"({"id":"d3m.x","name":"X","version":"1.0.0","algorithm_types":["PCA"],
                                      "primitive_family":"FEATURE_SELECTION"})");
  CHECK(ok.status == 201);
  CHECK(body_of(ok)["id"] == "d3m.x");
  CHECK(g.catalog.count(DocKind::Primitive) == 11);
}

TEST_CASE("plan endpoint") {
  Loaded g;
  CHECK(g.post("/plan", R"({"dataset_id":"nowhere","problem_id":"news.topic"})").status == 404);
  CHECK(g.post("/plan", R"({"dataset_id":"news_articles","problem_id":"nope"})").status == 404);
  CHECK(g.post("/plan", "garbage").status == 400);

  auto r = g.post("/plan", R"({"dataset_id":"news_articles","problem_id":"news.topic","k":3})");
  REQUIRE(r.status == 200);
  auto j = body_of(r);
  REQUIRE(j["pipelines"].size() >= 1);
  // linear_svc takes raw text with no preconditions, so one step suffices.
  CHECK(j["pipelines"][0]["steps"].size() == 1);
  CHECK(j["pipelines"][0]["id"] == "news.topic.p1");

  auto baseball = g.post("/plan", R"({"dataset_id":"baseball_hall_of_fame","problem_id":"baseball.hall_of_fame"})");
  CHECK(baseball.status == 200);
}

TEST_CASE("pipeline endpoints") {
  Loaded g;
  auto v = g.post("/pipelines/validate", R"({"pipeline":)" + pipeline_text("nlp") + "}");
  REQUIRE(v.status == 200);
  CHECK(body_of(v)["valid"] == true);

  auto broken = g.post("/pipelines/validate", R"({"pipeline":)" + pipeline_text("broken_chain") + "}");
  REQUIRE(broken.status == 200);
  auto bj = body_of(broken);
  CHECK(bj["valid"] == false);
  CHECK(bj["step_index"] == 0);
  CHECK(bj["unmet"] == Json({"NO_MISSING_VALUES"}));

  auto d = g.post("/pipelines/dockerfile", pipeline_text("mixed"));
  REQUIRE(d.status == 200);
  CHECK(d.body == read_file(golden_dir() / "mixed.Dockerfile"));

  auto m = g.post("/pipelines/manifest", pipeline_text("vision"),
                  {{"image_ref", "registry.example/marvin/traffic-detect-p1:1"}});
  REQUIRE(m.status == 200);
  CHECK(m.body == read_file(golden_dir() / "vision.pod.yaml"));
  CHECK(g.post("/pipelines/manifest", pipeline_text("vision")).status == 400);
}

TEST_CASE("health and vocabulary") {
  Loaded g;
  CHECK(body_of(g.get("/healthz"))["primitives"] == 10);
  auto vocab = body_of(g.get("/vocab"));
  CHECK(vocab["primitive_families"].size() > 0);
  CHECK(vocab["facet_fields"]["primitives"].size() == 6);
}

TEST_CASE("real server over HTTP") {
  TempDir dir("server");
  ServerConfig cfg;
  cfg.port = 0;
  cfg.store_root = dir.path();
  Server server(cfg);
  int port = server.bind();
  REQUIRE(port > 0);
  std::thread t([&] { server.run(); });
  server.wait_until_ready();

  httplib::Client cli("127.0.0.1", port);
  auto empty = cli.Get("/primitives");
  REQUIRE(empty);
  CHECK(empty->status == 200);
  CHECK(body_of({empty->status, "", empty->body})["total"] == 0);

  auto doc = read_file(fixtures_dir() / "catalog" / "primitives" / "d3m.nlp.tokenizer-1.0.0.json");
  auto posted = cli.Post("/primitives", doc, "application/json");
  REQUIRE(posted);
  CHECK(posted->status == 201);
  auto found = cli.Get("/primitives?q=tokenizer&filter.modalities=TEXT");
  REQUIRE(found);
  CHECK(body_of({found->status, "", found->body})["total"] == 1);
  auto health = cli.Get("/healthz");
  REQUIRE(health);
  CHECK(health->status == 200);

  SUBCASE("port already taken") {
    ServerConfig clash = cfg;
    clash.port = port;
    Server other(clash);
    std::string code;
    try {
      other.bind();
    } catch (const Error &e) {
      code = e.code();
    }
    CHECK(code == "PORT_IN_USE");
  }

  server.stop();
  t.join();
}

TEST_CASE("server config") {
  TempDir dir("config");
  testing::write_file(dir.path() / "c.json",
                      R"({"port": 9001, "store_root": "/tmp/x", "base_image_tags": {"nlp": "n:2"}})");
  auto cfg = load_server_config(dir.path() / "c.json");
  CHECK(cfg.port == 9001);
  CHECK(cfg.store_root == "/tmp/x");
  CHECK(cfg.containers.nlp_tag == "n:2");
  testing::write_file(dir.path() / "bad.json", R"({"port": "high"})");
  CHECK_THROWS_AS(load_server_config(dir.path() / "bad.json"), Error);
}
