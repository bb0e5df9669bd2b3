#include "doctest.h"
#include "marvin/containerizer.hpp"
#include "marvin/planner.hpp"
#include "support/fixtures.hpp"

using namespace marvin;
using marvin::testing::fixtures_dir;
using marvin::testing::golden_dir;
using marvin::testing::read_file;

namespace {

std::shared_ptr<const CatalogView> fixture_view() {
  static Catalog c;
  static bool loaded = false;
  if (!loaded) {
    testing::load_catalog_dir(c, fixtures_dir() / "catalog");
    loaded = true;
  }
  return c.view();
}

Pipeline fixture_pipeline(const std::string &name) {
  return parse_pipeline(read_file(fixtures_dir() / "pipelines" / (name + ".json"))).value();
}

}  // namespace

TEST_CASE("base image partition") {
  using M = DataModality;
  CHECK(base_image_kind({M::Text}) == BaseImageKind::NlpBase);
  CHECK(base_image_kind({M::Image}) == BaseImageKind::ImageBase);
  CHECK(base_image_kind({M::Image, M::Video}) == BaseImageKind::ImageBase);
  CHECK(base_image_kind({M::Text, M::Tabular}) == BaseImageKind::FullBase);
  CHECK(base_image_kind({M::Text, M::Image}) == BaseImageKind::FullBase);
  CHECK(base_image_kind({}) == BaseImageKind::FullBase);

  // Every subset of the modality enum lands in exactly one branch, and the
  // branch agrees with the subset test written out directly.
  const auto &all = all_modalities();
  for (unsigned mask = 0; mask < (1u << all.size()); ++mask) {
    ModalitySet s;
    for (std::size_t i = 0; i < all.size(); ++i)
      if (mask & (1u << i)) s.insert(all[i]);
    bool nlp = !s.empty(), vision = !s.empty();
    for (auto m : s) {
      nlp = nlp && m == M::Text;
      vision = vision && (m == M::Image || m == M::Video);
    }
    auto expect = nlp ? BaseImageKind::NlpBase : vision ? BaseImageKind::ImageBase : BaseImageKind::FullBase;
    CHECK(base_image_kind(s) == expect);
  }
}

TEST_CASE("select_base_image on fixtures") {
  auto view = fixture_view();
  CHECK(select_base_image(fixture_pipeline("nlp"), *view) ==
        BaseImage{BaseImageKind::NlpBase, "d3m/base-nlp:1"});
  CHECK(select_base_image(fixture_pipeline("vision"), *view).kind == BaseImageKind::ImageBase);
  CHECK(select_base_image(fixture_pipeline("mixed"), *view).kind == BaseImageKind::FullBase);

  ContainerConfig cfg;
  cfg.nlp_tag = "registry.local/nlp:7";
  CHECK(select_base_image(fixture_pipeline("nlp"), *view, cfg).tag == "registry.local/nlp:7");
}

TEST_CASE("dockerfile") {
  auto view = fixture_view();
  auto pl = fixture_pipeline("vision");
  auto text = generate_dockerfile(pl, *view);
  CHECK(text == read_file(golden_dir() / "vision.Dockerfile"));
  CHECK(generate_dockerfile(pl, *view) == text);

  // One install line per step, in step order.
  auto a = text.find("frame_sampler"), b = text.find("cnn_classifier");
  CHECK(a < b);
  std::swap(pl.steps[0], pl.steps[1]);
  auto swapped = generate_dockerfile(pl, *view);
  CHECK(swapped.find("cnn_classifier") < swapped.find("frame_sampler"));

  pl.steps[0].primitive_id = "ghost";
  try {
    generate_dockerfile(pl, *view);
    FAIL("expected UNKNOWN_PRIMITIVE");
  } catch (const Error &e) {
    CHECK(e.code() == "UNKNOWN_PRIMITIVE");
  }
}

TEST_CASE("pod names") {
  CHECK(pod_name("a.b.c") == "a-b-c");
  CHECK(pod_name(std::string(80, 'x')).size() == 63);
  CHECK(pod_name(std::string(62, 'x') + ".y") == std::string(62, 'x') + "-");
}

TEST_CASE("pod manifest") {
  auto pl = fixture_pipeline("nlp");
  auto text = generate_pod_manifest(pl, "registry.example/marvin/news-topic-p1:1");
  CHECK(text == read_file(golden_dir() / "nlp.pod.yaml"));
  CHECK(text.find("mountPath: /d3m/data\n") != std::string::npos);
  CHECK(generate_pod_manifest(pl, "registry.example/marvin/news-topic-p1:1") == text);

  ContainerConfig cfg;
  cfg.data_mount = "/mnt/shared";
  CHECK(generate_pod_manifest(pl, "img:1", cfg).find("mountPath: /mnt/shared\n") != std::string::npos);

  for (const char *bad : {"", "has space:1", "tab\there"}) {
    try {
      generate_pod_manifest(pl, bad);
      FAIL("expected INVALID_IMAGE_REF");
    } catch (const Error &e) {
      CHECK(e.code() == "INVALID_IMAGE_REF");
    }
  }
}

TEST_CASE("config validation") {
  ContainerConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.data_mount = "relative/path";
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.full_tag = " ";
  CHECK_THROWS_AS(cfg.validate(), Error);
}
