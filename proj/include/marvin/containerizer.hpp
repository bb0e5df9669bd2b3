#pragma once

// Dockerfile and pod-manifest generation for validated pipelines.

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "marvin/catalog_view.hpp"
#include "marvin/planner.hpp"

namespace marvin {

enum class BaseImageKind { NlpBase, ImageBase, FullBase };

std::string_view to_string(BaseImageKind k);

struct BaseImage {
  BaseImageKind kind = BaseImageKind::FullBase;
  std::string tag;

  bool operator==(const BaseImage &) const = default;
};

struct ContainerConfig {
  std::string nlp_tag = "d3m/base-nlp:1";
  std::string image_tag = "d3m/base-vision:1";
  std::string full_tag = "d3m/base-full:1";
  std::string data_mount = "/d3m/data";

  const std::string &tag(BaseImageKind k) const;
  /// Throws Error BAD_CONFIG on empty/whitespace tags or a relative mount.
  void validate() const;
};

struct ContainerSpec {
  std::string pipeline_id;
  BaseImage base;
  std::vector<std::pair<std::string, Version>> install_lines;
  std::string data_mount;
};

/// Modality union of the steps (agnostic steps add nothing): within {TEXT}
/// selects the NLP base, within {IMAGE, VIDEO} the vision base, anything
/// else (including the empty union) the full base.
BaseImageKind base_image_kind(const ModalitySet &step_modalities);

/// Throws Error UNKNOWN_PRIMITIVE.
BaseImage select_base_image(const Pipeline &pl, const CatalogView &catalog,
                            const ContainerConfig &config = {});

ContainerSpec container_spec(const Pipeline &pl, const CatalogView &catalog,
                             const ContainerConfig &config = {});

/// Throws Error UNKNOWN_PRIMITIVE.
std::string generate_dockerfile(const Pipeline &pl, const CatalogView &catalog,
                                const ContainerConfig &config = {});

/// '.' -> '-', truncated to 63 characters.
std::string pod_name(std::string_view pipeline_id);

/// Throws Error INVALID_IMAGE_REF for an empty or whitespace-bearing ref.
std::string generate_pod_manifest(const Pipeline &pl, std::string_view image_ref,
                                  const ContainerConfig &config = {});

}  // namespace marvin
