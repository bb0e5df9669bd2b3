#include "marvin/containerizer.hpp"

#include <algorithm>
#include <cctype>

namespace marvin {

namespace {

bool has_space(std::string_view s) {
  return std::any_of(s.begin(), s.end(),
                     [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
}

const PrimitiveAnnotation &resolve(const PipelineStep &step, const CatalogView &catalog,
                                   std::size_t index) {
  const auto *ann = catalog.find(step.primitive_id, step.primitive_version);
  if (!ann)
    throw Error("UNKNOWN_PRIMITIVE", "step " + std::to_string(index) + " references unknown primitive " +
                                         step.primitive_id + "==" + to_string(step.primitive_version));
  return *ann;
}

}  // namespace

std::string_view to_string(BaseImageKind k) {
  switch (k) {
    case BaseImageKind::NlpBase: return "NLP_BASE";
    case BaseImageKind::ImageBase: return "IMAGE_BASE";
    case BaseImageKind::FullBase: return "FULL_BASE";
  }
  return "?";
}

const std::string &ContainerConfig::tag(BaseImageKind k) const {
  switch (k) {
    case BaseImageKind::NlpBase: return nlp_tag;
    case BaseImageKind::ImageBase: return image_tag;
    case BaseImageKind::FullBase: break;
  }
  return full_tag;
}

void ContainerConfig::validate() const {
  for (const auto *t : {&nlp_tag, &image_tag, &full_tag})
    if (t->empty() || has_space(*t))
      throw Error("BAD_CONFIG", "base image tag must be non-empty without whitespace: '" + *t + "'");
  if (data_mount.empty() || data_mount.front() != '/' || has_space(data_mount))
    throw Error("BAD_CONFIG", "data mount must be an absolute path: '" + data_mount + "'");
}

BaseImageKind base_image_kind(const ModalitySet &u) {
  if (u.empty()) return BaseImageKind::FullBase;
  auto within = [&](std::initializer_list<DataModality> allowed) {
    return std::all_of(u.begin(), u.end(), [&](DataModality m) {
      return std::find(allowed.begin(), allowed.end(), m) != allowed.end();
    });
  };
  if (within({DataModality::Text})) return BaseImageKind::NlpBase;
  if (within({DataModality::Image, DataModality::Video})) return BaseImageKind::ImageBase;
  return BaseImageKind::FullBase;
}

BaseImage select_base_image(const Pipeline &pl, const CatalogView &catalog,
                            const ContainerConfig &config) {
  ModalitySet u;
  for (std::size_t i = 0; i < pl.steps.size(); ++i) {
    const auto &ann = resolve(pl.steps[i], catalog, i);
    u.insert(ann.modalities.begin(), ann.modalities.end());
  }
  auto kind = base_image_kind(u);
  return {kind, config.tag(kind)};
}

ContainerSpec container_spec(const Pipeline &pl, const CatalogView &catalog,
                             const ContainerConfig &config) {
  config.validate();
  ContainerSpec spec{pl.id, select_base_image(pl, catalog, config), {}, config.data_mount};
  for (const auto &step : pl.steps)
    spec.install_lines.emplace_back(step.primitive_id, step.primitive_version);
  return spec;
}

std::string generate_dockerfile(const Pipeline &pl, const CatalogView &catalog,
                                const ContainerConfig &config) {
  const auto spec = container_spec(pl, catalog, config);
  std::string out;
  out += "FROM " + spec.base.tag + "\n";
  out += "LABEL marvin.pipeline.id=\"" + spec.pipeline_id + "\"\n";
  out += "COPY pipeline.json /d3m/pipeline.json\n";
  for (const auto &[id, version] : spec.install_lines)
    out += "RUN primitive-install " + id + "==" + to_string(version) + "\n";
  out += "VOLUME " + spec.data_mount + "\n";
  out += "ENTRYPOINT [\"primitive-run\", \"/d3m/pipeline.json\"]\n";
  return out;
}

std::string pod_name(std::string_view pipeline_id) {
  std::string name(pipeline_id.substr(0, 63));
  std::replace(name.begin(), name.end(), '.', '-');
  return name;
}

std::string generate_pod_manifest(const Pipeline &pl, std::string_view image_ref,
                                  const ContainerConfig &config) {
  if (image_ref.empty() || has_space(image_ref))
    throw Error("INVALID_IMAGE_REF", "image reference must be non-empty without whitespace");
  config.validate();
  std::string out;
  out += "apiVersion: v1\n";
  out += "kind: Pod\n";
  out += "metadata:\n";
  out += "  name: " + pod_name(pl.id) + "\n";
  out += "spec:\n";
  out += "  containers:\n";
  out += "    - name: pipeline\n";
  out += "      image: " + std::string(image_ref) + "\n";
  out += "      volumeMounts:\n";
  out += "        - name: d3m-data\n";
  out += "          mountPath: " + config.data_mount + "\n";
  out += "  volumes:\n";
  out += "    - name: d3m-data\n";
  out += "      persistentVolumeClaim:\n";
  out += "        claimName: d3m-data\n";
  return out;
}

}  // namespace marvin
