#include "marvin/gateway.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "marvin/planner.hpp"

namespace marvin {

namespace {

constexpr std::size_t kDefaultK = 5;
constexpr std::size_t kDefaultMaxDepth = 4;
constexpr std::size_t kMaxK = 1000;
constexpr std::size_t kMaxDepthLimit = 16;

OrderedJson violations_json(const std::vector<Violation> &vs) {
  OrderedJson arr = OrderedJson::array();
  for (const auto &v : vs) arr.push_back({{"code", v.code}, {"path", v.path}, {"reason", v.reason}});
  return arr;
}

OrderedJson flags_json(const FlagSet &flags) {
  OrderedJson arr = OrderedJson::array();
  for (const auto &f : flags) arr.push_back(f.name);
  return arr;
}

ApiResponse json_response(int status, const OrderedJson &body) {
  return {status, "application/json", dump_canonical(body)};
}

ApiResponse from_error(const Error &e) {
  if (const auto *np = dynamic_cast<const NoPipelineFound *>(&e))
    return error_response(status_for(e.code()), e.code(), e.what(), e.violations(), &np->unmet());
  return error_response(status_for(e.code()), e.code(), e.what(), e.violations());
}

ApiResponse invalid_document(const std::vector<Violation> &vs) {
  return error_response(400, "INVALID_DOCUMENT", "document failed validation", vs);
}

std::optional<std::size_t> positive(const Json &body, const char *key, std::size_t fallback,
                                    std::size_t limit) {
  auto it = body.find(key);
  if (it == body.end() || it->is_null()) return fallback;
  if (!it->is_number_integer()) return std::nullopt;
  auto v = it->get<std::int64_t>();
  if (v < 1 || static_cast<std::size_t>(v) > limit) return std::nullopt;
  return static_cast<std::size_t>(v);
}

// An inline document wins over a stored one looked up by id.
template <typename T>
struct Resolved {
  std::optional<T> value;
  std::optional<ApiResponse> error;
};

Resolved<DatasetProfile> resolve_dataset(const Catalog &catalog, const Json &body,
                                         const std::optional<std::string> &fallback_id) {
  if (auto it = body.find("dataset"); it != body.end() && !it->is_null()) {
    auto v = dataset_from_json(*it);
    if (!v) return {std::nullopt, invalid_document(v.violations())};
    return {v.value(), std::nullopt};
  }
  std::optional<std::string> id = fallback_id;
  if (auto it = body.find("dataset_id"); it != body.end() && it->is_string())
    id = it->get<std::string>();
  if (!id)
    return {std::nullopt, error_response(400, "MISSING_FIELD", "dataset or dataset_id is required",
                                         {{"MISSING_FIELD", "dataset_id", "required field is absent"}})};
  auto d = catalog.dataset(*id);
  if (!d) return {std::nullopt, error_response(404, "NOT_FOUND", "no dataset with id '" + *id + "'")};
  return {*d, std::nullopt};
}

Resolved<Problem> resolve_problem(const Catalog &catalog, const Json &body,
                                  const std::optional<std::string> &fallback_id) {
  if (auto it = body.find("problem"); it != body.end() && !it->is_null()) {
    auto v = problem_from_json(*it);
    if (!v) return {std::nullopt, invalid_document(v.violations())};
    return {v.value(), std::nullopt};
  }
  std::optional<std::string> id = fallback_id;
  if (auto it = body.find("problem_id"); it != body.end() && it->is_string())
    id = it->get<std::string>();
  if (!id)
    return {std::nullopt, error_response(400, "MISSING_FIELD", "problem or problem_id is required",
                                         {{"MISSING_FIELD", "problem_id", "required field is absent"}})};
  auto p = catalog.problem(*id);
  if (!p) return {std::nullopt, error_response(404, "NOT_FOUND", "no problem with id '" + *id + "'")};
  return {*p, std::nullopt};
}

OrderedJson embed(const std::string &canonical_text) { return OrderedJson::parse(canonical_text); }

std::vector<std::string> split_path(const std::string &path) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : path) {
    if (c == '/') {
      if (!cur.empty()) parts.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) parts.push_back(std::move(cur));
  return parts;
}

}  // namespace

int status_for(const std::string &code) {
  static const std::vector<std::string> bad_request{
      "MALFORMED_DOCUMENT", "MISSING_FIELD",  "BAD_VALUE",         "CONTRADICTORY_EFFECTS",
      "INVALID_DOCUMENT",   "UNKNOWN_FIELD",  "BAD_QUERY",         "BAD_REQUEST",
      "INVALID_IMAGE_REF",  "NOT_APPLICABLE", "TYPE_MISMATCH",     "OUT_OF_RANGE",
      "NOT_A_CHOICE"};
  static const std::vector<std::string> not_found{
      "NOT_FOUND",       "VERSION_NOT_FOUND", "UNKNOWN_DATASET", "UNKNOWN_PROBLEM",
      "UNKNOWN_PRIMITIVE", "NO_PIPELINE_FOUND"};
  auto in = [&](const std::vector<std::string> &v) {
    return std::find(v.begin(), v.end(), code) != v.end();
  };
  if (in(bad_request)) return 400;
  if (in(not_found)) return 404;
  if (code == "VERSION_CONFLICT") return 409;
  return 500;
}

ApiResponse error_response(int status, const std::string &code, const std::string &detail,
                           const std::vector<Violation> &violations, const FlagSet *unmet) {
  OrderedJson body;
  body["status"] = status;
  body["code"] = code;
  body["detail"] = detail;
  body["violations"] = violations_json(violations);
  if (unmet) body["unmet"] = flags_json(*unmet);
  return json_response(status, body);
}

SearchQuery query_from_params(DocKind kind,
                              const std::multimap<std::string, std::string> &params) {
  SearchQuery q;
  q.kind = kind;
  auto number = [](const std::string &key, const std::string &s) {
    std::size_t pos = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(s, &pos);
    } catch (const std::exception &) {
      pos = 0;
    }
    if (pos == 0 || pos != s.size()) throw Error("BAD_QUERY", key + " must be a positive integer");
    return static_cast<std::size_t>(v);
  };
  for (const auto &[key, value] : params) {
    if (key == "q") {
      q.text.push_back(value);
    } else if (key.rfind("filter.", 0) == 0) {
      q.filters[key.substr(7)].insert(value);
    } else if (key == "page") {
      q.page = number(key, value);
    } else if (key == "page_size") {
      q.page_size = number(key, value);
    } else {
      throw Error("BAD_QUERY", "unknown query parameter '" + key + "'",
                  {{"BAD_QUERY", key, "unknown query parameter"}});
    }
  }
  validate_query(q);
  return q;
}

// ---------------------------------------------------------------------------

Gateway::Gateway(Catalog &catalog, ContainerConfig containers)
    : catalog_(catalog), containers_(std::move(containers)) {
  containers_.validate();
}

ApiResponse Gateway::handle(const ApiRequest &req) const {
  try {
    const auto parts = split_path(req.path);
    const bool get = req.method == "GET" || req.method == "HEAD";
    const bool post = req.method == "POST";
    auto param = [&](const std::string &key) -> std::optional<std::string> {
      auto it = req.params.find(key);
      if (it == req.params.end()) return std::nullopt;
      return it->second;
    };

    if (parts.size() == 1 && parts[0] == "healthz" && get) return health();
    if (parts.size() == 1 && parts[0] == "vocab" && get) return vocabulary();
    if (parts.size() == 1 && parts[0] == "plan" && post) return plan(req.body);
    if (parts.size() == 2 && parts[0] == "pipelines" && post) {
      if (parts[1] == "validate") return validate(req.body);
      if (parts[1] == "dockerfile") return dockerfile(req.body);
      if (parts[1] == "manifest") return manifest(req.body, param("image_ref").value_or(""));
    }
    if (!parts.empty() && (parts[0] == "primitives" || parts[0] == "datasets" ||
                           parts[0] == "problems")) {
      const DocKind kind = *parse_doc_kind(parts[0]);
      if (parts.size() == 1 && get) return search(query_from_params(kind, req.params));
      if (parts.size() == 1 && post) return ingest(kind, req.body);
      if (parts.size() == 2 && get) return fetch(kind, parts[1], param("version"));
    }
    return error_response(404, "NOT_FOUND", "no route for " + req.method + " " + req.path);
  } catch (const Error &e) {
    return from_error(e);
  } catch (const std::exception &e) {
    return error_response(500, "INTERNAL", e.what());
  }
}

ApiResponse Gateway::health() const {
  OrderedJson body;
  body["status"] = "ok";
  body["primitives"] = catalog_.count(DocKind::Primitive);
  body["datasets"] = catalog_.count(DocKind::Dataset);
  body["problems"] = catalog_.count(DocKind::Problem);
  return json_response(200, body);
}

ApiResponse Gateway::vocabulary() const {
  OrderedJson body;
  body["condition_flags"] = seed_condition_flags();
  body["algorithm_types"] = seed_algorithm_types();
  body["primitive_families"] = seed_primitive_families();
  OrderedJson mods = OrderedJson::array();
  for (auto m : all_modalities()) mods.push_back(to_string(m));
  body["modalities"] = mods;
  OrderedJson tasks = OrderedJson::array();
  for (auto t : all_task_types()) tasks.push_back(to_string(t));
  body["task_types"] = tasks;
  OrderedJson metrics = OrderedJson::array();
  for (auto m : all_metrics()) metrics.push_back(to_string(m));
  body["metrics"] = metrics;
  body["hyperparameter_kinds"] = {"TUNABLE", "RESOURCE", "METAFEATURE"};
  body["value_types"] = {"INT", "FLOAT", "BOOL", "ENUM", "STRING"};
  OrderedJson facets;
  for (auto k : {DocKind::Primitive, DocKind::Dataset, DocKind::Problem})
    facets[std::string(directory_name(k))] = facet_fields(k);
  body["facet_fields"] = facets;
  return json_response(200, body);
}

ApiResponse Gateway::search(const SearchQuery &q) const {
  try {
    auto page = catalog_.search_page(q);
    OrderedJson body;
    body["kind"] = to_string(q.kind);
    body["total"] = page.result.total;
    body["page"] = q.page;
    body["page_size"] = q.page_size;
    OrderedJson hits = OrderedJson::array();
    for (std::size_t i = 0; i < page.result.hits.size(); ++i) {
      const auto &h = page.result.hits[i];
      OrderedJson hit;
      hit["id"] = h.id;
      if (!h.version.empty()) hit["version"] = h.version;
      hit["score"] = h.score;
      hit["document"] = embed(page.documents[i]);
      hits.push_back(hit);
    }
    body["hits"] = hits;
    OrderedJson facets = OrderedJson::object();
    for (const auto &field : facet_fields(q.kind)) {
      OrderedJson counts = OrderedJson::object();
      auto it = page.result.facets.find(field);
      if (it != page.result.facets.end())
        for (const auto &[value, n] : it->second) counts[value] = n;
      facets[field] = counts;
    }
    body["facets"] = facets;
    return json_response(200, body);
  } catch (const Error &e) {
    return from_error(e);
  }
}

ApiResponse Gateway::ingest(DocKind kind, const std::string &body) const {
  try {
    auto stored = catalog_.ingest(body, kind);
    if (!stored) return invalid_document(stored.violations());
    OrderedJson out;
    out["kind"] = to_string(kind);
    out["id"] = stored.value().id;
    if (stored.value().version) out["version"] = to_string(*stored.value().version);
    out["warnings"] = violations_json(stored.warnings());
    return json_response(201, out);
  } catch (const Error &e) {
    return from_error(e);
  }
}

ApiResponse Gateway::fetch(DocKind kind, const std::string &id,
                           const std::optional<std::string> &version) const {
  try {
    std::optional<Version> v;
    if (version) {
      v = parse_version(*version);
      if (!v) return error_response(400, "BAD_QUERY", "version must be X.Y.Z");
    }
    auto doc = catalog_.get(kind, id, v);
    return {200, "application/json", doc.text};
  } catch (const Error &e) {
    return from_error(e);
  }
}

ApiResponse Gateway::plan(const std::string &body_text) const {
  try {
    auto body = parse_json(body_text);
    if (!body || !body->is_object())
      return error_response(400, "MALFORMED_DOCUMENT", "request body must be a JSON object");
    auto problem = resolve_problem(catalog_, *body, std::nullopt);
    if (problem.error) return *problem.error;
    auto dataset = resolve_dataset(catalog_, *body, problem.value->dataset_id);
    if (dataset.error) return *dataset.error;
    auto k = positive(*body, "k", kDefaultK, kMaxK);
    auto depth = positive(*body, "max_depth", kDefaultMaxDepth, kMaxDepthLimit);
    if (!k || !depth)
      return error_response(400, "BAD_REQUEST",
                            "k must be in [1, " + std::to_string(kMaxK) + "] and max_depth in [1, " +
                                std::to_string(kMaxDepthLimit) + "]");
    auto view = catalog_.view();
    auto result = marvin::plan(*dataset.value, *problem.value, *view, {*depth, *k});
    OrderedJson out;
    OrderedJson pipelines = OrderedJson::array();
    for (const auto &pl : result.pipelines) pipelines.push_back(embed(canonical_serialize(pl)));
    out["pipelines"] = pipelines;
    out["states_visited"] = result.states_visited;
    return json_response(200, out);
  } catch (const Error &e) {
    return from_error(e);
  }
}

ApiResponse Gateway::validate(const std::string &body_text) const {
  try {
    auto body = parse_json(body_text);
    if (!body || !body->is_object())
      return error_response(400, "MALFORMED_DOCUMENT", "request body must be a JSON object");
    auto pit = body->find("pipeline");
    if (pit == body->end())
      return error_response(400, "MISSING_FIELD", "pipeline is required",
                            {{"MISSING_FIELD", "pipeline", "required field is absent"}});
    auto pipeline = parse_pipeline(pit->dump());
    if (!pipeline) return invalid_document(pipeline.violations());
    const auto &pl = pipeline.value();
    auto dataset = resolve_dataset(catalog_, *body, pl.dataset_id);
    if (dataset.error) return *dataset.error;
    auto problem = resolve_problem(catalog_, *body, pl.problem_id);
    if (problem.error) return *problem.error;

    auto view = catalog_.view();
    auto check = validate_pipeline(pl, *dataset.value, *problem.value, *view);
    OrderedJson out;
    out["valid"] = check.ok();
    out["status"] = to_string(check.status);
    out["step_index"] = check.step_index ? OrderedJson(*check.step_index) : OrderedJson();
    out["unmet"] = flags_json(check.unmet);
    out["modality_mismatch"] = check.modality_mismatch;
    out["violations"] = violations_json(check.binding_violations);
    out["detail"] = check.detail;
    return json_response(200, out);
  } catch (const Error &e) {
    return from_error(e);
  }
}

ApiResponse Gateway::dockerfile(const std::string &pipeline_body) const {
  try {
    auto pipeline = parse_pipeline(pipeline_body);
    if (!pipeline) return invalid_document(pipeline.violations());
    auto view = catalog_.view();
    return {200, "text/plain", generate_dockerfile(pipeline.value(), *view, containers_)};
  } catch (const Error &e) {
    return from_error(e);
  }
}

ApiResponse Gateway::manifest(const std::string &pipeline_body,
                              const std::string &image_ref) const {
  try {
    auto pipeline = parse_pipeline(pipeline_body);
    if (!pipeline) return invalid_document(pipeline.violations());
    auto view = catalog_.view();
    // Every step must resolve, as for the Dockerfile.
    container_spec(pipeline.value(), *view, containers_);
    return {200, "application/yaml",
            generate_pod_manifest(pipeline.value(), image_ref, containers_)};
  } catch (const Error &e) {
    return from_error(e);
  }
}

// ---------------------------------------------------------------------------

ServerConfig load_server_config(const std::optional<std::filesystem::path> &config_file) {
  ServerConfig cfg;
  if (config_file) {
    std::ifstream in(*config_file);
    if (!in) throw Error("BAD_CONFIG", "cannot read config file " + config_file->string());
    std::stringstream ss;
    ss << in.rdbuf();
    auto j = parse_json(ss.str());
    if (!j || !j->is_object())
      throw Error("BAD_CONFIG", "config file is not a JSON object: " + config_file->string());
    try {
      if (j->contains("host")) cfg.host = j->at("host").get<std::string>();
      if (j->contains("port")) cfg.port = j->at("port").get<int>();
      if (j->contains("store_root")) cfg.store_root = j->at("store_root").get<std::string>();
      if (j->contains("data_mount")) cfg.containers.data_mount = j->at("data_mount").get<std::string>();
      if (j->contains("ui_root")) cfg.ui_root = j->at("ui_root").get<std::string>();
      if (j->contains("base_image_tags")) {
        const auto &tags = j->at("base_image_tags");
        if (tags.contains("nlp")) cfg.containers.nlp_tag = tags.at("nlp").get<std::string>();
        if (tags.contains("image")) cfg.containers.image_tag = tags.at("image").get<std::string>();
        if (tags.contains("full")) cfg.containers.full_tag = tags.at("full").get<std::string>();
      }
    } catch (const Json::exception &e) {
      throw Error("BAD_CONFIG", std::string("bad config value: ") + e.what());
    }
  }
  if (const char *port = std::getenv("MARVIN_PORT")) {
    try {
      cfg.port = std::stoi(port);
    } catch (const std::exception &) {
      throw Error("BAD_CONFIG", "MARVIN_PORT is not a number");
    }
  }
  if (const char *store = std::getenv("MARVIN_STORE")) cfg.store_root = store;
  cfg.containers.validate();
  return cfg;
}

}  // namespace marvin
