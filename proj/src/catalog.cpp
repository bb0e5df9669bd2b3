#include "marvin/catalog.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <numeric>
#include <sstream>

#include "marvin/json_io.hpp"

namespace marvin {

namespace fs = std::filesystem;

namespace {

constexpr std::array<int, 3> kFieldWeights{3, 2, 1};  // name, id, description

std::set<std::string> flag_names(const FlagSet &flags) {
  std::set<std::string> out;
  for (const auto &f : flags) out.insert(f.name);
  return out;
}

std::vector<std::uint32_t> intersect(const std::vector<std::uint32_t> &a,
                                     const std::vector<std::uint32_t> &b) {
  std::vector<std::uint32_t> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto &c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string read_file(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("STORE_UNREADABLE", "cannot read store file " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string violation_summary(const std::vector<Violation> &vs) {
  std::string out;
  for (const auto &v : vs) out += (out.empty() ? "" : "; ") + to_string(v);
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

std::string_view to_string(DocKind kind) {
  switch (kind) {
    case DocKind::Primitive: return "PRIMITIVE";
    case DocKind::Dataset: return "DATASET";
    case DocKind::Problem: return "PROBLEM";
  }
  return "?";
}

std::optional<DocKind> parse_doc_kind(std::string_view s) {
  std::string l = lower(s);
  if (l == "primitive" || l == "primitives") return DocKind::Primitive;
  if (l == "dataset" || l == "datasets") return DocKind::Dataset;
  if (l == "problem" || l == "problems") return DocKind::Problem;
  return std::nullopt;
}

std::string_view directory_name(DocKind kind) {
  switch (kind) {
    case DocKind::Primitive: return "primitives";
    case DocKind::Dataset: return "datasets";
    case DocKind::Problem: return "problems";
  }
  return "?";
}

const std::vector<std::string> &facet_fields(DocKind kind) {
  static const std::vector<std::string> primitive{"primitive_family", "algorithm_types",
                                                  "preconditions",    "effects",
                                                  "languages",        "modalities"};
  static const std::vector<std::string> dataset{"modalities", "holds"};
  static const std::vector<std::string> problem{"task_type", "metric"};
  switch (kind) {
    case DocKind::Primitive: return primitive;
    case DocKind::Dataset: return dataset;
    case DocKind::Problem: return problem;
  }
  return primitive;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

IndexedDocument index_entry(const PrimitiveAnnotation &ann) {
  IndexedDocument d{ann.id, to_string(ann.version), ann.name, ann.description, {}};
  d.facets["primitive_family"] = {ann.primitive_family.name};
  auto &algos = d.facets["algorithm_types"];
  for (const auto &a : ann.algorithm_types) algos.insert(a.name);
  d.facets["preconditions"] = flag_names(ann.preconditions);
  d.facets["effects"] = flag_names(ann.effects);
  d.facets["languages"] = {ann.languages.begin(), ann.languages.end()};
  auto &mods = d.facets["modalities"];
  for (auto m : ann.modalities) mods.insert(std::string(to_string(m)));
  return d;
}

IndexedDocument index_entry(const DatasetProfile &profile) {
  IndexedDocument d{profile.id, "", profile.name, "", {}};
  d.facets["modalities"] = {std::string(to_string(profile.modality))};
  d.facets["holds"] = flag_names(profile.holds);
  return d;
}

IndexedDocument index_entry(const Problem &problem) {
  IndexedDocument d{problem.id, "", "", "", {}};
  d.facets["task_type"] = {std::string(to_string(problem.task_type))};
  d.facets["metric"] = {std::string(to_string(problem.metric))};
  return d;
}

// ---------------------------------------------------------------------------
// SearchIndex

SearchIndex::SearchIndex(DocKind kind, std::vector<IndexedDocument> docs)
    : kind_(kind), docs_(std::move(docs)) {
  std::sort(docs_.begin(), docs_.end(),
            [](const auto &a, const auto &b) { return a.id < b.id; });
  for (std::uint32_t i = 0; i < docs_.size(); ++i) {
    const auto &d = docs_[i];
    const std::array<std::string_view, 3> fields{d.name, d.id, d.description};
    for (std::size_t f = 0; f < fields.size(); ++f) {
      auto tokens = tokenize(fields[f]);
      std::sort(tokens.begin(), tokens.end());
      tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
      for (auto &t : tokens) text_postings_[f][t].push_back(i);
    }
    for (const auto &[field, values] : d.facets)
      for (const auto &v : values) facet_postings_[field][v].push_back(i);
  }
}

void validate_query(const SearchQuery &q) {
  if (q.page < 1) throw Error("BAD_QUERY", "page must be >= 1");
  if (q.page_size < 1 || q.page_size > kMaxPageSize)
    throw Error("BAD_QUERY", "page_size must be in [1, " + std::to_string(kMaxPageSize) + "]");
  const auto &allowed = facet_fields(q.kind);
  for (const auto &[field, _] : q.filters) {
    if (std::find(allowed.begin(), allowed.end(), field) == allowed.end())
      throw Error("UNKNOWN_FIELD", "'" + field + "' is not a facet of " +
                                       std::string(to_string(q.kind)) + " documents",
                  {{"UNKNOWN_FIELD", "filter." + field, "not a facetable field"}});
  }
}

SearchResult SearchIndex::search(const SearchQuery &q) const {
  validate_query(q);

  std::vector<std::uint32_t> candidates(docs_.size());
  std::iota(candidates.begin(), candidates.end(), 0u);
  for (const auto &[field, values] : q.filters) {
    auto fit = facet_postings_.find(field);
    for (const auto &v : values) {
      if (fit == facet_postings_.end()) {
        candidates.clear();
        break;
      }
      auto vit = fit->second.find(v);
      if (vit == fit->second.end()) {
        candidates.clear();
        break;
      }
      candidates = intersect(candidates, vit->second);
    }
  }

  std::set<std::string> terms;
  for (const auto &t : q.text)
    for (auto &tok : tokenize(t)) terms.insert(std::move(tok));

  std::vector<int> scores(docs_.size(), 0);
  std::vector<std::uint32_t> matched;
  if (terms.empty()) {
    matched = std::move(candidates);
  } else {
    for (const auto &t : terms) {
      for (std::size_t f = 0; f < text_postings_.size(); ++f) {
        auto it = text_postings_[f].find(t);
        if (it == text_postings_[f].end()) continue;
        for (auto doc : it->second) scores[doc] += kFieldWeights[f];
      }
    }
    for (auto doc : candidates)
      if (scores[doc] > 0) matched.push_back(doc);
  }

  // Documents are stored in id order, so index order breaks score ties.
  std::stable_sort(matched.begin(), matched.end(),
                   [&](auto a, auto b) { return scores[a] > scores[b]; });

  SearchResult result;
  result.total = matched.size();
  for (const auto &field : facet_fields(kind_)) {
    auto &counts = result.facets[field];
    for (auto doc : matched) {
      auto it = docs_[doc].facets.find(field);
      if (it == docs_[doc].facets.end()) continue;
      for (const auto &v : it->second) ++counts[v];
    }
  }
  const std::size_t begin = (q.page - 1) * q.page_size;
  for (std::size_t i = begin; i < matched.size() && i < begin + q.page_size; ++i) {
    const auto &d = docs_[matched[i]];
    result.hits.push_back({d.id, d.version, scores[matched[i]]});
  }
  return result;
}

// ---------------------------------------------------------------------------
// Catalog

struct Catalog::Snapshot {
  std::map<std::string, std::map<Version, PrimitiveAnnotation>> primitives;
  std::map<std::string, DatasetProfile> datasets;
  std::map<std::string, Problem> problems;

  SearchIndex primitive_index;
  SearchIndex dataset_index;
  SearchIndex problem_index;
  std::shared_ptr<const CatalogView> view = std::make_shared<CatalogView>();

  void rebuild() {
    std::vector<IndexedDocument> prim;
    std::vector<PrimitiveAnnotation> all;
    for (const auto &[id, versions] : primitives) {
      prim.push_back(index_entry(versions.rbegin()->second));
      for (const auto &[_, ann] : versions) all.push_back(ann);
    }
    std::vector<IndexedDocument> ds;
    for (const auto &[_, d] : datasets) ds.push_back(index_entry(d));
    std::vector<IndexedDocument> pr;
    for (const auto &[_, p] : problems) pr.push_back(index_entry(p));
    primitive_index = SearchIndex(DocKind::Primitive, std::move(prim));
    dataset_index = SearchIndex(DocKind::Dataset, std::move(ds));
    problem_index = SearchIndex(DocKind::Problem, std::move(pr));
    view = std::make_shared<CatalogView>(std::move(all));
  }

  const SearchIndex &index(DocKind kind) const {
    switch (kind) {
      case DocKind::Primitive: return primitive_index;
      case DocKind::Dataset: return dataset_index;
      case DocKind::Problem: return problem_index;
    }
    return primitive_index;
  }
};

namespace {

struct ParsedDocument {
  StoredDocument stored;
  std::optional<PrimitiveAnnotation> primitive;
  std::optional<DatasetProfile> dataset;
  std::optional<Problem> problem;
};

Validated<ParsedDocument> parse_document(std::string_view text, DocKind kind) {
  ParsedDocument out;
  out.stored.kind = kind;
  switch (kind) {
    case DocKind::Primitive: {
      auto v = parse_annotation(text);
      if (!v) return v.violations();
      out.stored.id = v.value().id;
      out.stored.version = v.value().version;
      out.stored.text = canonical_serialize(v.value());
      out.primitive = v.value();
      return {std::move(out), v.warnings()};
    }
    case DocKind::Dataset: {
      auto v = parse_dataset(text);
      if (!v) return v.violations();
      out.stored.id = v.value().id;
      out.stored.text = canonical_serialize(v.value());
      out.dataset = v.value();
      return {std::move(out), v.warnings()};
    }
    case DocKind::Problem: {
      auto v = parse_problem(text);
      if (!v) return v.violations();
      out.stored.id = v.value().id;
      out.stored.text = canonical_serialize(v.value());
      out.problem = v.value();
      return {std::move(out), v.warnings()};
    }
  }
  return std::vector<Violation>{{"MALFORMED_DOCUMENT", "", "unknown document kind"}};
}

std::string file_name(const StoredDocument &doc) {
  return doc.version ? doc.id + "-" + to_string(*doc.version) : doc.id;
}

void insert(Catalog::Snapshot &snap, ParsedDocument &&doc) {
  if (doc.primitive) {
    auto &ann = *doc.primitive;
    snap.primitives[ann.id].insert_or_assign(ann.version, std::move(ann));
  } else if (doc.dataset) {
    snap.datasets.insert_or_assign(doc.dataset->id, std::move(*doc.dataset));
  } else if (doc.problem) {
    snap.problems.insert_or_assign(doc.problem->id, std::move(*doc.problem));
  }
}

void write_atomically(const fs::path &target, const std::string &text) {
  std::error_code ec;
  fs::create_directories(target.parent_path(), ec);
  if (ec) throw Error("STORE_UNWRITABLE", "cannot create " + target.parent_path().string());
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) throw Error("STORE_UNWRITABLE", "cannot write " + tmp.string());
  }
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error("STORE_UNWRITABLE", "cannot replace " + target.string());
  }
}

}  // namespace

Catalog::Catalog() : snapshot_(std::make_shared<Snapshot>()) {}

Catalog::Catalog(fs::path store_root) : root_(std::move(store_root)) {
  std::error_code ec;
  if (fs::exists(*root_, ec) && !fs::is_directory(*root_, ec))
    throw Error("STORE_UNREADABLE", "store root is not a directory: " + root_->string());
  fs::create_directories(*root_, ec);
  if (ec) throw Error("STORE_UNREADABLE", "cannot create store root " + root_->string());

  auto snap = std::make_shared<Snapshot>();
  for (DocKind kind : {DocKind::Primitive, DocKind::Dataset, DocKind::Problem}) {
    fs::path dir = *root_ / directory_name(kind);
    if (!fs::exists(dir)) continue;
    std::vector<fs::path> files;
    for (const auto &entry : fs::directory_iterator(dir)) {
      if (!entry.is_regular_file()) continue;
      if (entry.path().extension() == ".tmp") continue;
      files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto &path : files) {
      auto parsed = parse_document(read_file(path), kind);
      if (!parsed)
        throw Error("STORE_UNREADABLE",
                    "corrupt store file " + path.string() + ": " +
                        violation_summary(parsed.violations()),
                    parsed.violations());
      if (file_name(parsed.value().stored) != path.filename().string())
        throw Error("STORE_UNREADABLE", "store file " + path.string() +
                                            " does not match its document id/version");
      insert(*snap, std::move(parsed.value()));
    }
  }
  snap->rebuild();
  snapshot_ = std::move(snap);
}

Catalog::~Catalog() = default;

std::shared_ptr<const Catalog::Snapshot> Catalog::snapshot() const {
  std::lock_guard lock(snapshot_mutex_);
  return snapshot_;
}

void Catalog::publish(std::shared_ptr<const Snapshot> next) {
  std::lock_guard lock(snapshot_mutex_);
  snapshot_ = std::move(next);
}

Validated<StoredDocument> Catalog::ingest(std::string_view document, DocKind kind) {
  auto parsed = parse_document(document, kind);
  if (!parsed) return parsed.violations();

  std::lock_guard writer(writer_mutex_);
  StoredDocument stored = parsed.value().stored;
  auto next = std::make_shared<Snapshot>(*snapshot());
  insert(*next, std::move(parsed.value()));
  next->rebuild();
  if (root_) write_atomically(*root_ / directory_name(kind) / file_name(stored), stored.text);
  publish(std::move(next));
  return {std::move(stored), parsed.warnings()};
}

SearchResult Catalog::search(const SearchQuery &q) const {
  auto snap = snapshot();
  return snap->index(q.kind).search(q);
}

namespace {

StoredDocument lookup(const Catalog::Snapshot &snap, DocKind kind, const std::string &key,
                      std::optional<Version> version);

}  // namespace

Catalog::SearchPage Catalog::search_page(const SearchQuery &q) const {
  auto snap = snapshot();
  SearchPage page{snap->index(q.kind).search(q), {}};
  for (const auto &hit : page.result.hits) {
    std::optional<Version> v;
    if (!hit.version.empty()) v = parse_version(hit.version);
    page.documents.push_back(lookup(*snap, q.kind, hit.id, v).text);
  }
  return page;
}

StoredDocument Catalog::get(DocKind kind, std::string_view id,
                            std::optional<Version> version) const {
  return lookup(*snapshot(), kind, std::string(id), version);
}

namespace {

StoredDocument lookup(const Catalog::Snapshot &snap_ref, DocKind kind, const std::string &key,
                      std::optional<Version> version) {
  const auto *snap = &snap_ref;
  StoredDocument out;
  out.kind = kind;
  out.id = key;
  switch (kind) {
    case DocKind::Primitive: {
      auto it = snap->primitives.find(key);
      if (it == snap->primitives.end())
        throw Error("NOT_FOUND", "no primitive with id '" + key + "'");
      const PrimitiveAnnotation *ann = nullptr;
      if (version) {
        auto vit = it->second.find(*version);
        if (vit == it->second.end())
          throw Error("VERSION_NOT_FOUND",
                      "primitive '" + key + "' has no version " + to_string(*version));
        ann = &vit->second;
      } else {
        ann = &it->second.rbegin()->second;
      }
      out.version = ann->version;
      out.text = canonical_serialize(*ann);
      return out;
    }
    case DocKind::Dataset: {
      auto it = snap->datasets.find(key);
      if (it == snap->datasets.end()) throw Error("NOT_FOUND", "no dataset with id '" + key + "'");
      out.text = canonical_serialize(it->second);
      return out;
    }
    case DocKind::Problem: {
      auto it = snap->problems.find(key);
      if (it == snap->problems.end()) throw Error("NOT_FOUND", "no problem with id '" + key + "'");
      out.text = canonical_serialize(it->second);
      return out;
    }
  }
  throw Error("NOT_FOUND", "unknown document kind");
}

}  // namespace

std::optional<DatasetProfile> Catalog::dataset(std::string_view id) const {
  auto snap = snapshot();
  auto it = snap->datasets.find(std::string(id));
  if (it == snap->datasets.end()) return std::nullopt;
  return it->second;
}

std::optional<Problem> Catalog::problem(std::string_view id) const {
  auto snap = snapshot();
  auto it = snap->problems.find(std::string(id));
  if (it == snap->problems.end()) return std::nullopt;
  return it->second;
}

std::shared_ptr<const CatalogView> Catalog::view() const { return snapshot()->view; }

std::size_t Catalog::count(DocKind kind) const { return snapshot()->index(kind).size(); }

}  // namespace marvin
