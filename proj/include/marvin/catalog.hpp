#pragma once

// Document store and faceted search over primitives, datasets and problems.
//
// Each ingest publishes a new immutable snapshot (documents + inverted
// index). Readers hold a snapshot for the duration of a query, so a query
// never observes a half-applied ingest. With a store root configured, every
// accepted document is written as one canonical file before the snapshot is
// published; the files are the source of truth and the index is rebuilt from
// them on startup.

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "marvin/catalog_view.hpp"
#include "marvin/schema.hpp"

namespace marvin {

enum class DocKind { Primitive, Dataset, Problem };

std::string_view to_string(DocKind kind);
/// Accepts "primitive", "dataset", "problem" (any case, optional plural).
std::optional<DocKind> parse_doc_kind(std::string_view s);
/// Store subdirectory: "primitives", "datasets", "problems".
std::string_view directory_name(DocKind kind);
/// Facet (filterable) fields for a document kind, in display order.
const std::vector<std::string> &facet_fields(DocKind kind);

inline constexpr std::size_t kMaxPageSize = 500;

struct SearchQuery {
  std::vector<std::string> text;
  std::map<std::string, std::set<std::string>> filters;
  DocKind kind = DocKind::Primitive;
  std::size_t page = 1;
  std::size_t page_size = 20;
};

struct SearchHit {
  std::string id;
  std::string version;  // empty for unversioned kinds
  int score = 0;

  bool operator==(const SearchHit &) const = default;
};

/// field -> value -> number of matching documents carrying the value.
using FacetCounts = std::map<std::string, std::map<std::string, std::size_t>>;

struct SearchResult {
  std::size_t total = 0;
  std::vector<SearchHit> hits;
  FacetCounts facets;

  bool operator==(const SearchResult &) const = default;
};

/// Lowercases and splits on every non-alphanumeric character.
std::vector<std::string> tokenize(std::string_view text);

/// The searchable projection of one document.
struct IndexedDocument {
  std::string id;
  std::string version;
  std::string name;
  std::string description;
  std::map<std::string, std::set<std::string>> facets;
};

IndexedDocument index_entry(const PrimitiveAnnotation &ann);
IndexedDocument index_entry(const DatasetProfile &profile);
IndexedDocument index_entry(const Problem &problem);

/// In-memory inverted index over one document kind.
///
/// Match rule: every filter field's required values must all be present on
/// the document, and at least one query term must hit a name, id or
/// description token (unless there are no terms). Score is
/// 3*name + 2*id + 1*description distinct-term hits; hits are ordered by
/// (score desc, id asc). Facets count over the whole matching set.
class SearchIndex {
 public:
  SearchIndex() = default;
  SearchIndex(DocKind kind, std::vector<IndexedDocument> docs);

  /// Throws Error UNKNOWN_FIELD or BAD_QUERY.
  SearchResult search(const SearchQuery &q) const;

  std::size_t size() const { return docs_.size(); }
  const std::vector<IndexedDocument> &documents() const { return docs_; }

 private:
  using Postings = std::vector<std::uint32_t>;

  DocKind kind_ = DocKind::Primitive;
  std::vector<IndexedDocument> docs_;  // sorted by id
  std::array<std::unordered_map<std::string, Postings>, 3> text_postings_;
  std::map<std::string, std::map<std::string, Postings>> facet_postings_;
};

/// Throws Error BAD_QUERY when page/page_size are out of bounds and
/// UNKNOWN_FIELD for a filter outside the kind's facet set.
void validate_query(const SearchQuery &q);

struct StoredDocument {
  DocKind kind = DocKind::Primitive;
  std::string id;
  std::optional<Version> version;
  std::string text;  // canonical serialization

  bool operator==(const StoredDocument &) const = default;
};

class Catalog {
 public:
  /// In-memory catalog with no backing store.
  Catalog();
  /// Opens (creating if needed) a store root and rebuilds the index from
  /// it. Throws Error STORE_UNREADABLE naming the first bad file.
  explicit Catalog(std::filesystem::path store_root);
  ~Catalog();

  Catalog(const Catalog &) = delete;
  Catalog &operator=(const Catalog &) = delete;

  /// Validates and stores a document. On violations nothing changes.
  /// Re-ingesting the same (id, version) replaces the stored document.
  Validated<StoredDocument> ingest(std::string_view document, DocKind kind);

  SearchResult search(const SearchQuery &q) const;

  /// Search plus the canonical text of every hit, read from one snapshot.
  struct SearchPage {
    SearchResult result;
    std::vector<std::string> documents;  // parallel to result.hits
  };
  SearchPage search_page(const SearchQuery &q) const;

  /// Requested version, or the greatest when unspecified. Throws
  /// Error NOT_FOUND / VERSION_NOT_FOUND.
  StoredDocument get(DocKind kind, std::string_view id,
                     std::optional<Version> version = std::nullopt) const;

  std::optional<DatasetProfile> dataset(std::string_view id) const;
  std::optional<Problem> problem(std::string_view id) const;

  /// Primitive snapshot for the planner and containerizer.
  std::shared_ptr<const CatalogView> view() const;

  /// Number of searchable (latest-version) documents of a kind.
  std::size_t count(DocKind kind) const;

  const std::optional<std::filesystem::path> &store_root() const { return root_; }

  struct Snapshot;

 private:
  std::shared_ptr<const Snapshot> snapshot() const;
  void publish(std::shared_ptr<const Snapshot> next);

  std::optional<std::filesystem::path> root_;
  mutable std::mutex snapshot_mutex_;
  std::mutex writer_mutex_;
  std::shared_ptr<const Snapshot> snapshot_;
};

}  // namespace marvin
