#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "marvin/schema.hpp"

namespace marvin {

/// Immutable snapshot of the primitive annotations known to a catalog. The
/// planner and containerizer read primitives only through this view.
class CatalogView {
 public:
  CatalogView() = default;
  /// Accepts every stored version; the latest per id is derived.
  explicit CatalogView(std::vector<PrimitiveAnnotation> all_versions);

  /// Exact (id, version) lookup; nullptr when absent.
  const PrimitiveAnnotation *find(std::string_view id, const Version &version) const;
  /// Numerically greatest version of `id`; nullptr when absent.
  const PrimitiveAnnotation *find_latest(std::string_view id) const;

  /// Latest version of every primitive, sorted by id.
  std::span<const PrimitiveAnnotation> latest() const { return latest_; }
  std::size_t version_count() const { return by_key_.size(); }

 private:
  std::map<std::pair<std::string, Version>, PrimitiveAnnotation, std::less<>> by_key_;
  std::vector<PrimitiveAnnotation> latest_;
};

}  // namespace marvin
