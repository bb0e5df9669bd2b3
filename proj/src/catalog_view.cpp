#include "marvin/catalog_view.hpp"

#include <algorithm>

namespace marvin {

CatalogView::CatalogView(std::vector<PrimitiveAnnotation> all_versions) {
  for (auto &ann : all_versions) {
    auto key = std::make_pair(ann.id, ann.version);
    by_key_.insert_or_assign(std::move(key), std::move(ann));
  }
  // Keys are ordered by (id, version) so the last entry of each id run is
  // its latest version.
  for (auto it = by_key_.begin(); it != by_key_.end(); ++it) {
    auto next = std::next(it);
    if (next == by_key_.end() || next->first.first != it->first.first)
      latest_.push_back(it->second);
  }
}

const PrimitiveAnnotation *CatalogView::find(std::string_view id,
                                             const Version &version) const {
  auto it = by_key_.find(std::make_pair(std::string(id), version));
  return it == by_key_.end() ? nullptr : &it->second;
}

const PrimitiveAnnotation *CatalogView::find_latest(std::string_view id) const {
  auto it = std::lower_bound(
      latest_.begin(), latest_.end(), id,
      [](const PrimitiveAnnotation &a, std::string_view key) { return a.id < key; });
  if (it == latest_.end() || it->id != id) return nullptr;
  return &*it;
}

}  // namespace marvin
