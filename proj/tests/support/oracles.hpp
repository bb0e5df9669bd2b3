#pragma once

// Brute-force reference implementations. These deliberately avoid the
// library's planner and index code paths.

#include <algorithm>
#include <cctype>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "marvin/catalog.hpp"
#include "marvin/schema.hpp"

namespace marvin::testing {

// ---------------------------------------------------------------------------
// Planning: exhaustive enumeration of primitive sequences.

inline bool oracle_interior(const std::string &family) {
  return family == "DATA_CLEANING" || family == "DATA_TRANSFORMATION" ||
         family == "FEATURE_SELECTION";
}

inline std::string oracle_task_family(TaskType t) {
  switch (t) {
    case TaskType::Classification: return "CLASSIFICATION";
    case TaskType::Regression: return "REGRESSION";
    case TaskType::Clustering: return "CLUSTERING";
    case TaskType::TimeseriesForecasting: return "TIMESERIES_FORECASTING";
    case TaskType::Ranking: return "RANKING";
  }
  return "";
}

/// Every valid sequence of distinct primitive ids of length <= max_depth,
/// sorted by (length, ids).
inline std::vector<std::vector<std::string>> enumerate_pipelines(
    const std::vector<PrimitiveAnnotation> &prims, const DatasetProfile &profile,
    const Problem &problem, std::size_t max_depth) {
  std::vector<std::vector<std::string>> found;
  const std::string target = oracle_task_family(problem.task_type);
  std::vector<std::size_t> seq;
  std::vector<bool> used(prims.size(), false);

  auto usable = [&](const PrimitiveAnnotation &p, const std::set<std::string> &holds) {
    for (const auto &f : p.preconditions)
      if (!holds.count(f.name)) return false;
    if (p.modalities.empty()) return true;
    return p.modalities.count(profile.modality) > 0;
  };

  std::function<void(const std::set<std::string> &)> rec = [&](const std::set<std::string> &holds) {
    // Close the pipeline here with an estimator...
    for (std::size_t i = 0; i < prims.size(); ++i) {
      if (used[i] || prims[i].primitive_family.name != target || !usable(prims[i], holds)) continue;
      std::vector<std::string> ids;
      for (auto s : seq) ids.push_back(prims[s].id);
      ids.push_back(prims[i].id);
      found.push_back(ids);
    }
    // ...or extend it with another interior step.
    if (seq.size() + 1 >= max_depth) return;
    for (std::size_t i = 0; i < prims.size(); ++i) {
      if (used[i] || !oracle_interior(prims[i].primitive_family.name) || !usable(prims[i], holds))
        continue;
      std::set<std::string> next;
      for (const auto &h : holds) {
        bool killed = false;
        for (const auto &f : prims[i].invalidates) killed = killed || f.name == h;
        if (!killed) next.insert(h);
      }
      for (const auto &f : prims[i].effects) next.insert(f.name);
      used[i] = true;
      seq.push_back(i);
      rec(next);
      seq.pop_back();
      used[i] = false;
    }
  };

  std::set<std::string> initial;
  for (const auto &f : profile.holds) initial.insert(f.name);
  rec(initial);
  std::sort(found.begin(), found.end(), [](const auto &a, const auto &b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  });
  return found;
}

// ---------------------------------------------------------------------------
// Search: linear scan with its own tokenizer and scoring.

inline std::set<std::string> oracle_tokens(const std::string &text) {
  std::set<std::string> out;
  std::string cur;
  for (char c : text + " ") {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else {
      if (!cur.empty()) out.insert(cur);
      cur.clear();
    }
  }
  return out;
}

inline std::set<std::string> oracle_field_values(const PrimitiveAnnotation &a,
                                                 const std::string &field) {
  std::set<std::string> out;
  if (field == "primitive_family") out.insert(a.primitive_family.name);
  if (field == "algorithm_types")
    for (const auto &t : a.algorithm_types) out.insert(t.name);
  if (field == "preconditions")
    for (const auto &f : a.preconditions) out.insert(f.name);
  if (field == "effects")
    for (const auto &f : a.effects) out.insert(f.name);
  if (field == "languages") out.insert(a.languages.begin(), a.languages.end());
  if (field == "modalities")
    for (auto m : a.modalities) out.insert(std::string(to_string(m)));
  return out;
}

struct OracleResult {
  std::vector<std::pair<std::string, int>> hits;  // (id, score), ranked
  FacetCounts facets;
};

/// `docs` must hold only the latest version of each id.
inline OracleResult oracle_search(const std::vector<PrimitiveAnnotation> &docs,
                                  const SearchQuery &q) {
  std::set<std::string> terms;
  for (const auto &t : q.text)
    for (const auto &tok : oracle_tokens(t)) terms.insert(tok);

  OracleResult r;
  std::vector<const PrimitiveAnnotation *> matched;
  for (const auto &d : docs) {
    bool ok = true;
    for (const auto &[field, required] : q.filters) {
      auto have = oracle_field_values(d, field);
      for (const auto &v : required) ok = ok && have.count(v) > 0;
    }
    if (!ok) continue;
    int score = 0;
    auto name = oracle_tokens(d.name), id = oracle_tokens(d.id), desc = oracle_tokens(d.description);
    for (const auto &t : terms) score += 3 * int(name.count(t)) + 2 * int(id.count(t)) + int(desc.count(t));
    if (!terms.empty() && score == 0) continue;
    r.hits.emplace_back(d.id, score);
    matched.push_back(&d);
  }
  std::sort(r.hits.begin(), r.hits.end(), [](const auto &a, const auto &b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  for (const auto &field : facet_fields(DocKind::Primitive)) {
    auto &counts = r.facets[field];
    for (const auto *d : matched)
      for (const auto &v : oracle_field_values(*d, field)) ++counts[v];
  }
  return r;
}

}  // namespace marvin::testing
