#pragma once

// Random document generators for property tests and the acceptance suite.

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "marvin/schema.hpp"

namespace marvin::testing {

using Rng = std::mt19937_64;

inline std::size_t uniform(Rng &rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline bool coin(Rng &rng, double p = 0.5) { return std::bernoulli_distribution(p)(rng); }

template <typename T>
const T &pick(Rng &rng, const std::vector<T> &v) {
  return v[uniform(rng, 0, v.size() - 1)];
}

inline const std::vector<std::string> &word_pool() {
  static const std::vector<std::string> w{
      "bayesian", "linear",  "regression", "decision", "tree",     "forest", "random",
      "boost",    "ada",     "imputer",    "scaler",   "encoder",  "text",   "image",
      "video",    "cluster", "kmeans",     "ranker",   "gradient", "svm",    "logistic",
      "neural",   "network", "token",      "frame",    "sampler",  "pca",    "select"};
  return w;
}

inline std::string random_words(Rng &rng, std::size_t lo, std::size_t hi, const char *sep) {
  std::string out;
  for (std::size_t i = 0, n = uniform(rng, lo, hi); i < n; ++i) {
    if (i) out += sep;
    out += pick(rng, word_pool());
  }
  return out;
}

inline std::string random_id(Rng &rng) {
  std::string id = "d3m";
  for (std::size_t i = 0, n = uniform(rng, 1, 3); i < n; ++i) {
    id += "." + pick(rng, word_pool());
    if (coin(rng, 0.3)) id += "_" + std::to_string(uniform(rng, 0, 99));
  }
  return id;
}

inline std::string random_term(Rng &rng, const std::vector<std::string> &seeds,
                               double unknown_rate) {
  if (coin(rng, unknown_rate)) {
    std::string t = "X";
    for (std::size_t i = 0, n = uniform(rng, 1, 6); i < n; ++i)
      t += "ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_"[uniform(rng, 0, 36)];
    return t;
  }
  return pick(rng, seeds);
}

inline Hyperparameter random_hyperparameter(Rng &rng, const std::string &name) {
  Hyperparameter hp;
  hp.name = name;
  hp.kind = static_cast<HyperparameterKind>(uniform(rng, 0, 2));
  hp.value_type = static_cast<ValueType>(uniform(rng, 0, 4));
  switch (hp.value_type) {
    case ValueType::Int: {
      std::int64_t lo = static_cast<std::int64_t>(uniform(rng, 0, 50)) - 25;
      std::int64_t hi = lo + static_cast<std::int64_t>(uniform(rng, 0, 1000));
      if (coin(rng, 0.7)) hp.range = Range{lo, hi};
      hp.default_value = lo + static_cast<std::int64_t>(uniform(rng, 0, static_cast<std::size_t>(hi - lo)));
      break;
    }
    case ValueType::Float: {
      std::uniform_real_distribution<double> d(-10.0, 10.0);
      double a = d(rng), b = d(rng);
      if (a > b) std::swap(a, b);
      if (coin(rng, 0.7)) hp.range = Range{a, b};
      hp.default_value = coin(rng, 0.2) ? a : a + (b - a) * std::uniform_real_distribution<double>(0, 1)(rng);
      if (std::get<double>(hp.default_value) > b) hp.default_value = b;
      break;
    }
    case ValueType::Bool:
      hp.default_value = coin(rng);
      break;
    case ValueType::Enum: {
      for (std::size_t i = 0, n = uniform(rng, 1, 4); i < n; ++i) {
        std::string c = pick(rng, word_pool());
        if (std::find(hp.choices.begin(), hp.choices.end(), c) == hp.choices.end())
          hp.choices.push_back(c);
      }
      hp.default_value = pick(rng, hp.choices);
      break;
    }
    case ValueType::String:
      hp.default_value = random_words(rng, 0, 3, " ");
      break;
  }
  return hp;
}

inline const std::vector<std::string> &extended_flags() {
  static const std::vector<std::string> f{"NO_MISSING_VALUES", "NO_CATEGORICAL_VALUES",
                                          "NO_CONTINUOUS_VALUES", "NO_JAGGED_VALUES",
                                          "TOKENIZED", "FIXED_SIZE_FRAMES"};
  return f;
}

/// A valid annotation; roughly one term in five is outside the seed vocabularies.
inline PrimitiveAnnotation random_annotation(Rng &rng) {
  PrimitiveAnnotation a;
  a.id = random_id(rng);
  a.name = random_words(rng, 1, 4, " ");
  if (coin(rng, 0.3)) a.name += " " + std::to_string(uniform(rng, 1, 9));
  a.version = Version{static_cast<std::uint32_t>(uniform(rng, 0, 3)),
                      static_cast<std::uint32_t>(uniform(rng, 0, 12)),
                      static_cast<std::uint32_t>(uniform(rng, 0, 20))};
  a.description = coin(rng, 0.8) ? random_words(rng, 0, 12, " ") + "." : "";
  static const std::vector<std::string> langs{"python", "java", "r", "scala", "julia"};
  for (const auto &l : langs)
    if (coin(rng, 0.3)) a.languages.push_back(l);
  std::shuffle(a.languages.begin(), a.languages.end(), rng);
  for (std::size_t i = 0, n = uniform(rng, 1, 3); i < n; ++i) {
    AlgorithmType t{random_term(rng, seed_algorithm_types(), 0.2)};
    if (std::find(a.algorithm_types.begin(), a.algorithm_types.end(), t) == a.algorithm_types.end())
      a.algorithm_types.push_back(t);
  }
  a.primitive_family = PrimitiveFamily{random_term(rng, seed_primitive_families(), 0.1)};
  for (std::size_t i = 0, n = uniform(rng, 0, 3); i < n; ++i)
    a.hyperparameters.push_back(random_hyperparameter(rng, "hp_" + std::to_string(i)));
  for (std::size_t i = 0, n = uniform(rng, 0, 3); i < n; ++i)
    a.preconditions.insert(ConditionFlag{random_term(rng, extended_flags(), 0.15)});
  for (std::size_t i = 0, n = uniform(rng, 0, 2); i < n; ++i)
    a.effects.insert(ConditionFlag{random_term(rng, extended_flags(), 0.15)});
  for (std::size_t i = 0, n = uniform(rng, 0, 2); i < n; ++i) {
    ConditionFlag f{random_term(rng, extended_flags(), 0.15)};
    if (!a.effects.count(f)) a.invalidates.insert(f);
  }
  for (auto m : all_modalities())
    if (coin(rng, 0.15)) a.modalities.insert(m);
  return a;
}

// ---------------------------------------------------------------------------
// Planner catalogs

struct PlanningCase {
  std::vector<PrimitiveAnnotation> primitives;
  DatasetProfile profile;
  Problem problem;
};

/// Small catalogs: <= max_primitives primitives over <= max_flags flags.
/// With `with_invalidates` false every invalidates set is empty.
inline PlanningCase random_planning_case(Rng &rng, std::size_t max_primitives = 8,
                                         std::size_t max_flags = 5,
                                         bool with_invalidates = true) {
  const std::size_t nflags = uniform(rng, 1, max_flags);
  std::vector<std::string> flags;
  for (std::size_t i = 0; i < nflags; ++i) flags.push_back("F" + std::to_string(i));

  static const std::vector<std::string> families{"DATA_CLEANING", "DATA_TRANSFORMATION",
                                                 "FEATURE_SELECTION", "CLASSIFICATION",
                                                 "REGRESSION"};
  static const std::vector<DataModality> modalities{DataModality::Tabular, DataModality::Text};

  PlanningCase c;
  const std::size_t n = uniform(rng, 1, max_primitives);
  for (std::size_t i = 0; i < n; ++i) {
    PrimitiveAnnotation p;
    p.id = "p" + std::to_string(i);
    p.name = "primitive " + std::to_string(i);
    p.version = Version{1, 0, 0};
    p.algorithm_types = {AlgorithmType{"DECISION_TREE"}};
    p.primitive_family = PrimitiveFamily{pick(rng, families)};
    for (const auto &f : flags) {
      if (coin(rng, 0.3)) p.preconditions.insert(ConditionFlag{f});
      if (coin(rng, 0.3)) p.effects.insert(ConditionFlag{f});
      else if (with_invalidates && coin(rng, 0.15)) p.invalidates.insert(ConditionFlag{f});
    }
    if (coin(rng, 0.2)) p.modalities.insert(pick(rng, modalities));
    if (coin(rng, 0.3)) {
      Hyperparameter hp;
      hp.name = "alpha";
      hp.value_type = ValueType::Float;
      hp.range = Range{0.0, 1.0};
      hp.default_value = 0.5;
      p.hyperparameters.push_back(hp);
    }
    c.primitives.push_back(std::move(p));
  }
  // Scrambled ids so catalog order and id order differ.
  std::shuffle(c.primitives.begin(), c.primitives.end(), rng);
  for (std::size_t i = 0; i < c.primitives.size(); ++i)
    c.primitives[i].id = "p" + std::to_string((i * 5 + 3) % 11) + "_" + std::to_string(i);

  c.profile.id = "ds";
  c.profile.name = "dataset";
  c.profile.modality = pick(rng, modalities);
  for (const auto &f : flags)
    if (coin(rng, 0.25)) c.profile.holds.insert(ConditionFlag{f});
  c.problem.id = "prob";
  c.problem.dataset_id = "ds";
  c.problem.task_type = coin(rng, 0.8) ? TaskType::Classification : TaskType::Regression;
  return c;
}

}  // namespace marvin::testing
