#include "marvin/planner.hpp"

#include <algorithm>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <unordered_map>

#include "marvin/json_io.hpp"

namespace marvin {

namespace {

// Fixed-width flag set over the flags interned for one planning call.
class FlagBits {
 public:
  FlagBits() = default;
  explicit FlagBits(std::size_t nbits) : words_((nbits + 63) / 64, 0) {}

  void set(std::size_t i) { words_[i / 64] |= std::uint64_t{1} << (i % 64); }

  bool subset_of(const FlagBits &o) const {
    for (std::size_t i = 0; i < words_.size(); ++i)
      if (words_[i] & ~o.words_[i]) return false;
    return true;
  }

  FlagBits applied(const FlagBits &invalidates, const FlagBits &effects) const {
    FlagBits out = *this;
    for (std::size_t i = 0; i < words_.size(); ++i)
      out.words_[i] = (out.words_[i] & ~invalidates.words_[i]) | effects.words_[i];
    return out;
  }

  bool operator==(const FlagBits &) const = default;

  std::size_t hash() const {
    std::size_t h = 1469598103934665603ull;
    for (auto w : words_) h = (h ^ std::hash<std::uint64_t>{}(w)) * 1099511628211ull;
    return h;
  }

 private:
  std::vector<std::uint64_t> words_;
};

struct FlagBitsHash {
  std::size_t operator()(const FlagBits &b) const { return b.hash(); }
};

struct Compiled {
  const PrimitiveAnnotation *ann;
  FlagBits pre;
  FlagBits effects;
  FlagBits invalidates;
};

class Interner {
 public:
  void add(const FlagSet &flags) {
    for (const auto &f : flags) index_.emplace(f, 0);
  }
  void freeze() {
    std::size_t i = 0;
    for (auto &[_, idx] : index_) idx = i++;
  }
  std::size_t size() const { return index_.size(); }
  FlagBits bits(const FlagSet &flags) const {
    FlagBits b(index_.size());
    for (const auto &f : flags) b.set(index_.at(f));
    return b;
  }

 private:
  std::map<ConditionFlag, std::size_t> index_;
};

constexpr std::size_t kUnreachable = std::numeric_limits<std::size_t>::max();

PipelineStep default_step(const PrimitiveAnnotation &ann) {
  PipelineStep step{ann.id, ann.version, {}};
  for (const auto &hp : ann.hyperparameters) step.bindings.emplace(hp.name, hp.default_value);
  return step;
}

bool modality_ok(const PrimitiveAnnotation &p, DataModality m) {
  return p.modalities.empty() || p.modalities.count(m) > 0;
}

FlagSet missing(const FlagSet &required, const FlagSet &holds) {
  FlagSet out;
  std::set_difference(required.begin(), required.end(), holds.begin(), holds.end(),
                      std::inserter(out, out.end()));
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

bool applicable(const PrimitiveAnnotation &p, const PipelineState &s) {
  return std::includes(s.holds.begin(), s.holds.end(), p.preconditions.begin(),
                       p.preconditions.end()) &&
         modality_ok(p, s.modality);
}

PipelineState apply(const PrimitiveAnnotation &p, const PipelineState &s) {
  if (!applicable(p, s))
    throw Error("NOT_APPLICABLE", "primitive '" + p.id + "' is not applicable in this state");
  PipelineState out{{}, s.modality};
  std::set_difference(s.holds.begin(), s.holds.end(), p.invalidates.begin(),
                      p.invalidates.end(), std::inserter(out.holds, out.holds.end()));
  out.holds.insert(p.effects.begin(), p.effects.end());
  return out;
}

PrimitiveFamily task_family_map(TaskType t) {
  return PrimitiveFamily{std::string(to_string(t))};
}

bool is_interior_family(const PrimitiveFamily &f) {
  return f.name == "DATA_TRANSFORMATION" || f.name == "DATA_CLEANING" ||
         f.name == "FEATURE_SELECTION";
}

NoPipelineFound::NoPipelineFound(FlagSet unmet, std::size_t states_visited)
    : Error("NO_PIPELINE_FOUND",
            [&] {
              std::string msg = "no pipeline reaches an estimator; unmet flags: {";
              bool first = true;
              for (const auto &f : unmet) {
                msg += (first ? "" : ", ") + f.name;
                first = false;
              }
              return msg + "}";
            }()),
      unmet_(std::move(unmet)),
      states_visited_(states_visited) {}

PlanResult plan(const DatasetProfile &profile, const Problem &problem,
                const CatalogView &catalog, const PlanOptions &options) {
  if (problem.dataset_id != profile.id)
    throw Error("UNKNOWN_DATASET", "problem '" + problem.id + "' is posed over dataset '" +
                                       problem.dataset_id + "', not '" + profile.id + "'");
  if (options.max_depth < 1 || options.k < 1)
    throw Error("BAD_REQUEST", "max_depth and k must be >= 1");

  const PrimitiveFamily target = task_family_map(problem.task_type);

  Interner interner;
  interner.add(profile.holds);
  std::vector<const PrimitiveAnnotation *> interior_anns, estimator_anns;
  for (const auto &p : catalog.latest()) {
    if (!modality_ok(p, profile.modality)) continue;
    if (p.primitive_family == target) estimator_anns.push_back(&p);
    else if (is_interior_family(p.primitive_family)) interior_anns.push_back(&p);
    else continue;
    interner.add(p.preconditions);
    interner.add(p.effects);
    interner.add(p.invalidates);
  }
  interner.freeze();

  auto compile = [&](const std::vector<const PrimitiveAnnotation *> &anns) {
    std::vector<Compiled> out;
    for (const auto *a : anns)
      out.push_back({a, interner.bits(a->preconditions), interner.bits(a->effects),
                     interner.bits(a->invalidates)});
    return out;
  };
  const auto interior = compile(interior_anns);
  const auto estimators = compile(estimator_anns);
  const FlagBits initial = interner.bits(profile.holds);

  // Reachability over flag states, ignoring the no-repeat rule. Interior
  // steps number at most max_depth - 1.
  std::vector<FlagBits> states{initial};
  std::vector<FlagSet> state_sets{profile.holds};
  std::vector<std::size_t> depth{0};
  std::vector<std::vector<std::size_t>> predecessors(1);
  std::unordered_map<FlagBits, std::size_t, FlagBitsHash> state_index{{initial, 0}};
  for (std::size_t cur = 0; cur < states.size(); ++cur) {
    if (depth[cur] + 1 >= options.max_depth) continue;
    for (const auto &p : interior) {
      if (!p.pre.subset_of(states[cur])) continue;
      FlagBits next = states[cur].applied(p.invalidates, p.effects);
      if (next == states[cur]) continue;
      auto [it, inserted] = state_index.emplace(next, states.size());
      if (inserted) {
        states.push_back(next);
        state_sets.push_back(apply(*p.ann, {state_sets[cur], profile.modality}).holds);
        depth.push_back(depth[cur] + 1);
        predecessors.emplace_back();
      }
      predecessors[it->second].push_back(cur);
    }
  }

  // Interior steps still needed from each state to reach one where some
  // estimator applies; a lower bound for the exact search below.
  std::vector<std::size_t> to_goal(states.size(), kUnreachable);
  std::deque<std::size_t> queue;
  for (std::size_t s = 0; s < states.size(); ++s) {
    bool goal = std::any_of(estimators.begin(), estimators.end(),
                            [&](const Compiled &e) { return e.pre.subset_of(states[s]); });
    if (goal) {
      to_goal[s] = 0;
      queue.push_back(s);
    }
  }
  while (!queue.empty()) {
    std::size_t s = queue.front();
    queue.pop_front();
    for (std::size_t pred : predecessors[s]) {
      if (to_goal[pred] != kUnreachable) continue;
      to_goal[pred] = to_goal[s] + 1;
      queue.push_back(pred);
    }
  }

  PlanResult result;
  result.states_visited = states.size();

  auto fail = [&] {
    FlagSet unmet;
    for (const auto &holds : state_sets)
      for (const auto *e : estimator_anns) {
        auto m = missing(e->preconditions, holds);
        unmet.insert(m.begin(), m.end());
      }
    return NoPipelineFound(std::move(unmet), states.size());
  };
  if (to_goal[0] == kUnreachable) throw fail();

  // Exact enumeration by increasing length; candidates are visited in id
  // order so each length yields pipelines in lexicographic order.
  std::vector<std::size_t> path_states{0};
  std::vector<std::size_t> chosen;
  std::vector<bool> used(interior.size(), false);

  std::function<bool(std::size_t)> extend = [&](std::size_t interior_steps) -> bool {
    const std::size_t cur = path_states.back();
    if (chosen.size() == interior_steps) {
      for (const auto &e : estimators) {
        if (!e.pre.subset_of(states[cur])) continue;
        Pipeline pl;
        pl.id = problem.id + ".p" + std::to_string(result.pipelines.size() + 1);
        pl.dataset_id = profile.id;
        pl.problem_id = problem.id;
        for (auto i : chosen) pl.steps.push_back(default_step(*interior[i].ann));
        pl.steps.push_back(default_step(*e.ann));
        result.pipelines.push_back(std::move(pl));
        if (result.pipelines.size() == options.k) return true;
      }
      return false;
    }
    for (std::size_t i = 0; i < interior.size(); ++i) {
      const auto &p = interior[i];
      if (used[i] || !p.pre.subset_of(states[cur])) continue;
      FlagBits next = states[cur].applied(p.invalidates, p.effects);
      auto it = state_index.find(next);
      if (it == state_index.end()) continue;
      const std::size_t ns = it->second;
      if (std::find(path_states.begin(), path_states.end(), ns) != path_states.end()) continue;
      if (to_goal[ns] == kUnreachable || chosen.size() + 1 + to_goal[ns] > interior_steps)
        continue;
      used[i] = true;
      chosen.push_back(i);
      path_states.push_back(ns);
      bool done = extend(interior_steps);
      path_states.pop_back();
      chosen.pop_back();
      used[i] = false;
      if (done) return true;
    }
    return false;
  };

  for (std::size_t steps = to_goal[0]; steps + 1 <= options.max_depth; ++steps)
    if (extend(steps)) break;

  if (result.pipelines.empty()) throw fail();
  return result;
}

std::string_view to_string(PipelineCheck::Status s) {
  using S = PipelineCheck::Status;
  switch (s) {
    case S::Ok: return "OK";
    case S::Empty: return "EMPTY_PIPELINE";
    case S::ReferenceMismatch: return "REFERENCE_MISMATCH";
    case S::UnknownPrimitive: return "UNKNOWN_PRIMITIVE";
    case S::NotApplicable: return "UNMET_PRECONDITIONS";
    case S::BadBinding: return "BAD_BINDING";
    case S::WrongFinalFamily: return "WRONG_FINAL_FAMILY";
  }
  return "?";
}

PipelineCheck validate_pipeline(const Pipeline &pipeline, const DatasetProfile &profile,
                                const Problem &problem, const CatalogView &catalog) {
  using S = PipelineCheck::Status;
  PipelineCheck check;
  if (pipeline.steps.empty()) {
    check.status = S::Empty;
    check.detail = "pipeline has no steps";
    return check;
  }
  if (pipeline.dataset_id != profile.id || pipeline.problem_id != problem.id ||
      problem.dataset_id != profile.id) {
    check.status = S::ReferenceMismatch;
    check.detail = "pipeline, problem and dataset references disagree";
    return check;
  }

  PipelineState state{profile.holds, profile.modality};
  const PrimitiveAnnotation *last = nullptr;
  for (std::size_t i = 0; i < pipeline.steps.size(); ++i) {
    const auto &step = pipeline.steps[i];
    const auto *ann = catalog.find(step.primitive_id, step.primitive_version);
    if (!ann) {
      check.status = S::UnknownPrimitive;
      check.step_index = i;
      check.detail = "no primitive " + step.primitive_id + "==" + to_string(step.primitive_version);
      return check;
    }
    if (!applicable(*ann, state)) {
      check.status = S::NotApplicable;
      check.step_index = i;
      check.unmet = missing(ann->preconditions, state.holds);
      check.modality_mismatch = !modality_ok(*ann, state.modality);
      check.detail = "preconditions of '" + ann->id + "' do not hold";
      return check;
    }
    for (const auto &[name, value] : step.bindings) {
      const auto *hp = ann->find_hyperparameter(name);
      if (!hp) {
        check.binding_violations.push_back(
            {"UNKNOWN_HYPERPARAMETER", "steps[" + std::to_string(i) + "].bindings." + name,
             "primitive '" + ann->id + "' has no such hyperparameter"});
        continue;
      }
      auto status = check_binding(*hp, value);
      if (status != BindingStatus::Ok)
        check.binding_violations.push_back({std::string(to_string(status)),
                                            "steps[" + std::to_string(i) + "].bindings." + name,
                                            "value " + to_string(value) + " rejected"});
    }
    if (!check.binding_violations.empty()) {
      check.status = S::BadBinding;
      check.step_index = i;
      check.detail = "hyperparameter bindings rejected";
      return check;
    }
    state = apply(*ann, state);
    last = ann;
  }
  if (last->primitive_family != task_family_map(problem.task_type)) {
    check.status = S::WrongFinalFamily;
    check.step_index = pipeline.steps.size() - 1;
    check.detail = "final step family " + last->primitive_family.name +
                   " does not solve task " + std::string(to_string(problem.task_type));
  }
  return check;
}

// ---------------------------------------------------------------------------
// Pipeline documents

Validated<Pipeline> parse_pipeline(std::string_view document) {
  std::vector<Violation> errors;
  auto bad = [&](std::string path, std::string reason) {
    errors.push_back({"BAD_VALUE", std::move(path), std::move(reason)});
  };
  auto root = parse_json(document);
  if (!root || !root->is_object())
    return std::vector<Violation>{{"MALFORMED_DOCUMENT", "", "document is not a JSON object"}};
  const Json &doc = *root;
  for (const auto &item : doc.items())
    if (item.key() != "id" && item.key() != "dataset_id" && item.key() != "problem_id" &&
        item.key() != "steps")
      bad(item.key(), "unknown field");

  Pipeline pl;
  auto id_field = [&](const char *key, std::string &out) {
    auto it = doc.find(key);
    if (it == doc.end() || it->is_null()) {
      errors.push_back({"MISSING_FIELD", key, "required field is absent"});
    } else if (!it->is_string() || !is_document_id(it->get<std::string>())) {
      bad(key, "expected dotted lowercase identifier");
    } else {
      out = it->get<std::string>();
    }
  };
  id_field("id", pl.id);
  id_field("dataset_id", pl.dataset_id);
  id_field("problem_id", pl.problem_id);

  auto steps = doc.find("steps");
  if (steps == doc.end() || steps->is_null()) {
    errors.push_back({"MISSING_FIELD", "steps", "required field is absent"});
  } else if (!steps->is_array() || steps->empty()) {
    bad("steps", "expected a non-empty list");
  } else {
    for (std::size_t i = 0; i < steps->size(); ++i) {
      const auto &s = (*steps)[i];
      const std::string p = "steps[" + std::to_string(i) + "]";
      if (!s.is_object()) {
        bad(p, "expected an object");
        continue;
      }
      PipelineStep step;
      for (const auto &item : s.items())
        if (item.key() != "primitive_id" && item.key() != "primitive_version" &&
            item.key() != "bindings")
          bad(p + "." + item.key(), "unknown field");
      auto pid = s.find("primitive_id");
      if (pid == s.end()) errors.push_back({"MISSING_FIELD", p + ".primitive_id", "required field is absent"});
      else if (!pid->is_string() || !is_document_id(pid->get<std::string>()))
        bad(p + ".primitive_id", "expected dotted lowercase identifier");
      else step.primitive_id = pid->get<std::string>();
      auto pv = s.find("primitive_version");
      if (pv == s.end()) errors.push_back({"MISSING_FIELD", p + ".primitive_version", "required field is absent"});
      else if (auto v = pv->is_string() ? parse_version(pv->get<std::string>()) : std::nullopt)
        step.primitive_version = *v;
      else bad(p + ".primitive_version", "expected X.Y.Z");
      auto b = s.find("bindings");
      if (b != s.end() && !b->is_null()) {
        if (!b->is_object()) {
          bad(p + ".bindings", "expected an object");
        } else {
          for (const auto &item : b->items()) {
            auto v = value_from_json(item.value());
            if (!v) bad(p + ".bindings." + item.key(), "unsupported value");
            else step.bindings.emplace(item.key(), *v);
          }
        }
      }
      pl.steps.push_back(std::move(step));
    }
  }
  if (!errors.empty()) {
    std::sort(errors.begin(), errors.end());
    return errors;
  }
  return pl;
}

std::string canonical_serialize(const Pipeline &pipeline) {
  OrderedJson j;
  j["id"] = pipeline.id;
  j["dataset_id"] = pipeline.dataset_id;
  j["problem_id"] = pipeline.problem_id;
  OrderedJson steps = OrderedJson::array();
  for (const auto &s : pipeline.steps) {
    OrderedJson step;
    step["primitive_id"] = s.primitive_id;
    step["primitive_version"] = to_string(s.primitive_version);
    OrderedJson bindings = OrderedJson::object();
    for (const auto &[name, value] : s.bindings) bindings[name] = to_json(value);
    step["bindings"] = bindings;
    steps.push_back(step);
  }
  j["steps"] = steps;
  return dump_canonical(j);
}

}  // namespace marvin
