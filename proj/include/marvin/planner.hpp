#pragma once

// Pipeline composition by forward search over condition-flag states.

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "marvin/catalog_view.hpp"
#include "marvin/schema.hpp"

namespace marvin {

struct PipelineState {
  FlagSet holds;
  DataModality modality = DataModality::Tabular;

  bool operator==(const PipelineState &) const = default;
};

struct PipelineStep {
  std::string primitive_id;
  Version primitive_version;
  std::map<std::string, Value> bindings;

  bool operator==(const PipelineStep &) const = default;
};

struct Pipeline {
  std::string id;
  std::string dataset_id;
  std::string problem_id;
  std::vector<PipelineStep> steps;

  bool operator==(const Pipeline &) const = default;
};

Validated<Pipeline> parse_pipeline(std::string_view document);
std::string canonical_serialize(const Pipeline &pipeline);

bool applicable(const PrimitiveAnnotation &p, const PipelineState &s);

/// (holds - invalidates) + effects. Throws Error NOT_APPLICABLE.
PipelineState apply(const PrimitiveAnnotation &p, const PipelineState &s);

PrimitiveFamily task_family_map(TaskType t);

/// Families allowed before the final estimator.
bool is_interior_family(const PrimitiveFamily &f);

struct PlanOptions {
  std::size_t max_depth = 4;
  std::size_t k = 5;
};

struct PlanResult {
  std::vector<Pipeline> pipelines;
  /// Distinct flag states reached by the breadth-first reachability pass.
  std::size_t states_visited = 0;
};

/// Thrown by plan() when no pipeline of length <= max_depth exists. `unmet`
/// is the union, over every reached state and every candidate estimator,
/// of the estimator preconditions missing from that state.
class NoPipelineFound : public Error {
 public:
  NoPipelineFound(FlagSet unmet, std::size_t states_visited);

  const FlagSet &unmet() const noexcept { return unmet_; }
  std::size_t states_visited() const noexcept { return states_visited_; }

 private:
  FlagSet unmet_;
  std::size_t states_visited_;
};

/// Returns up to k complete pipelines ordered by (length, step ids). Interior
/// steps come from the data-preparation families, the last step is an
/// estimator of the problem's task family, no primitive repeats, and every
/// binding is the hyperparameter default.
///
/// Throws Error UNKNOWN_DATASET when the problem is posed over a different
/// dataset, BAD_REQUEST for zero k/max_depth, and NoPipelineFound.
PlanResult plan(const DatasetProfile &profile, const Problem &problem,
                const CatalogView &catalog, const PlanOptions &options = {});

struct PipelineCheck {
  enum class Status {
    Ok,
    Empty,
    ReferenceMismatch,
    UnknownPrimitive,
    NotApplicable,
    BadBinding,
    WrongFinalFamily,
  };

  Status status = Status::Ok;
  std::optional<std::size_t> step_index;
  FlagSet unmet;                    // NotApplicable
  bool modality_mismatch = false;   // NotApplicable
  std::vector<Violation> binding_violations;
  std::string detail;

  bool ok() const noexcept { return status == Status::Ok; }
};

std::string_view to_string(PipelineCheck::Status s);

/// Replays the pipeline from the profile's initial state and reports the
/// first failing step.
PipelineCheck validate_pipeline(const Pipeline &pipeline, const DatasetProfile &profile,
                                const Problem &problem, const CatalogView &catalog);

}  // namespace marvin
