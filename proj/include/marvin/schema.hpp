#pragma once

// Annotation data model: controlled vocabularies, primitive annotations,
// dataset profiles and problems, plus validation and canonical serialization
// of their JSON documents.

#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace marvin {

// ---------------------------------------------------------------------------
// Errors

/// One problem found while validating a document. `path` is a dotted /
/// indexed location inside the document, e.g. `hyperparameters[1].default`.
struct Violation {
  std::string code;
  std::string path;
  std::string reason;

  auto operator<=>(const Violation &) const = default;
};

std::string to_string(const Violation &v);

/// Error raised by catalog, planner and containerizer operations. `code`
/// mirrors the operation error names (NOT_FOUND, UNKNOWN_PRIMITIVE, ...).
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string &detail,
        std::vector<Violation> violations = {})
      : std::runtime_error(detail), code_(std::move(code)),
        violations_(std::move(violations)) {}

  const std::string &code() const noexcept { return code_; }
  const std::vector<Violation> &violations() const noexcept {
    return violations_;
  }

 private:
  std::string code_;
  std::vector<Violation> violations_;
};

/// Either a fully validated value or the complete list of violations.
/// Warnings (non-seed vocabulary terms) accompany a valid value.
template <typename T>
class Validated {
 public:
  Validated(T value, std::vector<Violation> warnings = {})
      : value_(std::move(value)), warnings_(std::move(warnings)) {}
  Validated(std::vector<Violation> violations)
      : violations_(std::move(violations)) {}

  bool ok() const noexcept { return value_.has_value(); }
  explicit operator bool() const noexcept { return ok(); }

  const T &value() const {
    if (!value_) throw Error("INVALID", "no value: document has violations",
                             violations_);
    return *value_;
  }
  T &value() {
    if (!value_) throw Error("INVALID", "no value: document has violations",
                             violations_);
    return *value_;
  }

  const std::vector<Violation> &violations() const noexcept {
    return violations_;
  }
  const std::vector<Violation> &warnings() const noexcept { return warnings_; }

 private:
  std::optional<T> value_;
  std::vector<Violation> violations_;
  std::vector<Violation> warnings_;
};

// ---------------------------------------------------------------------------
// Vocabulary terms

/// Strongly typed vocabulary term. All terms share the lexical rule
/// `[A-Z][A-Z0-9_]*`; vocabularies are open, seed sets are advisory.
template <typename Tag>
struct Term {
  std::string name;

  Term() = default;
  explicit Term(std::string n) : name(std::move(n)) {}

  auto operator<=>(const Term &) const = default;
};

struct ConditionFlagTag {};
struct AlgorithmTypeTag {};
struct PrimitiveFamilyTag {};

using ConditionFlag = Term<ConditionFlagTag>;
using AlgorithmType = Term<AlgorithmTypeTag>;
using PrimitiveFamily = Term<PrimitiveFamilyTag>;

using FlagSet = std::set<ConditionFlag>;

bool is_vocabulary_term(std::string_view s);

const std::vector<std::string> &seed_condition_flags();
const std::vector<std::string> &seed_algorithm_types();
const std::vector<std::string> &seed_primitive_families();

bool is_seed(const ConditionFlag &f);
bool is_seed(const AlgorithmType &a);
bool is_seed(const PrimitiveFamily &p);

// ---------------------------------------------------------------------------
// Closed enumerations

enum class DataModality { Tabular, Text, Image, Video, Timeseries, Graph, Audio };
enum class HyperparameterKind { Tunable, Resource, Metafeature };
enum class ValueType { Int, Float, Bool, Enum, String };
enum class TaskType { Classification, Regression, Clustering, TimeseriesForecasting, Ranking };
enum class Metric { Accuracy, F1, Rmse, Mae, Ndcg };

std::string_view to_string(DataModality m);
std::string_view to_string(HyperparameterKind k);
std::string_view to_string(ValueType t);
std::string_view to_string(TaskType t);
std::string_view to_string(Metric m);

std::optional<DataModality> parse_modality(std::string_view s);
std::optional<HyperparameterKind> parse_hyperparameter_kind(std::string_view s);
std::optional<ValueType> parse_value_type(std::string_view s);
std::optional<TaskType> parse_task_type(std::string_view s);
std::optional<Metric> parse_metric(std::string_view s);

const std::vector<DataModality> &all_modalities();
const std::vector<TaskType> &all_task_types();
const std::vector<Metric> &all_metrics();

/// Modalities sorted by their string names (the canonical set order).
struct ModalityNameLess {
  bool operator()(DataModality a, DataModality b) const {
    return to_string(a) < to_string(b);
  }
};
using ModalitySet = std::set<DataModality, ModalityNameLess>;

// ---------------------------------------------------------------------------
// Versions and values

/// Three-component numeric version, ordered component-wise.
struct Version {
  std::uint32_t major = 0;
  std::uint32_t minor = 0;
  std::uint32_t patch = 0;

  auto operator<=>(const Version &) const = default;
};

std::optional<Version> parse_version(std::string_view s);
std::string to_string(const Version &v);

/// Hyperparameter value. ENUM and STRING values are both strings.
using Value = std::variant<std::int64_t, double, bool, std::string>;

std::string to_string(const Value &v);

struct Range {
  Value lower;
  Value upper;

  bool operator==(const Range &) const = default;
};

struct Hyperparameter {
  std::string name;
  HyperparameterKind kind = HyperparameterKind::Tunable;
  ValueType value_type = ValueType::Float;
  std::optional<Range> range;
  std::vector<std::string> choices;
  Value default_value;

  bool operator==(const Hyperparameter &) const = default;
};

enum class BindingStatus { Ok, TypeMismatch, OutOfRange, NotAChoice };

std::string_view to_string(BindingStatus s);

/// Checks that `value` has the hyperparameter's type and lies inside its
/// range or choice list. INT values are accepted for FLOAT parameters.
BindingStatus check_binding(const Hyperparameter &hp, const Value &value);

// ---------------------------------------------------------------------------
// Documents

struct PrimitiveAnnotation {
  std::string id;
  std::string name;
  Version version;
  std::string description;
  std::vector<std::string> languages;
  std::vector<AlgorithmType> algorithm_types;
  PrimitiveFamily primitive_family;
  std::vector<Hyperparameter> hyperparameters;
  FlagSet preconditions;
  FlagSet effects;
  FlagSet invalidates;
  ModalitySet modalities;  // empty: modality-agnostic

  bool operator==(const PrimitiveAnnotation &) const = default;

  const Hyperparameter *find_hyperparameter(std::string_view hp_name) const;
};

struct DatasetProfile {
  std::string id;
  std::string name;
  DataModality modality = DataModality::Tabular;
  FlagSet holds;
  std::optional<std::uint64_t> rows;
  std::optional<std::uint64_t> columns;

  bool operator==(const DatasetProfile &) const = default;
};

struct Problem {
  std::string id;
  TaskType task_type = TaskType::Classification;
  std::string dataset_id;
  Metric metric = Metric::Accuracy;

  bool operator==(const Problem &) const = default;
};

/// `[a-z0-9_]+(\.[a-z0-9_]+)*`
bool is_document_id(std::string_view s);

/// Parses and validates a primitive annotation document. Returns every
/// violation found; never a partially built annotation.
Validated<PrimitiveAnnotation> parse_annotation(std::string_view document);
Validated<DatasetProfile> parse_dataset(std::string_view document);
Validated<Problem> parse_problem(std::string_view document);

/// Deterministic text: fixed key order, sets sorted, 2-space indentation,
/// trailing newline.
std::string canonical_serialize(const PrimitiveAnnotation &ann);
std::string canonical_serialize(const DatasetProfile &profile);
std::string canonical_serialize(const Problem &problem);

}  // namespace marvin
