#include "marvin/schema.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "marvin/json_io.hpp"

namespace marvin {

namespace {

template <typename E, std::size_t N>
std::optional<E> lookup(const std::array<std::pair<E, std::string_view>, N> &table,
                        std::string_view s) {
  for (const auto &[e, name] : table)
    if (name == s) return e;
  return std::nullopt;
}

template <typename E, std::size_t N>
std::string_view name_of(const std::array<std::pair<E, std::string_view>, N> &table,
                         E e) {
  for (const auto &[v, name] : table)
    if (v == e) return name;
  return "?";
}

constexpr std::array<std::pair<DataModality, std::string_view>, 7> kModalities{{
    {DataModality::Tabular, "TABULAR"},
    {DataModality::Text, "TEXT"},
    {DataModality::Image, "IMAGE"},
    {DataModality::Video, "VIDEO"},
    {DataModality::Timeseries, "TIMESERIES"},
    {DataModality::Graph, "GRAPH"},
    {DataModality::Audio, "AUDIO"},
}};

constexpr std::array<std::pair<HyperparameterKind, std::string_view>, 3> kKinds{{
    {HyperparameterKind::Tunable, "TUNABLE"},
    {HyperparameterKind::Resource, "RESOURCE"},
    {HyperparameterKind::Metafeature, "METAFEATURE"},
}};

constexpr std::array<std::pair<ValueType, std::string_view>, 5> kValueTypes{{
    {ValueType::Int, "INT"},
    {ValueType::Float, "FLOAT"},
    {ValueType::Bool, "BOOL"},
    {ValueType::Enum, "ENUM"},
    {ValueType::String, "STRING"},
}};

constexpr std::array<std::pair<TaskType, std::string_view>, 5> kTaskTypes{{
    {TaskType::Classification, "CLASSIFICATION"},
    {TaskType::Regression, "REGRESSION"},
    {TaskType::Clustering, "CLUSTERING"},
    {TaskType::TimeseriesForecasting, "TIMESERIES_FORECASTING"},
    {TaskType::Ranking, "RANKING"},
}};

constexpr std::array<std::pair<Metric, std::string_view>, 5> kMetrics{{
    {Metric::Accuracy, "ACCURACY"},
    {Metric::F1, "F1"},
    {Metric::Rmse, "RMSE"},
    {Metric::Mae, "MAE"},
    {Metric::Ndcg, "NDCG"},
}};

bool is_lower_segment_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
}

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  auto alpha = [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
  };
  if (!alpha(s.front())) return false;
  return std::all_of(s.begin(), s.end(), [&](char c) {
    return alpha(c) || (c >= '0' && c <= '9');
  });
}

bool contains(const std::vector<std::string> &v, std::string_view s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

// Collects violations and warnings while walking one document.
class Checker {
 public:
  void error(std::string code, std::string path, std::string reason) {
    errors.push_back({std::move(code), std::move(path), std::move(reason)});
  }
  void bad(std::string path, std::string reason) {
    error("BAD_VALUE", std::move(path), std::move(reason));
  }
  void warn(std::string path, std::string reason) {
    warnings.push_back({"NON_SEED_TERM", std::move(path), std::move(reason)});
  }

  // Fails on any key outside `allowed`.
  void only_keys(const Json &obj, std::initializer_list<std::string_view> allowed,
                 const std::string &prefix) {
    for (const auto &item : obj.items()) {
      if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end())
        bad(prefix + item.key(), "unknown field");
    }
  }

  const Json *field(const Json &obj, std::string_view key, bool required,
                    const std::string &path) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) {
      if (required) error("MISSING_FIELD", path, "required field is absent");
      return nullptr;
    }
    return &*it;
  }

  std::optional<std::string> string_field(const Json &obj, std::string_view key,
                                          bool required, const std::string &path) {
    const Json *j = field(obj, key, required, path);
    if (!j) return required ? std::nullopt : std::optional<std::string>("");
    if (!j->is_string()) {
      bad(path, "expected a string");
      return std::nullopt;
    }
    return j->get<std::string>();
  }

  std::optional<std::string> id_field(const Json &obj, std::string_view key,
                                      const std::string &path) {
    auto s = string_field(obj, key, true, path);
    if (s && !is_document_id(*s)) {
      bad(path, "expected dotted lowercase identifier");
      return std::nullopt;
    }
    return s;
  }

  template <typename TermT>
  std::optional<TermT> term(const Json &j, const std::string &path) {
    if (!j.is_string()) {
      bad(path, "expected a vocabulary term string");
      return std::nullopt;
    }
    auto s = j.get<std::string>();
    if (!is_vocabulary_term(s)) {
      bad(path, "term must match [A-Z][A-Z0-9_]*");
      return std::nullopt;
    }
    TermT t{s};
    if (!is_seed(t)) warn(path, "term '" + s + "' is not in the seed vocabulary");
    return t;
  }

  std::optional<FlagSet> flag_set(const Json &obj, std::string_view key,
                                  const std::string &path) {
    const Json *j = field(obj, key, false, path);
    if (!j) return FlagSet{};
    if (!j->is_array()) {
      bad(path, "expected a list of condition flags");
      return std::nullopt;
    }
    FlagSet out;
    bool good = true;
    for (std::size_t i = 0; i < j->size(); ++i) {
      auto f = term<ConditionFlag>((*j)[i], path + "[" + std::to_string(i) + "]");
      if (f) out.insert(*f);
      else good = false;
    }
    if (!good) return std::nullopt;
    return out;
  }

  template <typename E>
  std::optional<E> enum_field(const Json &obj, std::string_view key,
                              const std::string &path,
                              std::optional<E> (*parser)(std::string_view)) {
    const Json *j = field(obj, key, true, path);
    if (!j) return std::nullopt;
    if (!j->is_string()) {
      bad(path, "expected a string");
      return std::nullopt;
    }
    auto e = parser(j->get<std::string>());
    if (!e) bad(path, "unknown value '" + j->get<std::string>() + "'");
    return e;
  }

  std::optional<std::uint64_t> count_field(const Json &obj, std::string_view key,
                                           const std::string &path, bool &good) {
    const Json *j = field(obj, key, false, path);
    if (!j) return std::nullopt;
    if (j->is_number_unsigned()) return j->get<std::uint64_t>();
    if (j->is_number_integer() && j->get<std::int64_t>() >= 0)
      return static_cast<std::uint64_t>(j->get<std::int64_t>());
    bad(path, "expected a non-negative integer");
    good = false;
    return std::nullopt;
  }

  std::vector<Violation> errors;
  std::vector<Violation> warnings;
};

// Reads a JSON value as the given value type. Integers widen to FLOAT.
std::optional<Value> typed_value(const Json &j, ValueType t) {
  switch (t) {
    case ValueType::Int:
      if (j.is_number_unsigned()) {
        auto u = j.get<std::uint64_t>();
        if (u > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max()))
          return std::nullopt;
        return Value{static_cast<std::int64_t>(u)};
      }
      if (j.is_number_integer()) return Value{j.get<std::int64_t>()};
      return std::nullopt;
    case ValueType::Float:
      if (j.is_number()) return Value{j.get<double>()};
      return std::nullopt;
    case ValueType::Bool:
      if (j.is_boolean()) return Value{j.get<bool>()};
      return std::nullopt;
    case ValueType::Enum:
    case ValueType::String:
      if (j.is_string()) return Value{j.get<std::string>()};
      return std::nullopt;
  }
  return std::nullopt;
}

std::optional<Hyperparameter> read_hyperparameter(const Json &j,
                                                  const std::string &path,
                                                  Checker &c) {
  if (!j.is_object()) {
    c.bad(path, "expected an object");
    return std::nullopt;
  }
  const std::size_t before = c.errors.size();
  c.only_keys(j, {"name", "kind", "value_type", "range", "choices", "default"},
              path + ".");
  Hyperparameter hp;
  auto name = c.string_field(j, "name", true, path + ".name");
  if (name && !is_identifier(*name)) c.bad(path + ".name", "expected an identifier");
  if (name) hp.name = *name;
  auto kind = c.enum_field<HyperparameterKind>(j, "kind", path + ".kind",
                                               parse_hyperparameter_kind);
  auto type = c.enum_field<ValueType>(j, "value_type", path + ".value_type",
                                      parse_value_type);
  if (kind) hp.kind = *kind;
  if (type) hp.value_type = *type;

  const bool numeric = type && (*type == ValueType::Int || *type == ValueType::Float);
  if (const Json *r = c.field(j, "range", false, path + ".range")) {
    if (type && !numeric) {
      c.bad(path + ".range", "range applies to INT and FLOAT only");
    } else if (!r->is_array() || r->size() != 2) {
      c.bad(path + ".range", "expected [lower, upper]");
    } else if (type) {
      auto lo = typed_value((*r)[0], *type);
      auto hi = typed_value((*r)[1], *type);
      if (!lo || !hi) {
        c.bad(path + ".range", "bounds must have the hyperparameter's value type");
      } else {
        hp.range = Range{*lo, *hi};
        bool ordered = *type == ValueType::Int
                           ? std::get<std::int64_t>(*lo) <= std::get<std::int64_t>(*hi)
                           : std::get<double>(*lo) <= std::get<double>(*hi);
        if (!ordered) c.bad(path + ".range", "lower exceeds upper");
      }
    }
  }

  if (const Json *ch = c.field(j, "choices", false, path + ".choices")) {
    if (type && *type != ValueType::Enum) {
      c.bad(path + ".choices", "choices apply to ENUM only");
    } else if (!ch->is_array()) {
      c.bad(path + ".choices", "expected a list of strings");
    } else {
      for (std::size_t i = 0; i < ch->size(); ++i) {
        const auto &v = (*ch)[i];
        std::string p = path + ".choices[" + std::to_string(i) + "]";
        if (!v.is_string()) c.bad(p, "expected a string");
        else if (contains(hp.choices, v.get<std::string>())) c.bad(p, "duplicate choice");
        else hp.choices.push_back(v.get<std::string>());
      }
    }
  }
  if (type && *type == ValueType::Enum && hp.choices.empty())
    c.bad(path + ".choices", "ENUM requires a non-empty choice list");

  if (const Json *d = c.field(j, "default", true, path + ".default"); d && type) {
    auto v = typed_value(*d, *type);
    if (!v) {
      c.bad(path + ".default", "default does not have the declared value type");
    } else {
      hp.default_value = *v;
      if (c.errors.size() == before) {
        auto status = check_binding(hp, hp.default_value);
        if (status != BindingStatus::Ok)
          c.bad(path + ".default", "default rejected: " + std::string(to_string(status)));
      }
    }
  }
  if (c.errors.size() != before) return std::nullopt;
  return hp;
}

std::optional<Json> document_root(std::string_view text, Checker &c) {
  auto j = parse_json(text);
  if (!j) {
    c.error("MALFORMED_DOCUMENT", "", "document is not valid JSON");
    return std::nullopt;
  }
  if (!j->is_object()) {
    c.error("MALFORMED_DOCUMENT", "", "document root must be an object");
    return std::nullopt;
  }
  return j;
}

template <typename T>
Validated<T> finish(std::optional<T> value, Checker &c) {
  if (!c.errors.empty()) {
    std::sort(c.errors.begin(), c.errors.end());
    c.errors.erase(std::unique(c.errors.begin(), c.errors.end()), c.errors.end());
    return Validated<T>(std::move(c.errors));
  }
  std::sort(c.warnings.begin(), c.warnings.end());
  return Validated<T>(std::move(*value), std::move(c.warnings));
}

OrderedJson flags_json(const FlagSet &flags) {
  OrderedJson arr = OrderedJson::array();
  for (const auto &f : flags) arr.push_back(f.name);
  return arr;
}

}  // namespace

// ---------------------------------------------------------------------------

std::string to_string(const Violation &v) {
  std::string out = v.code;
  if (!v.path.empty()) out += "(" + v.path + ")";
  if (!v.reason.empty()) out += ": " + v.reason;
  return out;
}

bool is_vocabulary_term(std::string_view s) {
  if (s.empty() || !(s.front() >= 'A' && s.front() <= 'Z')) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
  });
}

const std::vector<std::string> &seed_condition_flags() {
  static const std::vector<std::string> v{"NO_CATEGORICAL_VALUES", "NO_CONTINUOUS_VALUES",
                                          "NO_JAGGED_VALUES", "NO_MISSING_VALUES"};
  return v;
}

const std::vector<std::string> &seed_algorithm_types() {
  static const std::vector<std::string> v{"ADABOOST", "BAYESIAN_LINEAR_REGRESSION",
                                          "DECISION_TREE"};
  return v;
}

const std::vector<std::string> &seed_primitive_families() {
  static const std::vector<std::string> v{
      "CLASSIFICATION",      "CLUSTERING", "DATA_CLEANING",          "DATA_TRANSFORMATION",
      "FEATURE_SELECTION",   "RANKING",    "REGRESSION",             "TIMESERIES_FORECASTING"};
  return v;
}

bool is_seed(const ConditionFlag &f) { return contains(seed_condition_flags(), f.name); }
bool is_seed(const AlgorithmType &a) { return contains(seed_algorithm_types(), a.name); }
bool is_seed(const PrimitiveFamily &p) { return contains(seed_primitive_families(), p.name); }

std::string_view to_string(DataModality m) { return name_of(kModalities, m); }
std::string_view to_string(HyperparameterKind k) { return name_of(kKinds, k); }
std::string_view to_string(ValueType t) { return name_of(kValueTypes, t); }
std::string_view to_string(TaskType t) { return name_of(kTaskTypes, t); }
std::string_view to_string(Metric m) { return name_of(kMetrics, m); }

std::optional<DataModality> parse_modality(std::string_view s) { return lookup(kModalities, s); }
std::optional<HyperparameterKind> parse_hyperparameter_kind(std::string_view s) {
  return lookup(kKinds, s);
}
std::optional<ValueType> parse_value_type(std::string_view s) { return lookup(kValueTypes, s); }
std::optional<TaskType> parse_task_type(std::string_view s) { return lookup(kTaskTypes, s); }
std::optional<Metric> parse_metric(std::string_view s) { return lookup(kMetrics, s); }

const std::vector<DataModality> &all_modalities() {
  static const std::vector<DataModality> v = [] {
    std::vector<DataModality> out;
    for (const auto &[m, _] : kModalities) out.push_back(m);
    return out;
  }();
  return v;
}

const std::vector<TaskType> &all_task_types() {
  static const std::vector<TaskType> v = [] {
    std::vector<TaskType> out;
    for (const auto &[t, _] : kTaskTypes) out.push_back(t);
    return out;
  }();
  return v;
}

const std::vector<Metric> &all_metrics() {
  static const std::vector<Metric> v = [] {
    std::vector<Metric> out;
    for (const auto &[m, _] : kMetrics) out.push_back(m);
    return out;
  }();
  return v;
}

std::optional<Version> parse_version(std::string_view s) {
  std::array<std::uint32_t, 3> parts{};
  std::size_t pos = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    std::size_t end = s.find('.', pos);
    if (i < 2 && end == std::string_view::npos) return std::nullopt;
    if (i == 2) end = s.size();
    auto piece = s.substr(pos, end - pos);
    if (piece.empty() || (piece.size() > 1 && piece.front() == '0')) return std::nullopt;
    auto [ptr, ec] = std::from_chars(piece.data(), piece.data() + piece.size(), parts[i]);
    if (ec != std::errc{} || ptr != piece.data() + piece.size()) return std::nullopt;
    pos = end + 1;
  }
  return Version{parts[0], parts[1], parts[2]};
}

std::string to_string(const Version &v) {
  return std::to_string(v.major) + "." + std::to_string(v.minor) + "." +
         std::to_string(v.patch);
}

std::string to_string(const Value &v) {
  return std::visit(
      [](const auto &x) -> std::string {
        using X = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<X, std::string>) return x;
        else if constexpr (std::is_same_v<X, bool>) return x ? "true" : "false";
        else if constexpr (std::is_same_v<X, double>) return to_json(Value{x}).dump();
        else return std::to_string(x);
      },
      v);
}

std::string_view to_string(BindingStatus s) {
  switch (s) {
    case BindingStatus::Ok: return "OK";
    case BindingStatus::TypeMismatch: return "TYPE_MISMATCH";
    case BindingStatus::OutOfRange: return "OUT_OF_RANGE";
    case BindingStatus::NotAChoice: return "NOT_A_CHOICE";
  }
  return "?";
}

BindingStatus check_binding(const Hyperparameter &hp, const Value &value) {
  switch (hp.value_type) {
    case ValueType::Int: {
      const auto *i = std::get_if<std::int64_t>(&value);
      if (!i) return BindingStatus::TypeMismatch;
      if (hp.range && (*i < std::get<std::int64_t>(hp.range->lower) ||
                       *i > std::get<std::int64_t>(hp.range->upper)))
        return BindingStatus::OutOfRange;
      return BindingStatus::Ok;
    }
    case ValueType::Float: {
      double d;
      if (const auto *f = std::get_if<double>(&value)) d = *f;
      else if (const auto *i = std::get_if<std::int64_t>(&value)) d = static_cast<double>(*i);
      else return BindingStatus::TypeMismatch;
      if (hp.range && !(d >= std::get<double>(hp.range->lower) &&
                        d <= std::get<double>(hp.range->upper)))
        return BindingStatus::OutOfRange;
      return BindingStatus::Ok;
    }
    case ValueType::Bool:
      return std::holds_alternative<bool>(value) ? BindingStatus::Ok
                                                 : BindingStatus::TypeMismatch;
    case ValueType::Enum: {
      const auto *s = std::get_if<std::string>(&value);
      if (!s) return BindingStatus::TypeMismatch;
      return contains(hp.choices, *s) ? BindingStatus::Ok : BindingStatus::NotAChoice;
    }
    case ValueType::String:
      return std::holds_alternative<std::string>(value) ? BindingStatus::Ok
                                                        : BindingStatus::TypeMismatch;
  }
  return BindingStatus::TypeMismatch;
}

const Hyperparameter *PrimitiveAnnotation::find_hyperparameter(std::string_view hp_name) const {
  for (const auto &hp : hyperparameters)
    if (hp.name == hp_name) return &hp;
  return nullptr;
}

bool is_document_id(std::string_view s) {
  if (s.empty() || s.front() == '.' || s.back() == '.') return false;
  char prev = 0;
  for (char c : s) {
    if (c == '.') {
      if (prev == '.') return false;
    } else if (!is_lower_segment_char(c)) {
      return false;
    }
    prev = c;
  }
  return true;
}

// ---------------------------------------------------------------------------
// JSON

std::optional<Json> parse_json(std::string_view text) {
  Json j = Json::parse(text.begin(), text.end(), nullptr, false);
  if (j.is_discarded()) return std::nullopt;
  return j;
}

std::string dump_canonical(const OrderedJson &doc) { return doc.dump(2) + "\n"; }

OrderedJson to_json(const Value &v) {
  return std::visit([](const auto &x) { return OrderedJson(x); }, v);
}

OrderedJson to_json(const Hyperparameter &hp) {
  OrderedJson j;
  j["name"] = hp.name;
  j["kind"] = to_string(hp.kind);
  j["value_type"] = to_string(hp.value_type);
  if (hp.range) j["range"] = OrderedJson::array({to_json(hp.range->lower), to_json(hp.range->upper)});
  if (hp.value_type == ValueType::Enum) j["choices"] = hp.choices;
  j["default"] = to_json(hp.default_value);
  return j;
}

OrderedJson to_json(const PrimitiveAnnotation &ann) {
  OrderedJson j;
  j["id"] = ann.id;
  j["name"] = ann.name;
  j["version"] = to_string(ann.version);
  j["description"] = ann.description;
  j["languages"] = ann.languages;
  OrderedJson algos = OrderedJson::array();
  for (const auto &a : ann.algorithm_types) algos.push_back(a.name);
  j["algorithm_types"] = algos;
  j["primitive_family"] = ann.primitive_family.name;
  OrderedJson hps = OrderedJson::array();
  for (const auto &hp : ann.hyperparameters) hps.push_back(to_json(hp));
  j["hyperparameters"] = hps;
  j["preconditions"] = flags_json(ann.preconditions);
  j["effects"] = flags_json(ann.effects);
  j["invalidates"] = flags_json(ann.invalidates);
  OrderedJson mods = OrderedJson::array();
  for (auto m : ann.modalities) mods.push_back(to_string(m));
  j["modalities"] = mods;
  return j;
}

OrderedJson to_json(const DatasetProfile &profile) {
  OrderedJson j;
  j["id"] = profile.id;
  j["name"] = profile.name;
  j["modality"] = to_string(profile.modality);
  j["holds"] = flags_json(profile.holds);
  if (profile.rows) j["rows"] = *profile.rows;
  if (profile.columns) j["columns"] = *profile.columns;
  return j;
}

OrderedJson to_json(const Problem &problem) {
  OrderedJson j;
  j["id"] = problem.id;
  j["task_type"] = to_string(problem.task_type);
  j["dataset_id"] = problem.dataset_id;
  j["metric"] = to_string(problem.metric);
  return j;
}

std::optional<Value> value_from_json(const Json &j) {
  if (j.is_boolean()) return Value{j.get<bool>()};
  if (j.is_number_integer()) return typed_value(j, ValueType::Int);
  if (j.is_number_float()) return Value{j.get<double>()};
  if (j.is_string()) return Value{j.get<std::string>()};
  return std::nullopt;
}

Validated<PrimitiveAnnotation> annotation_from_json(const Json &doc) {
  Checker c;
  if (!doc.is_object()) {
    c.error("MALFORMED_DOCUMENT", "", "document root must be an object");
    return finish<PrimitiveAnnotation>(std::nullopt, c);
  }
  c.only_keys(doc,
              {"id", "name", "version", "description", "languages", "algorithm_types",
               "primitive_family", "hyperparameters", "preconditions", "effects",
               "invalidates", "modalities"},
              "");

  PrimitiveAnnotation ann;
  if (auto id = c.id_field(doc, "id", "id")) ann.id = *id;
  if (auto name = c.string_field(doc, "name", true, "name")) ann.name = *name;
  if (auto v = c.string_field(doc, "version", true, "version")) {
    if (auto parsed = parse_version(*v)) ann.version = *parsed;
    else c.bad("version", "expected X.Y.Z with numeric components");
  }
  if (auto d = c.string_field(doc, "description", false, "description")) ann.description = *d;

  if (const Json *langs = c.field(doc, "languages", false, "languages")) {
    if (!langs->is_array()) {
      c.bad("languages", "expected a list of strings");
    } else {
      for (std::size_t i = 0; i < langs->size(); ++i) {
        const auto &l = (*langs)[i];
        std::string p = "languages[" + std::to_string(i) + "]";
        if (!l.is_string() || l.get<std::string>().empty()) c.bad(p, "expected a non-empty string");
        else if (contains(ann.languages, l.get<std::string>())) c.bad(p, "duplicate language");
        else ann.languages.push_back(l.get<std::string>());
      }
    }
  }

  if (const Json *algos = c.field(doc, "algorithm_types", true, "algorithm_types")) {
    if (!algos->is_array() || algos->empty()) {
      c.bad("algorithm_types", "expected a non-empty list");
    } else {
      for (std::size_t i = 0; i < algos->size(); ++i) {
        std::string p = "algorithm_types[" + std::to_string(i) + "]";
        auto a = c.term<AlgorithmType>((*algos)[i], p);
        if (!a) continue;
        if (std::find(ann.algorithm_types.begin(), ann.algorithm_types.end(), *a) !=
            ann.algorithm_types.end())
          c.bad(p, "duplicate algorithm type");
        else
          ann.algorithm_types.push_back(*a);
      }
    }
  }

  if (const Json *fam = c.field(doc, "primitive_family", true, "primitive_family")) {
    if (fam->is_array()) c.bad("primitive_family", "exactly one family is required");
    else if (auto f = c.term<PrimitiveFamily>(*fam, "primitive_family")) ann.primitive_family = *f;
  }

  if (const Json *hps = c.field(doc, "hyperparameters", false, "hyperparameters")) {
    if (!hps->is_array()) {
      c.bad("hyperparameters", "expected a list");
    } else {
      std::set<std::string> seen;
      for (std::size_t i = 0; i < hps->size(); ++i) {
        std::string p = "hyperparameters[" + std::to_string(i) + "]";
        auto hp = read_hyperparameter((*hps)[i], p, c);
        if (!hp) continue;
        if (!seen.insert(hp->name).second) c.bad(p + ".name", "duplicate hyperparameter name");
        else ann.hyperparameters.push_back(std::move(*hp));
      }
    }
  }

  auto pre = c.flag_set(doc, "preconditions", "preconditions");
  auto eff = c.flag_set(doc, "effects", "effects");
  auto inv = c.flag_set(doc, "invalidates", "invalidates");
  if (pre) ann.preconditions = *pre;
  if (eff) ann.effects = *eff;
  if (inv) ann.invalidates = *inv;
  if (eff && inv) {
    std::vector<std::string> both;
    for (const auto &f : *eff)
      if (inv->count(f)) both.push_back(f.name);
    if (!both.empty()) {
      std::string list;
      for (const auto &b : both) list += (list.empty() ? "" : ", ") + b;
      c.error("CONTRADICTORY_EFFECTS", "effects", "flags both established and invalidated: " + list);
    }
  }

  if (const Json *mods = c.field(doc, "modalities", false, "modalities")) {
    if (!mods->is_array()) {
      c.bad("modalities", "expected a list");
    } else {
      for (std::size_t i = 0; i < mods->size(); ++i) {
        const auto &m = (*mods)[i];
        std::string p = "modalities[" + std::to_string(i) + "]";
        auto parsed = m.is_string() ? parse_modality(m.get<std::string>()) : std::nullopt;
        if (!parsed) c.bad(p, "unknown modality");
        else ann.modalities.insert(*parsed);
      }
    }
  }
  return finish<PrimitiveAnnotation>(std::move(ann), c);
}

Validated<DatasetProfile> dataset_from_json(const Json &doc) {
  Checker c;
  if (!doc.is_object()) {
    c.error("MALFORMED_DOCUMENT", "", "document root must be an object");
    return finish<DatasetProfile>(std::nullopt, c);
  }
  c.only_keys(doc, {"id", "name", "modality", "holds", "rows", "columns"}, "");
  DatasetProfile p;
  if (auto id = c.id_field(doc, "id", "id")) p.id = *id;
  if (auto name = c.string_field(doc, "name", true, "name")) p.name = *name;
  if (auto m = c.enum_field<DataModality>(doc, "modality", "modality", parse_modality))
    p.modality = *m;
  if (auto holds = c.flag_set(doc, "holds", "holds")) p.holds = *holds;
  bool good = true;
  p.rows = c.count_field(doc, "rows", "rows", good);
  p.columns = c.count_field(doc, "columns", "columns", good);
  return finish<DatasetProfile>(std::move(p), c);
}

Validated<Problem> problem_from_json(const Json &doc) {
  Checker c;
  if (!doc.is_object()) {
    c.error("MALFORMED_DOCUMENT", "", "document root must be an object");
    return finish<Problem>(std::nullopt, c);
  }
  c.only_keys(doc, {"id", "task_type", "dataset_id", "metric"}, "");
  Problem p;
  if (auto id = c.id_field(doc, "id", "id")) p.id = *id;
  if (auto t = c.enum_field<TaskType>(doc, "task_type", "task_type", parse_task_type))
    p.task_type = *t;
  if (auto d = c.id_field(doc, "dataset_id", "dataset_id")) p.dataset_id = *d;
  if (auto m = c.enum_field<Metric>(doc, "metric", "metric", parse_metric)) p.metric = *m;
  return finish<Problem>(std::move(p), c);
}

Validated<PrimitiveAnnotation> parse_annotation(std::string_view document) {
  Checker c;
  auto root = document_root(document, c);
  if (!root) return finish<PrimitiveAnnotation>(std::nullopt, c);
  return annotation_from_json(*root);
}

Validated<DatasetProfile> parse_dataset(std::string_view document) {
  Checker c;
  auto root = document_root(document, c);
  if (!root) return finish<DatasetProfile>(std::nullopt, c);
  return dataset_from_json(*root);
}

Validated<Problem> parse_problem(std::string_view document) {
  Checker c;
  auto root = document_root(document, c);
  if (!root) return finish<Problem>(std::nullopt, c);
  return problem_from_json(*root);
}

std::string canonical_serialize(const PrimitiveAnnotation &ann) {
  return dump_canonical(to_json(ann));
}
std::string canonical_serialize(const DatasetProfile &profile) {
  return dump_canonical(to_json(profile));
}
std::string canonical_serialize(const Problem &problem) {
  return dump_canonical(to_json(problem));
}

}  // namespace marvin
