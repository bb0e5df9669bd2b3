#pragma once

// JSON bridges for the document types. The canonical text form of every
// document is `dump_canonical(to_json(doc))`.

#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "marvin/schema.hpp"

namespace marvin {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

/// nullopt on malformed text.
std::optional<Json> parse_json(std::string_view text);

std::string dump_canonical(const OrderedJson &doc);

OrderedJson to_json(const Value &v);
OrderedJson to_json(const Hyperparameter &hp);
OrderedJson to_json(const PrimitiveAnnotation &ann);
OrderedJson to_json(const DatasetProfile &profile);
OrderedJson to_json(const Problem &problem);

/// Untyped conversion used for pipeline bindings: integers become int64,
/// other numbers double.
std::optional<Value> value_from_json(const Json &j);

Validated<PrimitiveAnnotation> annotation_from_json(const Json &doc);
Validated<DatasetProfile> dataset_from_json(const Json &doc);
Validated<Problem> problem_from_json(const Json &doc);

}  // namespace marvin
