#pragma once

// JSON encoders shared by the persistence layers. Private to the core library.

#include <nlohmann/json.hpp>
#include <string>
#include <string_view>

#include "bolt/data.hpp"
#include "bolt/loop.hpp"
#include "bolt/models.hpp"
#include "bolt/rules.hpp"
#include "bolt/error.hpp"
#include "bolt/spaces.hpp"

namespace bolt::json_io {

using Json = nlohmann::json;

Json to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j, std::size_t expected_cols, const std::string& field);
// Infers the column count from the first row; `cols_if_empty` is used for [].
Matrix matrix_from_json(const Json& j, const std::string& field, std::size_t cols_if_empty = 0);

Json to_json(const Vector& v);
Vector vector_from_json(const Json& j, const std::string& field);

Json to_json(const BoxSpace& space);
BoxSpace space_from_json(const Json& j, const std::string& field = "space");

Json to_json(const Dataset& ds);
Dataset dataset_from_json(const Json& j, const std::string& field);

Json to_json(const TaggedDatasets& ds);
TaggedDatasets tagged_from_json(const Json& j, const std::string& field = "datasets");

Json to_json(const GPHyperparameters& hp);
GPHyperparameters hyperparameters_from_json(const Json& j, const std::string& field);

Json to_json(const TrustRegionState& s);
TrustRegionState trust_region_from_json(const Json& j, const std::string& field);

Json to_json(const AcquisitionSpec& spec);
AcquisitionSpec acquisition_from_json(const Json& j, const std::string& field = "acquisition");

Json to_json(const RuleConfig& rule);
RuleConfig rule_from_json(const Json& j, const std::string& field = "rule");

// Space, rule, tags, initial design and seed. Fit settings stay at their defaults.
Json to_json(const LoopConfig& config);
LoopConfig loop_config_from_json(const Json& j, const std::string& field = "config");

Json parse(std::string_view payload);
std::string dump(const Json& j);

double number(const Json& j, const std::string& field);
std::uint64_t unsigned_integer(const Json& j, const std::string& field);
std::string string(const Json& j, const std::string& field);
const Json& member(const Json& j, const char* key, const std::string& field);

}  // namespace bolt::json_io
