#pragma once

#include <string>

#include <json.hpp>

#include "rptrees/boosting.hpp"
#include "rptrees/compression.hpp"
#include "rptrees/forest.hpp"

namespace rpt {

using json = nlohmann::json;

json to_json(const Tree& tree);
Tree tree_from_json(const json& j);

json to_json(const GrowthParams& p);
GrowthParams growth_params_from_json(const json& j);

json to_json(const Forest& forest);
Forest forest_from_json(const json& j);

json to_json(const ForestParams& p);
ForestParams forest_params_from_json(const json& j);

json to_json(const GBModel& model);
GBModel gb_model_from_json(const json& j);

json to_json(const BoostParams& p);
BoostParams boost_params_from_json(const json& j);

json to_json(const CompressedForest& model);
CompressedForest compressed_from_json(const json& j);

void save_json(const json& j, const std::string& path);
json load_json(const std::string& path);

// Dispatches on the "format" tag; every model container carries one.
enum class ModelKind { Tree, Forest, GB, Compressed };
ModelKind model_kind(const json& j);

}  // namespace rpt
