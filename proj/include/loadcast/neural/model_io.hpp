#pragma once

#include <string>

#include <json.hpp>

#include "loadcast/neural/network.hpp"
#include "loadcast/preprocess.hpp"

namespace loadcast::neural {

inline constexpr int kModelFormatVersion = 1;

struct SavedModel {
    NetworkSpec spec;
    NetworkParams<double> params;
    ScalerParams scaler;
    nlohmann::json metadata = nlohmann::json::object();
};

nlohmann::json spec_to_json(const NetworkSpec& spec);
NetworkSpec spec_from_json(const nlohmann::json& j);

// Versioned model document: spec, every weight block in row-major order,
// the scaler used to normalise inputs, and free-form metadata.
nlohmann::json model_to_json(const SavedModel& model);
SavedModel model_from_json(const nlohmann::json& j);

void save_model(const std::string& path, const SavedModel& model);
SavedModel load_model(const std::string& path);

}  // namespace loadcast::neural
