#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "loadcast/arima/arima.hpp"
#include "loadcast/preprocess.hpp"
#include "loadcast/trainer.hpp"
#include "loadcast/workbench/synth.hpp"

namespace loadcast::workbench {

struct RunConfig {
    std::string input;                 // empty: use the synthetic profile
    std::string input_format = "wide";  // wide | long
    std::string zero_policy = "per_point";  // per_point | full_days
    SynthProfile synth;
    std::string model = "all";  // lstm | gru | arima | all
    int window = 6;
    SplitFractions split;
    TrainConfig train;
    int units = 140;
    double dropout = 0.4;
    int dense_units = 32;
    bool paper_faithful_split = true;
    bool paper_faithful_scales = false;
    bool strict_scaler = false;
    bool gap_respecting_windows = false;
    std::optional<arima::ArimaOrder> arima_order;  // empty: stepwise search
    std::string arima_search_slice = "train";       // train | full
    double mape_epsilon = 1e-8;
    std::uint64_t seed = 42;
    std::string output_dir;  // empty: derived from LOADCAST_OUTPUT_ROOT
    int plot_points = 300;

    void validate() const;
    bool runs(std::string_view model_name) const { return model == "all" || model == model_name; }
};

using Overrides = std::vector<std::pair<std::string, std::string>>;

// Every accepted key, in echo order.
const std::vector<std::string>& config_keys();

// Applies one key=value; unknown keys and unparsable values throw config errors.
void set_config_value(RunConfig& config, const std::string& key, const std::string& value);
std::string get_config_value(const RunConfig& config, const std::string& key);

// Reads a key=value document ('#' comments) or a JSON object as written by
// config_to_json, then applies `overrides` in order, then validates.
RunConfig parse_config(std::string_view document, const Overrides& overrides = {});
RunConfig parse_config_file(const std::string& path, const Overrides& overrides = {});

nlohmann::ordered_json config_to_json(const RunConfig& config);
std::string config_to_text(const RunConfig& config);

// output_dir if set, else $LOADCAST_OUTPUT_ROOT (or "runs") / run-<model>-seed<seed>.
std::string resolve_output_dir(const RunConfig& config);

}  // namespace loadcast::workbench
