#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "loadcast/arima/stepwise.hpp"
#include "loadcast/eval.hpp"
#include "loadcast/meter_ingest.hpp"
#include "loadcast/preprocess.hpp"
#include "loadcast/trainer.hpp"
#include "loadcast/workbench/config.hpp"

namespace loadcast::workbench {

using LogFn = std::function<void(const std::string&)>;

// Cleaned series plus its scaled, windowed and split views.
struct PreparedData {
    MeterSeries series;
    std::size_t dropped_zero_points = 0;
    std::vector<double> values;  // kWh
    ScalerParams scaler;
    std::vector<double> normalized;
    SupervisedDataset windows;
    SplitDataset split;
};

// Reads config.input (wide or long CSV) or generates the synthetic profile
// with config.seed, then drops zero readings per config.zero_policy.
MeterSeries load_series(const RunConfig& config, std::size_t* dropped = nullptr);
PreparedData prepare_data(const RunConfig& config);
PreparedData prepare_data(const RunConfig& config, MeterSeries series, std::size_t dropped = 0);

struct PredictionTable {
    std::vector<std::size_t> index;  // position in the cleaned series
    std::vector<std::string> timestamp;
    std::vector<double> actual;
    std::vector<double> predicted;
};

// Header "index,timestamp,actual,predicted"; values in shortest round-trip form.
std::string write_predictions_csv(const PredictionTable& table);
PredictionTable parse_predictions_csv(std::string_view text);

struct NeuralOutcome {
    std::string name;  // "lstm" | "gru"
    TrainResult result;
};

struct ArimaOutcome {
    std::optional<arima::SearchResult> search;
    arima::AdfResult adf;
    arima::ArimaFit fit;
    std::size_t train_end = 0;  // raw-series split boundaries
    std::size_t val_end = 0;
};

struct PipelineResult {
    std::string run_dir;
    PreparedData data;
    std::vector<NeuralOutcome> neural;
    std::optional<ArimaOutcome> arima;
    ComparisonTable table;  // test split
    nlohmann::ordered_json metrics;
};

// ingest -> clean -> normalize -> window -> split -> train/predict for the
// neural models and ADF -> order search -> fit -> predict for ARIMA, then
// scores every model on the test split from the stored prediction files.
// A failing stage leaves an INCOMPLETE marker naming it in the run directory.
PipelineResult run_pipeline(const RunConfig& config, const LogFn& log = {});

// One run per window under <output>/window-<w>, plus sweep.csv there.
std::vector<PipelineResult> run_window_sweep(const RunConfig& config, const std::vector<int>& windows,
                                             const LogFn& log = {});

}  // namespace loadcast::workbench
