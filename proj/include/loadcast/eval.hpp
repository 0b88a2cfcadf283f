#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "loadcast/preprocess.hpp"

namespace loadcast {

inline constexpr double kDefaultMapeEpsilon = 1e-8;

struct EvalReport {
    double mse = 0.0;
    double rmse = 0.0;
    std::optional<double> r2;  // empty when the actuals have zero variance
    double mae = 0.0;
    double mape = 0.0;  // fraction, not percent
    std::size_t n = 0;
    std::string scale_note = "normalized";
    std::string note;  // why r2 is missing, if it is
};

// mse, rmse, mae, mape = mean(|a - p| / max(|a|, epsilon)), r2 = 1 - SSE/SST.
EvalReport evaluate(std::span<const double> pred, std::span<const double> actual,
                    double epsilon = kDefaultMapeEpsilon, std::string scale_note = "normalized");
EvalReport evaluate(const Eigen::VectorXd& pred, const Eigen::VectorXd& actual,
                    double epsilon = kDefaultMapeEpsilon, std::string scale_note = "normalized");

// Next hour equals the current hour: the last lag of every window.
Eigen::VectorXd persistence_baseline(const SupervisedDataset& dataset);

struct ComparisonTable {
    std::vector<std::pair<std::string, EvalReport>> columns;
    std::vector<std::string> warnings;
};

// Columns in the given order. Differing n or scale across reports adds a
// comparability warning rather than failing.
ComparisonTable compare_models(std::vector<std::pair<std::string, EvalReport>> reports);

// Rows MSE, RMSE, R-squared, MAE, MAPE; one column per model.
std::string render_text(const ComparisonTable& table);
std::string render_csv(const ComparisonTable& table);
nlohmann::ordered_json table_to_json(const ComparisonTable& table);
nlohmann::ordered_json report_to_json(const EvalReport& report);

}  // namespace loadcast
