#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace loadcast {

// Min-max scaling bounds in kWh.
struct ScalerParams {
    double min = 0.0;
    double max = 1.0;

    friend bool operator==(const ScalerParams&, const ScalerParams&) = default;
};

ScalerParams fit_minmax(std::span<const double> values);

// v -> (v - min) / (max - min). Throws when max == min.
std::vector<double> transform_minmax(std::span<const double> values, const ScalerParams& params);
std::vector<double> invert_minmax(std::span<const double> values, const ScalerParams& params);
double transform_minmax(double value, const ScalerParams& params);
double invert_minmax(double value, const ScalerParams& params);

// Windowed supervised view of a univariate series.
//
// `x` is stored as window x n_samples (one column per sample, oldest lag in
// row 0) so a batch of samples is a contiguous block of columns.
struct SupervisedDataset {
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
    int window = 0;
    // Series index of each target, so predictions can be mapped back to time.
    std::vector<std::size_t> target_index;

    [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(y.size()); }
};

// n_samples = length - window; x(j, i) = series[i + j], y(i) = series[i + window].
SupervisedDataset make_windows(std::span<const double> series, int window);

// Like make_windows, but drops windows whose lags or target straddle a gap
// in `hour_index` (consecutive points must be exactly one hour apart).
SupervisedDataset make_windows_contiguous(std::span<const double> series, std::span<const std::int64_t> hour_index,
                                          int window);

SupervisedDataset slice(const SupervisedDataset& dataset, std::size_t begin, std::size_t end);

struct SplitFractions {
    double train = 0.8;
    double val = 0.1;
    double test = 0.1;
};

enum class SplitBasis {
    raw_length,    ///< boundaries from the pre-windowing series length
    sample_count,  ///< boundaries from the number of windowed samples
};

struct SplitDataset {
    SupervisedDataset train;
    SupervisedDataset val;
    SupervisedDataset test;
    std::size_t boundary_train = 0;  ///< first validation sample index
    std::size_t boundary_val = 0;    ///< first test sample index
};

// Boundaries i1 = floor(train * n), i2 = floor((train + val) * n) where n is
// either `raw_len` or the sample count, clamped to the sample axis.
SplitDataset chronological_split(const SupervisedDataset& dataset, std::size_t raw_len,
                                 SplitFractions fractions = {}, SplitBasis basis = SplitBasis::raw_length);

// The boundary pair chronological_split would use.
std::pair<std::size_t, std::size_t> split_boundaries(std::size_t n, SplitFractions fractions);

}  // namespace loadcast
