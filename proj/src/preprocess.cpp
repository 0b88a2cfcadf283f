#include "loadcast/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "loadcast/errors.hpp"

namespace loadcast {

ScalerParams fit_minmax(std::span<const double> values) {
    if (values.empty()) {
        fail(ErrorCode::empty_series, "cannot fit a scaler to an empty sequence");
    }
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    if (!std::isfinite(*lo) || !std::isfinite(*hi)) {
        fail(ErrorCode::numeric, "scaler input contains non-finite values");
    }
    return {*lo, *hi};
}

namespace {

double checked_range(const ScalerParams& params) {
    if (!std::isfinite(params.min) || !std::isfinite(params.max) || params.max < params.min) {
        fail(ErrorCode::validation, "scaler bounds must be finite with max >= min");
    }
    const double range = params.max - params.min;
    if (range == 0.0) {
        fail(ErrorCode::degenerate_scale, "constant series (max == min) cannot be normalized");
    }
    return range;
}

}  // namespace

double transform_minmax(double value, const ScalerParams& params) {
    return (value - params.min) / checked_range(params);
}

double invert_minmax(double value, const ScalerParams& params) {
    return value * checked_range(params) + params.min;
}

std::vector<double> transform_minmax(std::span<const double> values, const ScalerParams& params) {
    const double range = checked_range(params);
    std::vector<double> out(values.size());
    std::transform(values.begin(), values.end(), out.begin(), [&](double v) { return (v - params.min) / range; });
    return out;
}

std::vector<double> invert_minmax(std::span<const double> values, const ScalerParams& params) {
    const double range = checked_range(params);
    std::vector<double> out(values.size());
    std::transform(values.begin(), values.end(), out.begin(), [&](double v) { return v * range + params.min; });
    return out;
}

SupervisedDataset make_windows(std::span<const double> series, int window) {
    if (window < 1) {
        fail(ErrorCode::validation, "window must be >= 1");
    }
    const auto w = static_cast<std::size_t>(window);
    if (series.size() <= w) {
        fail(ErrorCode::insufficient_data, "series of length " + std::to_string(series.size()) +
                                               " is too short for window " + std::to_string(window));
    }
    const std::size_t n = series.size() - w;
    SupervisedDataset ds;
    ds.window = window;
    ds.x.resize(window, static_cast<Eigen::Index>(n));
    ds.y.resize(static_cast<Eigen::Index>(n));
    ds.target_index.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < w; ++j) {
            ds.x(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = series[i + j];
        }
        ds.y(static_cast<Eigen::Index>(i)) = series[i + w];
        ds.target_index[i] = i + w;
    }
    return ds;
}

SupervisedDataset make_windows_contiguous(std::span<const double> series, std::span<const std::int64_t> hour_index,
                                          int window) {
    if (hour_index.size() != series.size()) {
        fail(ErrorCode::dimension, "hour index length must match series length");
    }
    const SupervisedDataset all = make_windows(series, window);
    std::vector<Eigen::Index> keep;
    for (std::size_t i = 0; i < all.size(); ++i) {
        const bool contiguous =
            hour_index[i + static_cast<std::size_t>(window)] - hour_index[i] == static_cast<std::int64_t>(window);
        if (contiguous) {
            keep.push_back(static_cast<Eigen::Index>(i));
        }
    }
    if (keep.empty()) {
        fail(ErrorCode::insufficient_data, "no gap-free window of length " + std::to_string(window));
    }
    SupervisedDataset ds;
    ds.window = window;
    ds.x = all.x(Eigen::all, keep);
    ds.y = all.y(keep);
    for (const auto k : keep) {
        ds.target_index.push_back(all.target_index[static_cast<std::size_t>(k)]);
    }
    return ds;
}

SupervisedDataset slice(const SupervisedDataset& dataset, std::size_t begin, std::size_t end) {
    if (begin > end || end > dataset.size()) {
        fail(ErrorCode::dimension, "slice out of range");
    }
    const auto b = static_cast<Eigen::Index>(begin);
    const auto len = static_cast<Eigen::Index>(end - begin);
    SupervisedDataset out;
    out.window = dataset.window;
    out.x = dataset.x.middleCols(b, len);
    out.y = dataset.y.segment(b, len);
    out.target_index.assign(dataset.target_index.begin() + static_cast<std::ptrdiff_t>(begin),
                            dataset.target_index.begin() + static_cast<std::ptrdiff_t>(end));
    return out;
}

std::pair<std::size_t, std::size_t> split_boundaries(std::size_t n, SplitFractions f) {
    if (f.train < 0.0 || f.val < 0.0 || f.test < 0.0 || std::abs(f.train + f.val + f.test - 1.0) > 1e-9) {
        fail(ErrorCode::validation, "split fractions must be non-negative and sum to 1");
    }
    // The small offset keeps exact products such as 0.29 * 100 from flooring down.
    const auto floor_of = [](double v) { return static_cast<std::size_t>(std::floor(v + 1e-9)); };
    const double nd = static_cast<double>(n);
    return {floor_of(f.train * nd), floor_of((f.train + f.val) * nd)};
}

SplitDataset chronological_split(const SupervisedDataset& dataset, std::size_t raw_len, SplitFractions fractions,
                                 SplitBasis basis) {
    if (dataset.size() == 0) {
        fail(ErrorCode::split, "dataset is empty");
    }
    const std::size_t n = basis == SplitBasis::raw_length ? raw_len : dataset.size();
    auto [i1, i2] = split_boundaries(n, fractions);
    i1 = std::min(i1, dataset.size());
    i2 = std::min(i2, dataset.size());
    if (i1 == 0 || i2 <= i1 || i2 >= dataset.size()) {
        fail(ErrorCode::split, "split boundaries (" + std::to_string(i1) + ", " + std::to_string(i2) +
                                   ") leave an empty slice for " + std::to_string(dataset.size()) + " samples");
    }
    SplitDataset out;
    out.boundary_train = i1;
    out.boundary_val = i2;
    out.train = slice(dataset, 0, i1);
    out.val = slice(dataset, i1, i2);
    out.test = slice(dataset, i2, dataset.size());
    return out;
}

}  // namespace loadcast
