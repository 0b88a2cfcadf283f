#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "loadcast/neural/network.hpp"

namespace loadcast::neural {

struct GradientCheckResult {
    double max_relative_error = 0.0;      // with the denominator floor
    double max_raw_relative_error = 0.0;  // |a - n| / max(|a|, |n|), no floor
    double max_abs_error = 0.0;
    double largest_gradient = 0.0;
    std::string worst_block;
    Eigen::Index worst_index = -1;
    double worst_analytic = 0.0;
    double worst_numeric = 0.0;
    std::size_t parameters_checked = 0;
};

// Mean squared error of a batch and its derivative with respect to each
// prediction.
template <typename Scalar>
Scalar batch_mse(const Matrix<Scalar>& prediction, const Matrix<Scalar>& target) {
    return (prediction - target).array().square().mean();
}

template <typename Scalar>
Matrix<Scalar> batch_mse_gradient(const Matrix<Scalar>& prediction, const Matrix<Scalar>& target) {
    return (Scalar(2) / static_cast<Scalar>(prediction.size())) * (prediction - target);
}

// Compares BPTT gradients of the batch MSE against central differences
// (L(theta + h) - L(theta - h)) / 2h for every parameter.
//
// Relative error is |a - n| / max(|a|, |n|, floor) with
// floor = floor_fraction * max_k |a_k|. Central differences at h = 1e-5 carry
// roughly 1e-11 of absolute rounding noise, so entries whose gradient is many
// orders below the largest one are judged on that scale instead of their own.
// The unfloored maximum is reported alongside; pass 0 to disable the floor.
//
// Dropout is disabled (infer mode) unless `frozen_masks` supplies the masks,
// in which case they are replayed identically in every evaluation.
template <typename Scalar>
GradientCheckResult gradient_check(const NetworkSpec& spec, const NetworkParams<Scalar>& params,
                                   const Matrix<Scalar>& windows, const Matrix<Scalar>& targets, Scalar h = 1e-5,
                                   Scalar floor_fraction = 1e-4, const std::vector<Matrix<Scalar>>* frozen_masks = nullptr) {
    const Mode mode = frozen_masks != nullptr ? Mode::train : Mode::infer;
    const auto fwd = forward(spec, params, windows, mode, nullptr, frozen_masks);
    const auto grads = backward(spec, params, fwd.cache, batch_mse_gradient(fwd.prediction, targets));

    NetworkParams<Scalar> probe = params;
    auto probe_blocks = param_blocks(probe);
    auto grad_blocks = param_blocks(const_cast<NetworkParams<Scalar>&>(grads));

    const auto loss_at = [&] {
        return batch_mse(forward(spec, probe, windows, mode, nullptr, frozen_masks).prediction, targets);
    };

    GradientCheckResult result;
    for (const auto& block : grad_blocks) {
        if (block.size() > 0) {
            result.largest_gradient =
                std::max(result.largest_gradient, static_cast<double>(block.map().cwiseAbs().maxCoeff()));
        }
    }
    const double floor = static_cast<double>(floor_fraction) * result.largest_gradient;
    for (std::size_t b = 0; b < probe_blocks.size(); ++b) {
        auto& block = probe_blocks[b];
        for (Eigen::Index k = 0; k < block.size(); ++k) {
            const Scalar saved = block.data[k];
            block.data[k] = saved + h;
            const Scalar up = loss_at();
            block.data[k] = saved - h;
            const Scalar down = loss_at();
            block.data[k] = saved;

            const double numeric = static_cast<double>((up - down) / (Scalar(2) * h));
            const double analytic = static_cast<double>(grad_blocks[b].data[k]);
            const double abs_err = std::abs(analytic - numeric);
            const double own_scale = std::max(std::abs(analytic), std::abs(numeric));
            const double denom = std::max(own_scale, floor);
            const double rel = denom == 0.0 ? 0.0 : abs_err / denom;
            result.max_abs_error = std::max(result.max_abs_error, abs_err);
            if (own_scale > 0.0) {
                result.max_raw_relative_error = std::max(result.max_raw_relative_error, abs_err / own_scale);
            }
            ++result.parameters_checked;
            if (rel > result.max_relative_error || result.worst_index < 0) {
                result.max_relative_error = rel;
                result.worst_block = block.name;
                result.worst_index = k;
                result.worst_analytic = analytic;
                result.worst_numeric = numeric;
            }
        }
    }
    return result;
}

}  // namespace loadcast::neural
