#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "loadcast/errors.hpp"
#include "loadcast/neural/cells.hpp"
#include "loadcast/random.hpp"

namespace loadcast::neural {

enum class CellKind { lstm, gru };

std::string_view to_string(CellKind kind) noexcept;
CellKind cell_kind_from_string(std::string_view name);

// The fixed six-layer forecaster:
//   Input(window, 1) -> Recurrent(units, full sequence) -> Dropout(rate)
//   -> Recurrent(units, last state) -> Dense(dense_units) -> Dense(1)
// Only sizes and activations vary; the layer graph does not.
struct NetworkSpec {
    CellKind cell = CellKind::lstm;
    int window = 6;
    int features = 1;
    int units = 140;
    double dropout_rate = 0.4;
    int dense_units = 32;
    CellActivations cell_activations{};
    Activation dense_activation = Activation::tanh;

    static NetworkSpec paper(CellKind kind) {
        NetworkSpec spec;
        spec.cell = kind;
        return spec;
    }

    // Throws a config error when sizes or the dropout rate are out of range.
    void validate() const;

    [[nodiscard]] std::size_t parameter_count() const;

    friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

template <typename Scalar>
using RecurrentParams = std::variant<LstmParams<Scalar>, GruParams<Scalar>>;

template <typename Scalar>
struct NetworkParams {
    RecurrentParams<Scalar> layer1;
    RecurrentParams<Scalar> layer2;
    DenseParams<Scalar> dense1;
    DenseParams<Scalar> dense2;

    static NetworkParams zeros(const NetworkSpec& spec) {
        spec.validate();
        NetworkParams p;
        if (spec.cell == CellKind::lstm) {
            p.layer1 = LstmParams<Scalar>::zeros(spec.units, spec.features);
            p.layer2 = LstmParams<Scalar>::zeros(spec.units, spec.units);
        } else {
            p.layer1 = GruParams<Scalar>::zeros(spec.units, spec.features);
            p.layer2 = GruParams<Scalar>::zeros(spec.units, spec.units);
        }
        p.dense1 = DenseParams<Scalar>::zeros(spec.units, spec.dense_units, spec.dense_activation);
        p.dense2 = DenseParams<Scalar>::zeros(spec.dense_units, 1, spec.dense_activation);
        return p;
    }
};

// A mutable view of one weight matrix or bias vector (column-major storage).
template <typename Scalar>
struct ParamBlock {
    std::string name;
    Scalar* data = nullptr;
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;

    [[nodiscard]] Eigen::Index size() const { return rows * cols; }
    [[nodiscard]] Eigen::Map<Matrix<Scalar>> map() const { return {data, rows, cols}; }
};

namespace detail {

template <typename Scalar, typename Dense>
void push_block(std::vector<ParamBlock<Scalar>>& out, std::string name, Dense& m) {
    out.push_back({std::move(name), m.data(), m.rows(), m.cols()});
}

template <typename Scalar>
void push_recurrent(std::vector<ParamBlock<Scalar>>& out, const std::string& prefix, RecurrentParams<Scalar>& layer) {
    if (auto* l = std::get_if<LstmParams<Scalar>>(&layer)) {
        push_block(out, prefix + ".W_i", l->w_i);
        push_block(out, prefix + ".W_f", l->w_f);
        push_block(out, prefix + ".W_o", l->w_o);
        push_block(out, prefix + ".W_c", l->w_c);
        push_block(out, prefix + ".b_i", l->b_i);
        push_block(out, prefix + ".b_f", l->b_f);
        push_block(out, prefix + ".b_o", l->b_o);
        push_block(out, prefix + ".b_c", l->b_c);
    } else {
        auto& g = std::get<GruParams<Scalar>>(layer);
        push_block(out, prefix + ".W_R", g.w_r);
        push_block(out, prefix + ".W_Z", g.w_z);
        push_block(out, prefix + ".W_M", g.w_m);
        push_block(out, prefix + ".V_R", g.v_r);
        push_block(out, prefix + ".V_Z", g.v_z);
        push_block(out, prefix + ".V_M", g.v_m);
        push_block(out, prefix + ".b_R", g.b_r);
        push_block(out, prefix + ".b_Z", g.b_z);
        push_block(out, prefix + ".b_M", g.b_m);
    }
}

}  // namespace detail

// Every trainable block in a fixed order (layer1, layer2, dense1, dense2).
// The order is part of the model file format.
template <typename Scalar>
std::vector<ParamBlock<Scalar>> param_blocks(NetworkParams<Scalar>& p) {
    std::vector<ParamBlock<Scalar>> out;
    detail::push_recurrent(out, "recurrent1", p.layer1);
    detail::push_recurrent(out, "recurrent2", p.layer2);
    detail::push_block(out, "dense1.W", p.dense1.w);
    detail::push_block(out, "dense1.b", p.dense1.b);
    detail::push_block(out, "dense2.W", p.dense2.w);
    detail::push_block(out, "dense2.b", p.dense2.b);
    return out;
}

template <typename Scalar>
NetworkParams<Scalar> zeros_like(const NetworkParams<Scalar>& p) {
    NetworkParams<Scalar> z = p;
    for (auto& block : param_blocks(z)) {
        block.map().setZero();
    }
    return z;
}

template <typename Scalar>
std::size_t count_parameters(const NetworkParams<Scalar>& p) {
    std::size_t n = 0;
    for (const auto& block : param_blocks(const_cast<NetworkParams<Scalar>&>(p))) {
        n += static_cast<std::size_t>(block.size());
    }
    return n;
}

// Glorot-uniform weights, U(-a, a) with a = sqrt(6 / (fan_in + fan_out)) over
// each matrix's full shape; biases zero.
template <typename Scalar>
NetworkParams<Scalar> init_params(const NetworkSpec& spec, Rng& rng) {
    NetworkParams<Scalar> p = NetworkParams<Scalar>::zeros(spec);
    for (auto& block : param_blocks(p)) {
        if (block.cols == 1) {
            continue;  // bias
        }
        const double limit = std::sqrt(6.0 / static_cast<double>(block.rows + block.cols));
        // Draw in row-major order so the stream matches the serialised layout.
        auto m = block.map();
        for (Eigen::Index r = 0; r < block.rows; ++r) {
            for (Eigen::Index c = 0; c < block.cols; ++c) {
                m(r, c) = static_cast<Scalar>(rng.uniform(-limit, limit));
            }
        }
    }
    return p;
}

// ---------------------------------------------------------------------------
// Dropout
// ---------------------------------------------------------------------------

enum class Mode { train, infer };

// Inverted dropout. In train mode each element is zeroed with probability
// `rate` and survivors are scaled by 1 / (1 - rate); `mask` receives the
// multiplier applied to each element. Infer mode (or rate 0) is the identity.
template <typename Scalar>
Matrix<Scalar> apply_dropout(const Matrix<Scalar>& activations, double rate, Rng& rng, Mode mode,
                             Matrix<Scalar>* mask = nullptr) {
    if (!(rate >= 0.0 && rate < 1.0)) {
        fail(ErrorCode::config, "dropout rate must lie in [0, 1)");
    }
    if (mode == Mode::infer || rate == 0.0) {
        if (mask != nullptr) {
            mask->setOnes(activations.rows(), activations.cols());
        }
        return activations;
    }
    const Scalar keep_scale = Scalar(1.0 / (1.0 - rate));
    Matrix<Scalar> m(activations.rows(), activations.cols());
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            m(r, c) = rng.uniform() < rate ? Scalar(0) : keep_scale;
        }
    }
    Matrix<Scalar> out = (activations.array() * m.array()).matrix();
    if (mask != nullptr) {
        *mask = std::move(m);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Forward / backward
// ---------------------------------------------------------------------------

template <typename Scalar>
using StepCaches = std::variant<std::vector<LstmStepCache<Scalar>>, std::vector<GruStepCache<Scalar>>>;

template <typename Scalar>
struct ForwardCache {
    Eigen::Index batch = 0;
    std::vector<Matrix<Scalar>> inputs;          // per timestep, features x batch
    StepCaches<Scalar> layer1;
    std::vector<Matrix<Scalar>> dropout_masks;  // per timestep, units x batch
    std::vector<Matrix<Scalar>> layer2_inputs;  // layer-1 outputs after dropout
    StepCaches<Scalar> layer2;
    Matrix<Scalar> layer2_out;  // final state, units x batch
    Matrix<Scalar> dense1_out;
    Matrix<Scalar> prediction;  // 1 x batch
    bool valid = false;
};

template <typename Scalar>
struct ForwardResult {
    Matrix<Scalar> prediction;  // 1 x batch
    ForwardCache<Scalar> cache;
};

namespace detail {

template <typename Scalar>
std::vector<Matrix<Scalar>> unroll(const RecurrentParams<Scalar>& layer, const std::vector<Matrix<Scalar>>& inputs,
                                   CellActivations act, StepCaches<Scalar>& caches) {
    const Eigen::Index batch = inputs.front().cols();
    std::vector<Matrix<Scalar>> outputs;
    outputs.reserve(inputs.size());
    if (const auto* l = std::get_if<LstmParams<Scalar>>(&layer)) {
        std::vector<LstmStepCache<Scalar>> steps;
        steps.reserve(inputs.size());
        auto state = LstmState<Scalar>::zeros(l->hidden(), batch);
        for (const auto& x : inputs) {
            auto [next, cache] = lstm_step(*l, x, state, act);
            state = std::move(next);
            outputs.push_back(state.h);
            steps.push_back(std::move(cache));
        }
        caches = std::move(steps);
    } else {
        const auto& g = std::get<GruParams<Scalar>>(layer);
        std::vector<GruStepCache<Scalar>> steps;
        steps.reserve(inputs.size());
        Matrix<Scalar> state = Matrix<Scalar>::Zero(g.hidden(), batch);
        for (const auto& x : inputs) {
            auto [next, cache] = gru_step(g, x, state, act);
            state = std::move(next);
            outputs.push_back(state);
            steps.push_back(std::move(cache));
        }
        caches = std::move(steps);
    }
    return outputs;
}

// Backpropagates a recurrent layer given dL/d(output_t) for every t and
// returns dL/d(input_t). Gradients accumulate into `grads`.
template <typename Scalar>
std::vector<Matrix<Scalar>> unroll_backward(const RecurrentParams<Scalar>& layer, const StepCaches<Scalar>& caches,
                                            const std::vector<Matrix<Scalar>>& d_outputs, CellActivations act,
                                            RecurrentParams<Scalar>& grads) {
    const std::size_t steps = d_outputs.size();
    std::vector<Matrix<Scalar>> d_inputs(steps);
    if (const auto* l = std::get_if<LstmParams<Scalar>>(&layer)) {
        const auto& cache = std::get<std::vector<LstmStepCache<Scalar>>>(caches);
        auto& g = std::get<LstmParams<Scalar>>(grads);
        const Eigen::Index batch = d_outputs.front().cols();
        Matrix<Scalar> dh_next = Matrix<Scalar>::Zero(l->hidden(), batch);
        Matrix<Scalar> dc_next = Matrix<Scalar>::Zero(l->hidden(), batch);
        for (std::size_t t = steps; t-- > 0;) {
            Matrix<Scalar> dh = dh_next + d_outputs[t];
            auto step = lstm_step_backward(*l, cache[t], dh, dc_next, g, act);
            dh_next = std::move(step.dh_prev);
            dc_next = std::move(step.dc_prev);
            d_inputs[t] = std::move(step.dx);
        }
    } else {
        const auto& gp = std::get<GruParams<Scalar>>(layer);
        const auto& cache = std::get<std::vector<GruStepCache<Scalar>>>(caches);
        auto& g = std::get<GruParams<Scalar>>(grads);
        const Eigen::Index batch = d_outputs.front().cols();
        Matrix<Scalar> dc_next = Matrix<Scalar>::Zero(gp.hidden(), batch);
        for (std::size_t t = steps; t-- > 0;) {
            Matrix<Scalar> dc = dc_next + d_outputs[t];
            auto step = gru_step_backward(gp, cache[t], dc, g, act);
            dc_next = std::move(step.dc_prev);
            d_inputs[t] = std::move(step.dx);
        }
    }
    return d_inputs;
}

template <typename Scalar>
bool all_finite(const Matrix<Scalar>& m) {
    return m.allFinite();
}

}  // namespace detail

// Runs the network on a batch of windows. `windows` is window x batch with
// the oldest reading in row 0. When `frozen_masks` is given (one units x batch
// matrix per timestep) it replaces freshly drawn dropout masks, which lets a
// train-mode pass be replayed exactly.
template <typename Scalar>
ForwardResult<Scalar> forward(const NetworkSpec& spec, const NetworkParams<Scalar>& params,
                              const Matrix<Scalar>& windows, Mode mode, Rng* rng = nullptr,
                              const std::vector<Matrix<Scalar>>* frozen_masks = nullptr) {
    if (windows.rows() != spec.window * spec.features || windows.cols() < 1) {
        fail(ErrorCode::dimension, "forward: expected " + std::to_string(spec.window) + " x batch input, got " +
                                       std::to_string(windows.rows()) + " x " + std::to_string(windows.cols()));
    }
    ForwardResult<Scalar> result;
    auto& cache = result.cache;
    cache.batch = windows.cols();
    cache.inputs.reserve(static_cast<std::size_t>(spec.window));
    for (int t = 0; t < spec.window; ++t) {
        cache.inputs.push_back(windows.middleRows(t * spec.features, spec.features));
    }

    const auto layer1_out = detail::unroll(params.layer1, cache.inputs, spec.cell_activations, cache.layer1);

    cache.layer2_inputs.reserve(layer1_out.size());
    cache.dropout_masks.reserve(layer1_out.size());
    const bool drop = mode == Mode::train && spec.dropout_rate > 0.0;
    for (std::size_t t = 0; t < layer1_out.size(); ++t) {
        if (frozen_masks != nullptr) {
            const auto& m = (*frozen_masks)[t];
            detail::require_shape(m.rows() == layer1_out[t].rows() && m.cols() == layer1_out[t].cols(),
                                  "forward: frozen dropout mask shape");
            cache.layer2_inputs.push_back((layer1_out[t].array() * m.array()).matrix());
            cache.dropout_masks.push_back(m);
        } else if (drop) {
            if (rng == nullptr) {
                fail(ErrorCode::usage, "forward: train mode with dropout needs a random source");
            }
            Matrix<Scalar> mask;
            cache.layer2_inputs.push_back(apply_dropout(layer1_out[t], spec.dropout_rate, *rng, mode, &mask));
            cache.dropout_masks.push_back(std::move(mask));
        } else {
            cache.layer2_inputs.push_back(layer1_out[t]);
        }
    }

    const auto layer2_out = detail::unroll(params.layer2, cache.layer2_inputs, spec.cell_activations, cache.layer2);
    cache.layer2_out = layer2_out.back();

    cache.dense1_out =
        apply_activation(params.dense1.activation, detail::affine(params.dense1.w, cache.layer2_out, params.dense1.b));
    cache.prediction =
        apply_activation(params.dense2.activation, detail::affine(params.dense2.w, cache.dense1_out, params.dense2.b));
    if (!detail::all_finite(cache.prediction)) {
        fail(ErrorCode::numeric, "forward: non-finite activation");
    }
    cache.valid = true;
    result.prediction = cache.prediction;
    return result;
}

// Backpropagation through time. `d_prediction` (1 x batch) is the derivative
// of the objective with respect to each prediction; parameter gradients are
// summed over the batch and over all unrolled timesteps of both recurrent
// layers.
template <typename Scalar>
NetworkParams<Scalar> backward(const NetworkSpec& spec, const NetworkParams<Scalar>& params,
                               const ForwardCache<Scalar>& cache, const Matrix<Scalar>& d_prediction) {
    if (!cache.valid) {
        fail(ErrorCode::usage, "backward: missing forward cache");
    }
    detail::require_shape(d_prediction.rows() == 1 && d_prediction.cols() == cache.batch,
                          "backward: d_prediction must be 1 x batch");
    NetworkParams<Scalar> grads = zeros_like(params);

    const Matrix<Scalar> a2 =
        (d_prediction.array() * activation_slope(params.dense2.activation, cache.prediction).array()).matrix();
    grads.dense2.w.noalias() = a2 * cache.dense1_out.transpose();
    grads.dense2.b = a2.rowwise().sum();

    Matrix<Scalar> d_dense1 = params.dense2.w.transpose() * a2;
    const Matrix<Scalar> a1 =
        (d_dense1.array() * activation_slope(params.dense1.activation, cache.dense1_out).array()).matrix();
    grads.dense1.w.noalias() = a1 * cache.layer2_out.transpose();
    grads.dense1.b = a1.rowwise().sum();

    const Matrix<Scalar> d_layer2_out = params.dense1.w.transpose() * a1;
    const auto steps = static_cast<std::size_t>(spec.window);
    std::vector<Matrix<Scalar>> d_outputs(steps);
    for (std::size_t t = 0; t + 1 < steps; ++t) {
        d_outputs[t] = Matrix<Scalar>::Zero(d_layer2_out.rows(), cache.batch);
    }
    d_outputs[steps - 1] = d_layer2_out;

    auto d_layer2_in = detail::unroll_backward(params.layer2, cache.layer2, d_outputs, spec.cell_activations,
                                               grads.layer2);
    if (!cache.dropout_masks.empty()) {
        for (std::size_t t = 0; t < steps; ++t) {
            d_layer2_in[t].array() *= cache.dropout_masks[t].array();
        }
    }
    detail::unroll_backward(params.layer1, cache.layer1, d_layer2_in, spec.cell_activations, grads.layer1);
    return grads;
}

// Infer-mode predictions for many samples, evaluated in fixed-size chunks.
template <typename Scalar>
Vector<Scalar> predict_batch(const NetworkSpec& spec, const NetworkParams<Scalar>& params,
                             const Matrix<Scalar>& windows, Eigen::Index chunk = 256) {
    Vector<Scalar> out(windows.cols());
    for (Eigen::Index start = 0; start < windows.cols(); start += chunk) {
        const Eigen::Index len = std::min(chunk, windows.cols() - start);
        const auto result = forward(spec, params, Matrix<Scalar>(windows.middleCols(start, len)), Mode::infer);
        out.segment(start, len) = result.prediction.transpose();
    }
    return out;
}

}  // namespace loadcast::neural
