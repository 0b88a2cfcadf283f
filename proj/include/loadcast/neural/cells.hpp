#pragma once

#include <string>

#include <Eigen/Core>

#include "loadcast/errors.hpp"
#include "loadcast/neural/activation.hpp"

namespace loadcast::neural {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Activations used inside a recurrent cell: `gate` squashes the gates,
// `state` produces the candidate / new memory and (LSTM) the output
// transform of the cell state.
struct CellActivations {
    Activation gate = Activation::sigmoid;
    Activation state = Activation::tanh;

    friend bool operator==(const CellActivations&, const CellActivations&) = default;
};

namespace detail {

inline void require_shape(bool ok, const char* what) {
    if (!ok) {
        fail(ErrorCode::dimension, what);
    }
}

template <typename Scalar>
Matrix<Scalar> affine(const Matrix<Scalar>& w, const Matrix<Scalar>& in, const Vector<Scalar>& b) {
    Matrix<Scalar> out(w.rows(), in.cols());
    out.noalias() = w * in;
    out.colwise() += b;
    return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// LSTM
// ---------------------------------------------------------------------------

// Gate weights act on the stacked vector [h_(t-1); x_t], so every matrix is
// hidden x (hidden + input) with the recurrent block first.
template <typename Scalar>
struct LstmParams {
    Matrix<Scalar> w_i, w_f, w_o, w_c;
    Vector<Scalar> b_i, b_f, b_o, b_c;

    static LstmParams zeros(int hidden, int input) {
        LstmParams p;
        for (auto* w : {&p.w_i, &p.w_f, &p.w_o, &p.w_c}) {
            w->setZero(hidden, hidden + input);
        }
        for (auto* b : {&p.b_i, &p.b_f, &p.b_o, &p.b_c}) {
            b->setZero(hidden);
        }
        return p;
    }

    [[nodiscard]] Eigen::Index hidden() const { return w_i.rows(); }
    [[nodiscard]] Eigen::Index input() const { return w_i.cols() - w_i.rows(); }
};

// Hidden ("fast") and cell ("slow") state, one column per batch element.
template <typename Scalar>
struct LstmState {
    Matrix<Scalar> h;
    Matrix<Scalar> c;

    static LstmState zeros(Eigen::Index hidden, Eigen::Index batch) {
        return {Matrix<Scalar>::Zero(hidden, batch), Matrix<Scalar>::Zero(hidden, batch)};
    }
};

template <typename Scalar>
struct LstmStepCache {
    Matrix<Scalar> stacked;  // [h_prev; x]
    Matrix<Scalar> c_prev;
    Matrix<Scalar> i, f, o, candidate;
    Matrix<Scalar> c, state_c, h;  // state_c = tanh(c)
};

template <typename Scalar>
std::pair<LstmState<Scalar>, LstmStepCache<Scalar>> lstm_step(const LstmParams<Scalar>& p, const Matrix<Scalar>& x,
                                                              const LstmState<Scalar>& state,
                                                              CellActivations act = {}) {
    const Eigen::Index hidden = p.hidden();
    detail::require_shape(x.rows() == p.input(), "lstm_step: input size does not match W");
    detail::require_shape(state.h.rows() == hidden && state.c.rows() == hidden, "lstm_step: state size");
    detail::require_shape(state.h.cols() == x.cols() && state.c.cols() == x.cols(), "lstm_step: batch size");

    LstmStepCache<Scalar> cache;
    cache.stacked.resize(hidden + x.rows(), x.cols());
    cache.stacked.topRows(hidden) = state.h;
    cache.stacked.bottomRows(x.rows()) = x;
    cache.c_prev = state.c;

    cache.i = apply_activation(act.gate, detail::affine(p.w_i, cache.stacked, p.b_i));
    cache.f = apply_activation(act.gate, detail::affine(p.w_f, cache.stacked, p.b_f));
    cache.o = apply_activation(act.gate, detail::affine(p.w_o, cache.stacked, p.b_o));
    cache.candidate = apply_activation(act.state, detail::affine(p.w_c, cache.stacked, p.b_c));

    cache.c = (cache.f.array() * state.c.array() + cache.i.array() * cache.candidate.array()).matrix();
    cache.state_c = apply_activation(act.state, cache.c);
    cache.h = (cache.o.array() * cache.state_c.array()).matrix();

    LstmState<Scalar> next{cache.h, cache.c};
    return {std::move(next), std::move(cache)};
}

// Upstream derivatives flowing into the previous timestep and the input.
template <typename Scalar>
struct LstmStepGrad {
    Matrix<Scalar> dh_prev, dc_prev, dx;
};

// Backpropagates one step. `dh` and `dc` are the total derivatives with
// respect to h_t and c_t from everything downstream (for dc, only the path
// through c_(t+1)). Parameter gradients are accumulated into `grads`.
template <typename Scalar>
LstmStepGrad<Scalar> lstm_step_backward(const LstmParams<Scalar>& p, const LstmStepCache<Scalar>& cache,
                                        const Matrix<Scalar>& dh, const Matrix<Scalar>& dc,
                                        LstmParams<Scalar>& grads, CellActivations act = {}) {
    const Eigen::Index hidden = p.hidden();
    using Arr = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

    const Arr d_o = dh.array() * cache.state_c.array();
    const Arr dc_total =
        dc.array() + dh.array() * cache.o.array() * activation_slope(act.state, cache.state_c).array();

    const Matrix<Scalar> a_i = (dc_total * cache.candidate.array() * activation_slope(act.gate, cache.i).array()).matrix();
    const Matrix<Scalar> a_f = (dc_total * cache.c_prev.array() * activation_slope(act.gate, cache.f).array()).matrix();
    const Matrix<Scalar> a_o = (d_o * activation_slope(act.gate, cache.o).array()).matrix();
    const Matrix<Scalar> a_c =
        (dc_total * cache.i.array() * activation_slope(act.state, cache.candidate).array()).matrix();

    grads.w_i.noalias() += a_i * cache.stacked.transpose();
    grads.w_f.noalias() += a_f * cache.stacked.transpose();
    grads.w_o.noalias() += a_o * cache.stacked.transpose();
    grads.w_c.noalias() += a_c * cache.stacked.transpose();
    grads.b_i += a_i.rowwise().sum();
    grads.b_f += a_f.rowwise().sum();
    grads.b_o += a_o.rowwise().sum();
    grads.b_c += a_c.rowwise().sum();

    Matrix<Scalar> d_stacked(p.w_i.cols(), dh.cols());
    d_stacked.noalias() = p.w_i.transpose() * a_i;
    d_stacked.noalias() += p.w_f.transpose() * a_f;
    d_stacked.noalias() += p.w_o.transpose() * a_o;
    d_stacked.noalias() += p.w_c.transpose() * a_c;

    LstmStepGrad<Scalar> out;
    out.dh_prev = d_stacked.topRows(hidden);
    out.dx = d_stacked.bottomRows(d_stacked.rows() - hidden);
    out.dc_prev = (dc_total * cache.f.array()).matrix();
    return out;
}

// ---------------------------------------------------------------------------
// GRU
// ---------------------------------------------------------------------------

// W_* act on the previous state c_(t-1), V_* on the input x_t. Biases are
// carried but zero-initialised, in which case the step is exactly
//   R = sig(W_R c + V_R x), Z = sig(W_Z c + V_Z x),
//   M = tanh(W_M (c * R) + V_M x), c_t = c (1 - Z) + Z M.
template <typename Scalar>
struct GruParams {
    Matrix<Scalar> w_r, w_z, w_m;
    Matrix<Scalar> v_r, v_z, v_m;
    Vector<Scalar> b_r, b_z, b_m;

    static GruParams zeros(int hidden, int input) {
        GruParams p;
        for (auto* w : {&p.w_r, &p.w_z, &p.w_m}) {
            w->setZero(hidden, hidden);
        }
        for (auto* v : {&p.v_r, &p.v_z, &p.v_m}) {
            v->setZero(hidden, input);
        }
        for (auto* b : {&p.b_r, &p.b_z, &p.b_m}) {
            b->setZero(hidden);
        }
        return p;
    }

    [[nodiscard]] Eigen::Index hidden() const { return w_r.rows(); }
    [[nodiscard]] Eigen::Index input() const { return v_r.cols(); }
};

template <typename Scalar>
struct GruStepCache {
    Matrix<Scalar> x, c_prev;
    Matrix<Scalar> r, z, m;
    Matrix<Scalar> reset_state;  // c_prev * R
    Matrix<Scalar> c;
};

template <typename Scalar>
std::pair<Matrix<Scalar>, GruStepCache<Scalar>> gru_step(const GruParams<Scalar>& p, const Matrix<Scalar>& x,
                                                         const Matrix<Scalar>& c_prev, CellActivations act = {}) {
    detail::require_shape(x.rows() == p.input(), "gru_step: input size does not match V");
    detail::require_shape(c_prev.rows() == p.hidden(), "gru_step: state size");
    detail::require_shape(c_prev.cols() == x.cols(), "gru_step: batch size");

    GruStepCache<Scalar> cache;
    cache.x = x;
    cache.c_prev = c_prev;

    Matrix<Scalar> pre = detail::affine(p.w_r, c_prev, p.b_r);
    pre.noalias() += p.v_r * x;
    cache.r = apply_activation(act.gate, pre);

    pre = detail::affine(p.w_z, c_prev, p.b_z);
    pre.noalias() += p.v_z * x;
    cache.z = apply_activation(act.gate, pre);

    cache.reset_state = (c_prev.array() * cache.r.array()).matrix();
    pre = detail::affine(p.w_m, cache.reset_state, p.b_m);
    pre.noalias() += p.v_m * x;
    cache.m = apply_activation(act.state, pre);

    cache.c = (c_prev.array() * (Scalar(1) - cache.z.array()) + cache.z.array() * cache.m.array()).matrix();
    Matrix<Scalar> next = cache.c;
    return {std::move(next), std::move(cache)};
}

template <typename Scalar>
struct GruStepGrad {
    Matrix<Scalar> dc_prev, dx;
};

template <typename Scalar>
GruStepGrad<Scalar> gru_step_backward(const GruParams<Scalar>& p, const GruStepCache<Scalar>& cache,
                                      const Matrix<Scalar>& dc, GruParams<Scalar>& grads, CellActivations act = {}) {
    using Arr = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

    const Arr d_z = dc.array() * (cache.m.array() - cache.c_prev.array());
    const Arr d_m = dc.array() * cache.z.array();

    const Matrix<Scalar> a_m = (d_m * activation_slope(act.state, cache.m).array()).matrix();
    grads.w_m.noalias() += a_m * cache.reset_state.transpose();
    grads.v_m.noalias() += a_m * cache.x.transpose();
    grads.b_m += a_m.rowwise().sum();

    Matrix<Scalar> d_reset(p.hidden(), dc.cols());
    d_reset.noalias() = p.w_m.transpose() * a_m;
    const Arr d_r = d_reset.array() * cache.c_prev.array();

    const Matrix<Scalar> a_z = (d_z * activation_slope(act.gate, cache.z).array()).matrix();
    const Matrix<Scalar> a_r = (d_r * activation_slope(act.gate, cache.r).array()).matrix();

    grads.w_z.noalias() += a_z * cache.c_prev.transpose();
    grads.v_z.noalias() += a_z * cache.x.transpose();
    grads.b_z += a_z.rowwise().sum();
    grads.w_r.noalias() += a_r * cache.c_prev.transpose();
    grads.v_r.noalias() += a_r * cache.x.transpose();
    grads.b_r += a_r.rowwise().sum();

    GruStepGrad<Scalar> out;
    out.dc_prev = (dc.array() * (Scalar(1) - cache.z.array()) + d_reset.array() * cache.r.array()).matrix();
    out.dc_prev.noalias() += p.w_z.transpose() * a_z;
    out.dc_prev.noalias() += p.w_r.transpose() * a_r;

    out.dx.resize(p.input(), dc.cols());
    out.dx.noalias() = p.v_m.transpose() * a_m;
    out.dx.noalias() += p.v_z.transpose() * a_z;
    out.dx.noalias() += p.v_r.transpose() * a_r;
    return out;
}

// ---------------------------------------------------------------------------
// Dense
// ---------------------------------------------------------------------------

template <typename Scalar>
struct DenseParams {
    Matrix<Scalar> w;  // out x in
    Vector<Scalar> b;
    Activation activation = Activation::tanh;

    static DenseParams zeros(int in, int out, Activation activation = Activation::tanh) {
        return {Matrix<Scalar>::Zero(out, in), Vector<Scalar>::Zero(out), activation};
    }
};

}  // namespace loadcast::neural
