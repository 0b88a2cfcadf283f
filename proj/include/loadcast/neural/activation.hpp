#pragma once

#include <cmath>
#include <string_view>

#include <Eigen/Core>

namespace loadcast::neural {

enum class Activation { sigmoid, tanh, identity };

std::string_view to_string(Activation a) noexcept;
Activation activation_from_string(std::string_view name);

template <typename Scalar>
Scalar stable_sigmoid(Scalar x) {
    using std::exp;
    if (x >= Scalar(0)) {
        return Scalar(1) / (Scalar(1) + exp(-x));
    }
    const Scalar e = exp(x);
    return e / (Scalar(1) + e);
}

// Elementwise activation. sigmoid uses the branch-stable form so large
// negative inputs never overflow exp().
template <typename Derived>
auto apply_activation(Activation kind, const Eigen::MatrixBase<Derived>& x)
    -> Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> {
    using Scalar = typename Derived::Scalar;
    switch (kind) {
    case Activation::sigmoid:
        return x.unaryExpr([](Scalar v) { return stable_sigmoid(v); });
    case Activation::tanh:
        return x.array().tanh().matrix();
    case Activation::identity:
        break;
    }
    return x;
}

// Derivative expressed through the activation's output y = f(x).
template <typename Derived>
auto activation_slope(Activation kind, const Eigen::MatrixBase<Derived>& y)
    -> Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> {
    using Scalar = typename Derived::Scalar;
    switch (kind) {
    case Activation::sigmoid:
        return (y.array() * (Scalar(1) - y.array())).matrix();
    case Activation::tanh:
        return (Scalar(1) - y.array().square()).matrix();
    case Activation::identity:
        break;
    }
    return Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Ones(y.rows(), y.cols());
}

}  // namespace loadcast::neural
