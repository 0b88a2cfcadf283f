#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "loadcast/neural/network.hpp"
#include "loadcast/preprocess.hpp"

namespace loadcast {

struct TrainConfig {
    int epochs = 100;
    int batch_size = 64;
    double learning_rate = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t seed = 42;

    void validate() const;
};

// First/second moment estimates, one matrix per parameter block.
struct AdamState {
    std::vector<Eigen::MatrixXd> m;
    std::vector<Eigen::MatrixXd> v;
    std::int64_t t = 0;

    static AdamState zeros_like(const neural::NetworkParams<double>& params);
};

struct EpochRecord {
    int epoch = 0;  // 1-based
    double train_loss = 0.0;
    double train_rmse = 0.0;
    double val_loss = 0.0;
    double val_rmse = 0.0;
};

struct TrainHistory {
    std::vector<EpochRecord> epochs;

    // "epoch,train_loss,train_rmse,val_loss,val_rmse" plus one row per epoch.
    [[nodiscard]] std::string to_csv() const;
};

// Parameters at the epoch with the lowest validation loss.
struct Checkpoint {
    neural::NetworkSpec spec;
    neural::NetworkParams<double> params;
    int best_epoch = 0;
    double best_val_loss = 0.0;
};

struct TrainResult {
    Checkpoint checkpoint;
    TrainHistory history;
};

double mse_loss(std::span<const double> pred, std::span<const double> target);
double mse_loss(const Eigen::VectorXd& pred, const Eigen::VectorXd& target);

// One bias-corrected Adam step:
//   m <- b1 m + (1 - b1) g,  v <- b2 v + (1 - b2) g^2,
//   theta <- theta - lr * m_hat / (sqrt(v_hat) + eps).
// Throws a numeric error naming the block when a gradient is not finite.
void adam_update(neural::NetworkParams<double>& params, const neural::NetworkParams<double>& grads, AdamState& state,
                 const TrainConfig& config);

using EpochCallback = std::function<void(const EpochRecord&)>;

// Mini-batch MSE training. Each epoch reshuffles the training samples with a
// seeded permutation, trains on every batch including a final partial one,
// then scores train and validation sets in infer mode. Deterministic for a
// fixed (spec, data, config).
TrainResult train(const neural::NetworkSpec& spec, const SplitDataset& dataset, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

// Same loop starting from caller-supplied parameters.
TrainResult train_from(const neural::NetworkSpec& spec, neural::NetworkParams<double> params,
                       const SplitDataset& dataset, const TrainConfig& config, const EpochCallback& on_epoch = {});

Eigen::VectorXd predict_series(const Checkpoint& checkpoint, const Eigen::MatrixXd& windows);

}  // namespace loadcast
