#include "loadcast/trainer.hpp"

#include <cmath>
#include <sstream>

#include "loadcast/errors.hpp"
#include "loadcast/meter_ingest.hpp"
#include "loadcast/random.hpp"

namespace loadcast {

using neural::NetworkParams;

void TrainConfig::validate() const {
    if (epochs < 1) {
        fail(ErrorCode::config, "epochs must be >= 1");
    }
    if (batch_size < 1) {
        fail(ErrorCode::config, "batch_size must be >= 1");
    }
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
        fail(ErrorCode::config, "learning_rate must be > 0");
    }
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0) || !(epsilon > 0.0)) {
        fail(ErrorCode::config, "adam betas must lie in [0, 1) and epsilon must be > 0");
    }
}

AdamState AdamState::zeros_like(const NetworkParams<double>& params) {
    AdamState state;
    for (const auto& block : neural::param_blocks(const_cast<NetworkParams<double>&>(params))) {
        state.m.push_back(Eigen::MatrixXd::Zero(block.rows, block.cols));
        state.v.push_back(Eigen::MatrixXd::Zero(block.rows, block.cols));
    }
    return state;
}

std::string TrainHistory::to_csv() const {
    std::string out = "epoch,train_loss,train_rmse,val_loss,val_rmse\n";
    for (const auto& e : epochs) {
        out += std::to_string(e.epoch) + ',' + format_double(e.train_loss) + ',' + format_double(e.train_rmse) + ',' +
               format_double(e.val_loss) + ',' + format_double(e.val_rmse) + '\n';
    }
    return out;
}

double mse_loss(std::span<const double> pred, std::span<const double> target) {
    if (pred.size() != target.size() || pred.empty()) {
        fail(ErrorCode::dimension, "mse_loss: prediction and target lengths must match and be non-empty");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - target[i];
        sum += d * d;
    }
    return sum / static_cast<double>(pred.size());
}

double mse_loss(const Eigen::VectorXd& pred, const Eigen::VectorXd& target) {
    return mse_loss(std::span<const double>(pred.data(), static_cast<std::size_t>(pred.size())),
                    std::span<const double>(target.data(), static_cast<std::size_t>(target.size())));
}

void adam_update(NetworkParams<double>& params, const NetworkParams<double>& grads, AdamState& state,
                 const TrainConfig& config) {
    auto p_blocks = neural::param_blocks(params);
    const auto g_blocks = neural::param_blocks(const_cast<NetworkParams<double>&>(grads));
    if (state.m.size() != p_blocks.size() || g_blocks.size() != p_blocks.size()) {
        fail(ErrorCode::dimension, "adam_update: optimizer state does not match the parameters");
    }
    for (std::size_t b = 0; b < p_blocks.size(); ++b) {
        if (g_blocks[b].rows != p_blocks[b].rows || g_blocks[b].cols != p_blocks[b].cols ||
            state.m[b].rows() != p_blocks[b].rows || state.m[b].cols() != p_blocks[b].cols) {
            fail(ErrorCode::dimension, "adam_update: shape mismatch in block '" + p_blocks[b].name + "'");
        }
        if (!g_blocks[b].map().allFinite()) {
            fail(ErrorCode::numeric, "adam_update: non-finite gradient in block '" + p_blocks[b].name + "'");
        }
    }

    ++state.t;
    const double t = static_cast<double>(state.t);
    const double m_correction = 1.0 - std::pow(config.beta1, t);
    const double v_correction = 1.0 - std::pow(config.beta2, t);
    for (std::size_t b = 0; b < p_blocks.size(); ++b) {
        auto theta = p_blocks[b].map();
        const auto g = g_blocks[b].map();
        auto& m = state.m[b];
        auto& v = state.v[b];
        m = config.beta1 * m + (1.0 - config.beta1) * g;
        v = config.beta2 * v + (1.0 - config.beta2) * g.cwiseProduct(g);
        theta.array() -= config.learning_rate * (m.array() / m_correction) /
                         ((v.array() / v_correction).sqrt() + config.epsilon);
    }
}

namespace {

Eigen::MatrixXd gather_columns(const Eigen::MatrixXd& x, std::span<const std::size_t> idx) {
    Eigen::MatrixXd out(x.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) {
        out.col(static_cast<Eigen::Index>(k)) = x.col(static_cast<Eigen::Index>(idx[k]));
    }
    return out;
}

double infer_mse(const neural::NetworkSpec& spec, const NetworkParams<double>& params, const SupervisedDataset& ds) {
    const Eigen::VectorXd pred = neural::predict_batch(spec, params, ds.x);
    return mse_loss(pred, ds.y);
}

}  // namespace

TrainResult train(const neural::NetworkSpec& spec, const SplitDataset& dataset, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
    Rng init_rng(derive_seed(config.seed, "init"));
    return train_from(spec, neural::init_params<double>(spec, init_rng), dataset, config, on_epoch);
}

TrainResult train_from(const neural::NetworkSpec& spec, NetworkParams<double> params, const SplitDataset& dataset,
                       const TrainConfig& config, const EpochCallback& on_epoch) {
    config.validate();
    spec.validate();
    if (dataset.train.size() == 0 || dataset.val.size() == 0) {
        fail(ErrorCode::validation, "training needs non-empty train and validation splits");
    }
    if (dataset.train.window != spec.window) {
        fail(ErrorCode::dimension, "dataset window does not match the network spec");
    }

    Rng shuffle_rng(derive_seed(config.seed, "shuffle"));
    Rng dropout_rng(derive_seed(config.seed, "dropout"));
    AdamState adam = AdamState::zeros_like(params);

    TrainResult result;
    result.checkpoint.spec = spec;
    const std::size_t n = dataset.train.size();
    const auto batch = static_cast<std::size_t>(config.batch_size);

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        const auto order = shuffle_rng.permutation(n);
        std::size_t batch_index = 0;
        for (std::size_t start = 0; start < n; start += batch, ++batch_index) {
            const std::span<const std::size_t> idx(order.data() + start, std::min(batch, n - start));
            const Eigen::MatrixXd xb = gather_columns(dataset.train.x, idx);
            Eigen::RowVectorXd yb(static_cast<Eigen::Index>(idx.size()));
            for (std::size_t k = 0; k < idx.size(); ++k) {
                yb(static_cast<Eigen::Index>(k)) = dataset.train.y(static_cast<Eigen::Index>(idx[k]));
            }

            const auto step = [&] {
                auto fwd = neural::forward(spec, params, xb, neural::Mode::train, &dropout_rng);
                const Eigen::MatrixXd residual = fwd.prediction - yb;
                if (!std::isfinite(residual.squaredNorm())) {
                    fail(ErrorCode::numeric, "training diverged");
                }
                const Eigen::MatrixXd d_pred = (2.0 / static_cast<double>(idx.size())) * residual;
                adam_update(params, neural::backward(spec, params, fwd.cache, d_pred), adam, config);
            };
            try {
                step();
            } catch (const Error& e) {
                fail_with_context(e, "epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch_index));
            }
        }

        EpochRecord rec;
        rec.epoch = epoch;
        try {
            rec.train_loss = infer_mse(spec, params, dataset.train);
            rec.val_loss = infer_mse(spec, params, dataset.val);
        } catch (const Error& e) {
            fail_with_context(e, "after epoch " + std::to_string(epoch));
        }
        rec.train_rmse = std::sqrt(rec.train_loss);
        rec.val_rmse = std::sqrt(rec.val_loss);
        if (!std::isfinite(rec.train_loss) || !std::isfinite(rec.val_loss)) {
            fail(ErrorCode::numeric, "non-finite loss after epoch " + std::to_string(epoch));
        }
        result.history.epochs.push_back(rec);
        if (epoch == 1 || rec.val_loss < result.checkpoint.best_val_loss) {
            result.checkpoint.best_epoch = epoch;
            result.checkpoint.best_val_loss = rec.val_loss;
            result.checkpoint.params = params;
        }
        if (on_epoch) {
            on_epoch(rec);
        }
    }
    return result;
}

Eigen::VectorXd predict_series(const Checkpoint& checkpoint, const Eigen::MatrixXd& windows) {
    return neural::predict_batch(checkpoint.spec, checkpoint.params, windows);
}

}  // namespace loadcast
