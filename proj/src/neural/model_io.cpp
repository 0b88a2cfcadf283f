#include "loadcast/neural/model_io.hpp"

#include <fstream>

#include "loadcast/errors.hpp"
#include "loadcast/meter_ingest.hpp"
#include "loadcast/neural/activation.hpp"

namespace loadcast::neural {

std::string_view to_string(Activation a) noexcept {
    switch (a) {
    case Activation::sigmoid: return "sigmoid";
    case Activation::tanh: return "tanh";
    case Activation::identity: return "identity";
    }
    return "?";
}

Activation activation_from_string(std::string_view name) {
    if (name == "sigmoid") return Activation::sigmoid;
    if (name == "tanh") return Activation::tanh;
    if (name == "identity") return Activation::identity;
    fail(ErrorCode::config, "unknown activation '" + std::string(name) + "'");
}

std::string_view to_string(CellKind kind) noexcept {
    return kind == CellKind::lstm ? "lstm" : "gru";
}

CellKind cell_kind_from_string(std::string_view name) {
    if (name == "lstm" || name == "LSTM") return CellKind::lstm;
    if (name == "gru" || name == "GRU") return CellKind::gru;
    fail(ErrorCode::config, "unknown recurrent cell '" + std::string(name) + "'");
}

void NetworkSpec::validate() const {
    if (window < 1 || features != 1 || units < 1 || dense_units < 1) {
        fail(ErrorCode::config, "network sizes must be positive (features must be 1)");
    }
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
        fail(ErrorCode::config, "dropout rate must lie in [0, 1)");
    }
}

std::size_t NetworkSpec::parameter_count() const {
    const auto u = static_cast<std::size_t>(units);
    const auto in = static_cast<std::size_t>(features);
    const auto d = static_cast<std::size_t>(dense_units);
    const std::size_t gates = cell == CellKind::lstm ? 4 : 3;
    // Both cell kinds carry hidden x (hidden + input) weights plus a bias per gate.
    const std::size_t layer1 = gates * (u * (u + in) + u);
    const std::size_t layer2 = gates * (u * (u + u) + u);
    return layer1 + layer2 + (u * d + d) + (d + 1);
}

nlohmann::json spec_to_json(const NetworkSpec& spec) {
    return {
        {"cell", to_string(spec.cell)},
        {"window", spec.window},
        {"features", spec.features},
        {"units", spec.units},
        {"dropout_rate", spec.dropout_rate},
        {"dense_units", spec.dense_units},
        {"gate_activation", to_string(spec.cell_activations.gate)},
        {"state_activation", to_string(spec.cell_activations.state)},
        {"dense_activation", to_string(spec.dense_activation)},
    };
}

NetworkSpec spec_from_json(const nlohmann::json& j) {
    NetworkSpec spec;
    try {
        spec.cell = cell_kind_from_string(j.at("cell").get<std::string>());
        spec.window = j.at("window").get<int>();
        spec.features = j.at("features").get<int>();
        spec.units = j.at("units").get<int>();
        spec.dropout_rate = j.at("dropout_rate").get<double>();
        spec.dense_units = j.at("dense_units").get<int>();
        spec.cell_activations.gate = activation_from_string(j.at("gate_activation").get<std::string>());
        spec.cell_activations.state = activation_from_string(j.at("state_activation").get<std::string>());
        spec.dense_activation = activation_from_string(j.at("dense_activation").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::parse, std::string("model spec: ") + e.what());
    }
    spec.validate();
    return spec;
}

nlohmann::json model_to_json(const SavedModel& model) {
    nlohmann::json blocks = nlohmann::json::array();
    for (const auto& block : param_blocks(const_cast<NetworkParams<double>&>(model.params))) {
        const auto m = block.map();
        std::vector<double> row_major;
        row_major.reserve(static_cast<std::size_t>(block.size()));
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            for (Eigen::Index c = 0; c < m.cols(); ++c) {
                row_major.push_back(m(r, c));
            }
        }
        blocks.push_back({{"name", block.name}, {"rows", block.rows}, {"cols", block.cols}, {"data", row_major}});
    }
    return {
        {"format", "loadcast-model"},
        {"version", kModelFormatVersion},
        {"spec", spec_to_json(model.spec)},
        {"scaler", {{"min", model.scaler.min}, {"max", model.scaler.max}}},
        {"blocks", blocks},
        {"metadata", model.metadata},
    };
}

SavedModel model_from_json(const nlohmann::json& j) {
    SavedModel model;
    try {
        if (j.at("format").get<std::string>() != "loadcast-model" || j.at("version").get<int>() != kModelFormatVersion) {
            fail(ErrorCode::parse, "unsupported model format or version");
        }
        model.spec = spec_from_json(j.at("spec"));
        model.scaler = {j.at("scaler").at("min").get<double>(), j.at("scaler").at("max").get<double>()};
        model.params = NetworkParams<double>::zeros(model.spec);
        auto blocks = param_blocks(model.params);
        const auto& stored = j.at("blocks");
        if (stored.size() != blocks.size()) {
            fail(ErrorCode::parse, "model has " + std::to_string(stored.size()) + " weight blocks, expected " +
                                       std::to_string(blocks.size()));
        }
        for (std::size_t b = 0; b < blocks.size(); ++b) {
            const auto& s = stored[b];
            auto& block = blocks[b];
            if (s.at("name").get<std::string>() != block.name || s.at("rows").get<Eigen::Index>() != block.rows ||
                s.at("cols").get<Eigen::Index>() != block.cols) {
                fail(ErrorCode::parse, "weight block " + std::to_string(b) + " does not match the spec");
            }
            const auto data = s.at("data").get<std::vector<double>>();
            if (static_cast<Eigen::Index>(data.size()) != block.size()) {
                fail(ErrorCode::parse, "weight block '" + block.name + "' has the wrong number of values");
            }
            auto m = block.map();
            std::size_t k = 0;
            for (Eigen::Index r = 0; r < m.rows(); ++r) {
                for (Eigen::Index c = 0; c < m.cols(); ++c) {
                    m(r, c) = data[k++];
                }
            }
        }
        if (j.contains("metadata")) {
            model.metadata = j.at("metadata");
        }
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::parse, std::string("model file: ") + e.what());
    }
    return model;
}

void save_model(const std::string& path, const SavedModel& model) {
    write_text_file(path, model_to_json(model).dump(1) + "\n");
}

SavedModel load_model(const std::string& path) {
    const std::string text = read_text_file(path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::parse, "model file '" + path + "': " + e.what());
    }
    return model_from_json(j);
}

}  // namespace loadcast::neural
