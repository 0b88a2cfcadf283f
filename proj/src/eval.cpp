#include "loadcast/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "loadcast/errors.hpp"
#include "loadcast/meter_ingest.hpp"

namespace loadcast {

EvalReport evaluate(std::span<const double> pred, std::span<const double> actual, double epsilon,
                    std::string scale_note) {
    if (pred.size() != actual.size()) {
        fail(ErrorCode::dimension, "prediction length " + std::to_string(pred.size()) + " != actual length " +
                                       std::to_string(actual.size()));
    }
    if (pred.empty()) {
        fail(ErrorCode::empty_series, "cannot evaluate empty vectors");
    }
    if (!(epsilon > 0.0)) {
        fail(ErrorCode::validation, "MAPE epsilon must be positive");
    }
    const std::size_t n = pred.size();
    const double nd = static_cast<double>(n);
    double sse = 0.0;
    double sae = 0.0;
    double sape = 0.0;
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = actual[i] - pred[i];
        sse += e * e;
        sae += std::abs(e);
        sape += std::abs(e) / std::max(std::abs(actual[i]), epsilon);
        mean += actual[i];
    }
    mean /= nd;
    double sst = 0.0;
    for (const double a : actual) {
        sst += (a - mean) * (a - mean);
    }
    EvalReport r;
    r.n = n;
    r.mse = sse / nd;
    r.rmse = std::sqrt(r.mse);
    r.mae = sae / nd;
    r.mape = sape / nd;
    r.scale_note = std::move(scale_note);
    if (sst > 0.0) {
        r.r2 = 1.0 - sse / sst;
    } else {
        r.note = "r2 undefined: actual values have zero variance";
    }
    if (!std::isfinite(r.mse) || !std::isfinite(r.mape)) {
        fail(ErrorCode::numeric, "non-finite metric (check predictions for NaN)");
    }
    return r;
}

EvalReport evaluate(const Eigen::VectorXd& pred, const Eigen::VectorXd& actual, double epsilon,
                    std::string scale_note) {
    return evaluate(std::span<const double>(pred.data(), static_cast<std::size_t>(pred.size())),
                    std::span<const double>(actual.data(), static_cast<std::size_t>(actual.size())), epsilon,
                    std::move(scale_note));
}

Eigen::VectorXd persistence_baseline(const SupervisedDataset& dataset) {
    if (dataset.window < 1 || dataset.x.rows() != dataset.window) {
        fail(ErrorCode::dimension, "persistence baseline needs a windowed dataset");
    }
    return dataset.x.row(dataset.window - 1).transpose();
}

ComparisonTable compare_models(std::vector<std::pair<std::string, EvalReport>> reports) {
    if (reports.empty()) {
        fail(ErrorCode::validation, "comparison needs at least one report");
    }
    ComparisonTable table;
    table.columns = std::move(reports);
    std::set<std::size_t> sizes;
    std::set<std::string> scales;
    for (const auto& [name, report] : table.columns) {
        sizes.insert(report.n);
        scales.insert(report.scale_note);
    }
    if (sizes.size() > 1) {
        std::string w = "models were scored on different sample counts:";
        for (const auto& [name, report] : table.columns) {
            w += " " + name + "=" + std::to_string(report.n);
        }
        table.warnings.push_back(w);
    }
    if (scales.size() > 1) {
        std::string w = "models were scored on different scales:";
        for (const auto& [name, report] : table.columns) {
            w += " " + name + "=" + report.scale_note;
        }
        w += " (error magnitudes are not comparable)";
        table.warnings.push_back(w);
    }
    return table;
}

namespace {

struct Row {
    const char* label;
    std::optional<double> (*get)(const EvalReport&);
};

const Row kRows[] = {
    {"MSE", [](const EvalReport& r) -> std::optional<double> { return r.mse; }},
    {"RMSE", [](const EvalReport& r) -> std::optional<double> { return r.rmse; }},
    {"R-squared", [](const EvalReport& r) { return r.r2; }},
    {"MAE", [](const EvalReport& r) -> std::optional<double> { return r.mae; }},
    {"MAPE", [](const EvalReport& r) -> std::optional<double> { return r.mape; }},
};

std::string fixed4(std::optional<double> v) {
    if (!v) {
        return "n/a";
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", *v);
    return buf;
}

}  // namespace

std::string render_text(const ComparisonTable& table) {
    std::vector<std::vector<std::string>> cells;
    std::vector<std::string> header{"Metric"};
    for (const auto& [name, report] : table.columns) {
        header.push_back(name);
    }
    cells.push_back(header);
    for (const Row& row : kRows) {
        std::vector<std::string> line{row.label};
        for (const auto& [name, report] : table.columns) {
            line.push_back(fixed4(row.get(report)));
        }
        cells.push_back(line);
    }
    std::vector<std::string> n_line{"n"};
    std::vector<std::string> scale_line{"scale"};
    for (const auto& [name, report] : table.columns) {
        n_line.push_back(std::to_string(report.n));
        scale_line.push_back(report.scale_note);
    }
    cells.push_back(n_line);
    cells.push_back(scale_line);

    std::vector<std::size_t> width(header.size(), 0);
    for (const auto& line : cells) {
        for (std::size_t c = 0; c < line.size(); ++c) {
            width[c] = std::max(width[c], line[c].size());
        }
    }
    std::string out;
    for (std::size_t r = 0; r < cells.size(); ++r) {
        for (std::size_t c = 0; c < cells[r].size(); ++c) {
            const std::string& s = cells[r][c];
            if (c == 0) {
                out += s + std::string(width[c] - s.size(), ' ');
            } else {
                out += "  " + std::string(width[c] - s.size(), ' ') + s;
            }
        }
        out += "\n";
        if (r == 0) {
            std::size_t total = width[0];
            for (std::size_t c = 1; c < width.size(); ++c) {
                total += 2 + width[c];
            }
            out += std::string(total, '-') + "\n";
        }
    }
    for (const auto& w : table.warnings) {
        out += "warning: " + w + "\n";
    }
    return out;
}

std::string render_csv(const ComparisonTable& table) {
    std::string out = "metric";
    for (const auto& [name, report] : table.columns) {
        out += "," + name;
    }
    out += "\n";
    for (const Row& row : kRows) {
        out += row.label;
        for (const auto& [name, report] : table.columns) {
            const auto v = row.get(report);
            out += "," + (v ? format_double(*v) : std::string());
        }
        out += "\n";
    }
    out += "n";
    for (const auto& [name, report] : table.columns) {
        out += "," + std::to_string(report.n);
    }
    out += "\nscale";
    for (const auto& [name, report] : table.columns) {
        out += "," + report.scale_note;
    }
    out += "\n";
    return out;
}

nlohmann::ordered_json report_to_json(const EvalReport& r) {
    nlohmann::ordered_json j;
    j["mse"] = r.mse;
    j["rmse"] = r.rmse;
    j["r2"] = r.r2 ? nlohmann::ordered_json(*r.r2) : nlohmann::ordered_json(nullptr);
    j["mae"] = r.mae;
    j["mape"] = r.mape;
    j["n"] = r.n;
    j["scale_note"] = r.scale_note;
    if (!r.note.empty()) {
        j["note"] = r.note;
    }
    return j;
}

nlohmann::ordered_json table_to_json(const ComparisonTable& table) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& [name, report] : table.columns) {
        j[name] = report_to_json(report);
    }
    if (!table.warnings.empty()) {
        j["warnings"] = table.warnings;
    }
    return j;
}

}  // namespace loadcast
