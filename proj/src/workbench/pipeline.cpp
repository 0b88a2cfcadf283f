#include "loadcast/workbench/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <utility>

#include "loadcast/errors.hpp"
#include "loadcast/neural/model_io.hpp"
#include "loadcast/workbench/svg_plot.hpp"
#include "loadcast/workbench/synth.hpp"

namespace loadcast::workbench {

namespace fs = std::filesystem;

namespace {

void say(const LogFn& log, const std::string& message) {
    if (log) {
        log(message);
    }
}

// Runs one stage; failures get the stage name prepended and leave a marker.
template <typename F>
auto stage(const std::string& run_dir, const std::string& name, F&& body) {
    try {
        return body();
    } catch (const Error& e) {
        try {
            write_text_file(run_dir + "/INCOMPLETE", "stage: " + name + "\n" + e.what() + "\n");
        } catch (const Error&) {
        }
        throw Error(e.code(), "stage '" + name + "': " + e.what());
    } catch (const std::exception& e) {
        try {
            write_text_file(run_dir + "/INCOMPLETE", "stage: " + name + "\n" + e.what() + "\n");
        } catch (const Error&) {
        }
        throw Error(ErrorCode::io, "stage '" + name + "': " + e.what());
    }
}

PredictionTable make_table(const PreparedData& data, const SupervisedDataset& split, const Eigen::VectorXd& pred) {
    PredictionTable t;
    for (std::size_t i = 0; i < split.size(); ++i) {
        const std::size_t idx = split.target_index[i];
        t.index.push_back(idx);
        t.timestamp.push_back(format_timestamp(data.series.points[idx].timestamp));
        t.actual.push_back(split.y(static_cast<Eigen::Index>(i)));
        t.predicted.push_back(pred(static_cast<Eigen::Index>(i)));
    }
    return t;
}

// Writes the table, reads it back and scores what was stored.
EvalReport store_and_score(const std::string& path, const PredictionTable& table, double epsilon,
                           const std::string& scale) {
    write_text_file(path, write_predictions_csv(table));
    const PredictionTable stored = parse_predictions_csv(read_text_file(path));
    return evaluate(stored.predicted, stored.actual, epsilon, scale);
}

std::vector<double> tail_of(const std::vector<double>& v, std::size_t count) {
    const std::size_t k = std::min(count, v.size());
    return {v.end() - static_cast<std::ptrdiff_t>(k), v.end()};
}

void plot_history(const TrainHistory& history, const std::string& title, const std::string& path) {
    PlotSeries train{"train loss", {}, "#1f77b4"};
    PlotSeries val{"val loss", {}, "#ff7f0e"};
    for (const auto& rec : history.epochs) {
        train.values.push_back(rec.train_loss);
        val.values.push_back(rec.val_loss);
    }
    write_text_file(path, render_line_chart({train, val}, title, "epoch", "MSE"));
}

nlohmann::ordered_json adf_json(const arima::AdfResult& r) {
    return {{"statistic", r.statistic},
            {"p_value", r.p_value},
            {"used_lags", r.used_lags},
            {"n_obs", r.n_obs},
            {"critical_values",
             {{"1%", r.critical_values.one_percent},
              {"5%", r.critical_values.five_percent},
              {"10%", r.critical_values.ten_percent}}},
            {"icbest", r.icbest}};
}

}  // namespace

MeterSeries load_series(const RunConfig& config, std::size_t* dropped) {
    MeterSeries raw;
    if (config.input.empty()) {
        SynthProfile profile = config.synth;
        profile.seed = config.seed;
        raw = synth_household(profile);
    } else if (config.input_format == "long") {
        raw = parse_long_csv(read_text_file(config.input));
    } else {
        raw = transpose_to_long(parse_wide_csv(read_text_file(config.input)));
    }
    const ZeroPolicy policy = config.zero_policy == "full_days" ? ZeroPolicy::full_days : ZeroPolicy::per_point;
    MeterSeries cleaned = drop_zero_readings(raw, policy);
    if (dropped != nullptr) {
        *dropped = raw.size() - cleaned.size();
    }
    return cleaned;
}

PreparedData prepare_data(const RunConfig& config) {
    std::size_t dropped = 0;
    MeterSeries series = load_series(config, &dropped);
    return prepare_data(config, std::move(series), dropped);
}

PreparedData prepare_data(const RunConfig& config, MeterSeries series, std::size_t dropped) {
    PreparedData d;
    d.series = std::move(series);
    d.dropped_zero_points = dropped;
    d.values = d.series.values();
    const std::size_t n = d.values.size();
    if (n <= static_cast<std::size_t>(config.window)) {
        fail(ErrorCode::insufficient_data, "series of " + std::to_string(n) + " points is too short for window " +
                                               std::to_string(config.window));
    }
    const SplitBasis basis = config.paper_faithful_split ? SplitBasis::raw_length : SplitBasis::sample_count;
    if (config.strict_scaler) {
        // Fit on the values that training samples can see: lags and targets
        // up to the first validation target.
        const std::size_t samples = n - static_cast<std::size_t>(config.window);
        const auto [b1, b2] = split_boundaries(basis == SplitBasis::raw_length ? n : samples, config.split);
        (void)b2;
        const std::size_t last = std::min(n, std::min(b1, samples) + static_cast<std::size_t>(config.window));
        d.scaler = fit_minmax(std::span<const double>(d.values.data(), last));
    } else {
        d.scaler = fit_minmax(d.values);
    }
    d.normalized = transform_minmax(d.values, d.scaler);
    if (config.gap_respecting_windows) {
        std::vector<std::int64_t> hours;
        hours.reserve(n);
        for (const auto& p : d.series.points) {
            hours.push_back(p.timestamp.hours_since_epoch());
        }
        d.windows = make_windows_contiguous(d.normalized, hours, config.window);
    } else {
        d.windows = make_windows(d.normalized, config.window);
    }
    d.split = chronological_split(d.windows, n, config.split, basis);
    return d;
}

std::string write_predictions_csv(const PredictionTable& t) {
    std::string out = "index,timestamp,actual,predicted\n";
    for (std::size_t i = 0; i < t.actual.size(); ++i) {
        out += std::to_string(t.index[i]) + "," + t.timestamp[i] + "," + format_double(t.actual[i]) + "," +
               format_double(t.predicted[i]) + "\n";
    }
    return out;
}

PredictionTable parse_predictions_csv(std::string_view text) {
    PredictionTable t;
    std::size_t pos = 0;
    std::size_t line_no = 0;
    const auto number = [&](std::string_view cell, auto& out) {
        const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), out);
        if (cell.empty() || res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
            fail(ErrorCode::parse, "predictions line " + std::to_string(line_no) + ": bad number '" +
                                       std::string(cell) + "'");
        }
    };
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) {
            nl = text.size();
        }
        std::string_view line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        if (line_no == 1) {
            if (line != "index,timestamp,actual,predicted") {
                fail(ErrorCode::parse, "predictions header must be 'index,timestamp,actual,predicted'");
            }
            continue;
        }
        if (line.empty()) {
            continue;
        }
        std::string_view cells[4];
        std::size_t start = 0;
        for (int c = 0; c < 4; ++c) {
            const auto comma = c < 3 ? line.find(',', start) : std::string_view::npos;
            if (c < 3 && comma == std::string_view::npos) {
                fail(ErrorCode::malformed_row, "predictions line " + std::to_string(line_no) + ": expected 4 cells");
            }
            cells[c] = line.substr(start, c < 3 ? comma - start : std::string_view::npos);
            start = comma + 1;
        }
        if (cells[3].find(',') != std::string_view::npos) {
            fail(ErrorCode::malformed_row, "predictions line " + std::to_string(line_no) + ": expected 4 cells");
        }
        std::size_t idx = 0;
        double a = 0.0;
        double p = 0.0;
        number(cells[0], idx);
        number(cells[2], a);
        number(cells[3], p);
        t.index.push_back(idx);
        t.timestamp.emplace_back(cells[1]);
        t.actual.push_back(a);
        t.predicted.push_back(p);
    }
    return t;
}

PipelineResult run_pipeline(const RunConfig& config, const LogFn& log) {
    config.validate();
    PipelineResult res;
    res.run_dir = resolve_output_dir(config);
    const std::string& dir = res.run_dir;
    try {
        fs::create_directories(dir + "/plots");
    } catch (const fs::filesystem_error& e) {
        fail(ErrorCode::io, "cannot create run directory '" + dir + "': " + e.what());
    }
    std::error_code ec;
    fs::remove(dir + "/INCOMPLETE", ec);

    write_text_file(dir + "/config.json", config_to_json(config).dump(2) + "\n");
    write_text_file(dir + "/config.txt", config_to_text(config));

    res.data = stage(dir, "ingest", [&] { return prepare_data(config); });
    const PreparedData& data = res.data;
    write_text_file(dir + "/series.csv", write_long_csv(data.series));
    say(log, "series: " + std::to_string(data.values.size()) + " points (" +
                 std::to_string(data.dropped_zero_points) + " zero readings dropped); samples train/val/test " +
                 std::to_string(data.split.train.size()) + "/" + std::to_string(data.split.val.size()) + "/" +
                 std::to_string(data.split.test.size()));

    nlohmann::ordered_json metrics;
    metrics["series"] = {{"length", data.values.size()},
                         {"dropped_zero_points", data.dropped_zero_points},
                         {"scaler", {{"min", data.scaler.min}, {"max", data.scaler.max}}}};
    metrics["samples"] = {{"total", data.windows.size()},
                          {"train", data.split.train.size()},
                          {"val", data.split.val.size()},
                          {"test", data.split.test.size()}};
    nlohmann::ordered_json per_split = nlohmann::ordered_json::object();
    std::vector<std::pair<std::string, EvalReport>> test_reports;
    const double eps = config.mape_epsilon;

    const struct {
        const char* name;
        const SupervisedDataset* set;
    } splits[] = {{"train", &data.split.train}, {"val", &data.split.val}, {"test", &data.split.test}};

    for (const auto kind : {neural::CellKind::lstm, neural::CellKind::gru}) {
        const std::string name(neural::to_string(kind));
        if (!config.runs(name)) {
            continue;
        }
        NeuralOutcome outcome;
        outcome.name = name;
        neural::NetworkSpec spec = neural::NetworkSpec::paper(kind);
        spec.window = config.window;
        spec.units = config.units;
        spec.dropout_rate = config.dropout;
        spec.dense_units = config.dense_units;
        TrainConfig tc = config.train;
        tc.seed = config.seed;
        say(log, "training " + name + " (" + std::to_string(spec.parameter_count()) + " parameters, " +
                     std::to_string(tc.epochs) + " epochs)");
        outcome.result = stage(dir, "train-" + name, [&] {
            return train(spec, data.split, tc, [&](const EpochRecord& rec) {
                if (rec.epoch == 1 || rec.epoch % 10 == 0 || rec.epoch == tc.epochs) {
                    char buf[160];
                    std::snprintf(buf, sizeof buf, "  %s epoch %3d  loss %.6f  val_loss %.6f", name.c_str(), rec.epoch,
                                  rec.train_loss, rec.val_loss);
                    say(log, buf);
                }
            });
        });
        const Checkpoint& ck = outcome.result.checkpoint;
        stage(dir, "save-" + name, [&] {
            neural::SavedModel saved{ck.spec, ck.params, data.scaler,
                                     {{"best_epoch", ck.best_epoch}, {"best_val_loss", ck.best_val_loss},
                                      {"seed", config.seed}}};
            neural::save_model(dir + "/model_" + name + ".json", saved);
            write_text_file(dir + "/history_" + name + ".csv", outcome.result.history.to_csv());
            return 0;
        });
        nlohmann::ordered_json reports = nlohmann::ordered_json::object();
        stage(dir, "predict-" + name, [&] {
            for (const auto& s : splits) {
                const Eigen::VectorXd pred = predict_series(ck, s.set->x);
                const PredictionTable table = make_table(data, *s.set, pred);
                const EvalReport report =
                    store_and_score(dir + "/predictions_" + name + "_" + s.name + ".csv", table, eps, "normalized");
                reports[s.name] = report_to_json(report);
                if (std::string(s.name) == "test") {
                    test_reports.emplace_back(name, report);
                    emit_plot(table.actual, table.predicted, name + ": test set, actual vs predicted",
                              dir + "/plots/" + name + "_test.svg");
                }
                if (std::string(s.name) == "train") {
                    const auto n = static_cast<std::size_t>(config.plot_points);
                    emit_plot(tail_of(table.actual, n), tail_of(table.predicted, n),
                              name + ": last " + std::to_string(std::min(n, table.actual.size())) +
                                  " training hours, actual vs predicted",
                              dir + "/plots/" + name + "_train_last" + std::to_string(config.plot_points) + ".svg");
                }
            }
            plot_history(outcome.result.history, name + ": training and validation loss",
                         dir + "/plots/" + name + "_loss.svg");
            return 0;
        });
        per_split[name] = reports;
        metrics[name] = {{"parameters", spec.parameter_count()},
                         {"best_epoch", ck.best_epoch},
                         {"best_val_loss", ck.best_val_loss},
                         {"final_train_loss", outcome.result.history.epochs.back().train_loss}};
        res.neural.push_back(std::move(outcome));
    }

    if (config.runs("arima")) {
        ArimaOutcome out;
        const std::size_t n = data.values.size();
        const auto [i1, i2] = split_boundaries(n, config.split);
        out.train_end = i1;
        out.val_end = i2;
        const std::span<const double> all(data.values);
        const std::span<const double> train_slice = all.first(i1);
        const std::span<const double> search_slice = config.arima_search_slice == "full" ? all : train_slice;

        out.adf = stage(dir, "adf", [&] { return arima::adf_test(search_slice); });
        write_text_file(dir + "/adf.txt", arima::format_adf_report(out.adf));
        write_text_file(dir + "/adf.json", adf_json(out.adf).dump(2) + "\n");
        say(log, "ADF statistic " + format_double(out.adf.statistic) + ", p-value " + format_double(out.adf.p_value));

        arima::ArimaOrder order;
        bool include_const = true;
        if (config.arima_order) {
            order = *config.arima_order;
            include_const = order.d <= 1;
        } else {
            out.search = stage(dir, "search-order", [&] {
                try {
                    return arima::stepwise_search(search_slice);
                } catch (const arima::SearchError& e) {
                    write_text_file(dir + "/search_trace.txt", arima::format_trace(e.trace()));
                    throw;
                }
            });
            write_text_file(dir + "/search_trace.txt", arima::format_trace(out.search->trace));
            order = out.search->order;
            include_const = out.search->include_const;
            say(log, "selected ARIMA" + arima::to_string(order) + (include_const ? " with constant" : ""));
        }
        out.fit = stage(dir, "fit-arima", [&] {
            try {
                return arima::fit_arima(train_slice, order, include_const);
            } catch (const arima::ConvergenceError& e) {
                say(log, std::string("warning: ") + e.what() + "; keeping the best parameters found");
                return e.best_so_far();
            }
        });
        write_text_file(dir + "/arima_fit.json", arima::fit_to_json(out.fit).dump(2) + "\n");

        nlohmann::ordered_json reports = nlohmann::ordered_json::object();
        stage(dir, "predict-arima", [&] {
            const std::vector<double> one_step = arima::one_step_predictions(out.fit, all);
            if (config.paper_faithful_scales) {
                // The ARIMA pipeline's own raw-series slices, scored in kWh.
                const std::pair<std::size_t, std::size_t> ranges[] = {{0, i1}, {i1, i2}, {i2, n}};
                for (int s = 0; s < 3; ++s) {
                    PredictionTable table;
                    for (std::size_t t = std::max<std::size_t>(ranges[s].first, order.d); t < ranges[s].second; ++t) {
                        table.index.push_back(t);
                        table.timestamp.push_back(format_timestamp(data.series.points[t].timestamp));
                        table.actual.push_back(data.values[t]);
                        table.predicted.push_back(one_step[t]);
                    }
                    const EvalReport report = store_and_score(
                        dir + "/predictions_arima_" + splits[s].name + ".csv", table, eps, "kWh");
                    reports[splits[s].name] = report_to_json(report);
                    if (s == 2) {
                        test_reports.emplace_back("arima", report);
                        emit_plot(table.actual, table.predicted, "arima: test set, actual vs predicted (kWh)",
                                  dir + "/plots/arima_test.svg");
                    }
                }
            } else {
                // Same targets as the neural models, on the shared normalized scale.
                for (const auto& s : splits) {
                    Eigen::VectorXd pred(static_cast<Eigen::Index>(s.set->size()));
                    for (std::size_t i = 0; i < s.set->size(); ++i) {
                        const double p = one_step[s.set->target_index[i]];
                        pred(static_cast<Eigen::Index>(i)) = transform_minmax(p, data.scaler);
                    }
                    const PredictionTable table = make_table(data, *s.set, pred);
                    const EvalReport report =
                        store_and_score(dir + "/predictions_arima_" + s.name + ".csv", table, eps, "normalized");
                    reports[s.name] = report_to_json(report);
                    if (std::string(s.name) == "test") {
                        test_reports.emplace_back("arima", report);
                        emit_plot(table.actual, table.predicted, "arima: test set, actual vs predicted",
                                  dir + "/plots/arima_test.svg");
                    }
                }
            }
            return 0;
        });
        per_split["arima"] = reports;
        nlohmann::ordered_json am;
        am["order"] = {{"p", out.fit.order.p}, {"d", out.fit.order.d}, {"q", out.fit.order.q}};
        am["include_const"] = out.fit.include_const;
        am["search_slice"] = config.arima_search_slice;
        am["search_points"] = search_slice.size();
        am["fit_points"] = train_slice.size();
        am["aic"] = out.fit.aic;
        am["loglik"] = out.fit.loglik;
        am["converged"] = out.fit.converged;
        am["adf"] = adf_json(out.adf);
        if (out.search) {
            am["search_aic"] = out.search->fit.aic;
            am["search_fits"] = out.search->trace.entries.size();
        }
        metrics["arima"] = am;
        res.arima = std::move(out);
    }

    stage(dir, "persistence", [&] {
        nlohmann::ordered_json reports = nlohmann::ordered_json::object();
        for (const auto& s : splits) {
            const PredictionTable table = make_table(data, *s.set, persistence_baseline(*s.set));
            const EvalReport report =
                store_and_score(dir + "/predictions_persistence_" + s.name + ".csv", table, eps, "normalized");
            reports[s.name] = report_to_json(report);
            if (std::string(s.name) == "test") {
                test_reports.emplace_back("persistence", report);
            }
        }
        per_split["persistence"] = reports;
        return 0;
    });

    res.table = compare_models(test_reports);
    metrics["comparison"] = table_to_json(res.table);
    metrics["splits"] = per_split;
    res.metrics = metrics;
    write_text_file(dir + "/metrics.json", metrics.dump(2) + "\n");
    write_text_file(dir + "/comparison.txt", render_text(res.table));
    write_text_file(dir + "/comparison.csv", render_csv(res.table));
    say(log, "wrote " + dir);
    return res;
}

std::vector<PipelineResult> run_window_sweep(const RunConfig& config, const std::vector<int>& windows,
                                             const LogFn& log) {
    if (windows.empty()) {
        fail(ErrorCode::validation, "window sweep needs at least one window");
    }
    const std::string base = resolve_output_dir(config);
    std::vector<PipelineResult> results;
    std::string summary = "window,model,mse,rmse,r2,mae,mape,n\n";
    for (const int w : windows) {
        RunConfig c = config;
        c.window = w;
        c.output_dir = base + "/window-" + std::to_string(w);
        say(log, "window " + std::to_string(w));
        results.push_back(run_pipeline(c, log));
        for (const auto& [name, r] : results.back().table.columns) {
            summary += std::to_string(w) + "," + name + "," + format_double(r.mse) + "," + format_double(r.rmse) +
                       "," + (r.r2 ? format_double(*r.r2) : std::string()) + "," + format_double(r.mae) + "," +
                       format_double(r.mape) + "," + std::to_string(r.n) + "\n";
        }
    }
    write_text_file(base + "/sweep.csv", summary);
    return results;
}

}  // namespace loadcast::workbench
