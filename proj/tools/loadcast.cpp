// loadcast: command-line front end for the forecasting workbench.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "loadcast/arima/adf.hpp"
#include "loadcast/arima/stepwise.hpp"
#include "loadcast/errors.hpp"
#include "loadcast/eval.hpp"
#include "loadcast/meter_ingest.hpp"
#include "loadcast/workbench/config.hpp"
#include "loadcast/workbench/pipeline.hpp"
#include "loadcast/workbench/synth.hpp"

using namespace loadcast;
using namespace loadcast::workbench;

namespace {

struct CommonOptions {
    std::string config_path;
    std::vector<std::string> sets;
    std::string input;
    std::string input_format;
    std::string output;
    std::string model;
    std::vector<std::string> seed;  // kept as text so overrides go through one parser
    bool quiet = false;
};

void add_common(CLI::App* cmd, CommonOptions& o, bool with_output = true) {
    cmd->add_option("-c,--config", o.config_path, "key=value or JSON config file");
    cmd->add_option("--set", o.sets, "override one config key (key=value); repeatable");
    cmd->add_option("-i,--input", o.input, "meter CSV (omit for the synthetic household)");
    cmd->add_option("--input-format", o.input_format, "wide | long");
    cmd->add_option("--seed", o.seed, "top-level seed")->expected(1);
    if (with_output) {
        cmd->add_option("-o,--output", o.output, "run directory");
    }
    cmd->add_flag("-q,--quiet", o.quiet, "no progress output");
}

RunConfig resolve(const CommonOptions& o) {
    Overrides overrides;
    for (const std::string& s : o.sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) {
            fail(ErrorCode::usage, "--set expects key=value, got '" + s + "'");
        }
        overrides.emplace_back(s.substr(0, eq), s.substr(eq + 1));
    }
    // dedicated flags win over --set and the file
    if (!o.input.empty()) overrides.emplace_back("input", o.input);
    if (!o.input_format.empty()) overrides.emplace_back("input_format", o.input_format);
    if (!o.output.empty()) overrides.emplace_back("output_dir", o.output);
    if (!o.model.empty()) overrides.emplace_back("model", o.model);
    if (!o.seed.empty()) overrides.emplace_back("seed", o.seed.front());
    return o.config_path.empty() ? parse_config("", overrides) : parse_config_file(o.config_path, overrides);
}

LogFn logger(bool quiet) {
    if (quiet) {
        return {};
    }
    return [](const std::string& line) { std::cerr << line << "\n"; };
}

std::vector<int> parse_windows(const std::string& text) {
    std::vector<int> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const std::string cell = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        try {
            std::size_t used = 0;
            const int w = std::stoi(cell, &used);
            if (used != cell.size()) {
                throw std::invalid_argument(cell);
            }
            out.push_back(w);
        } catch (const std::exception&) {
            fail(ErrorCode::usage, "--window-sweep expects comma-separated integers, got '" + text + "'");
        }
        if (comma == std::string::npos) {
            break;
        }
        start = comma + 1;
    }
    return out;
}

std::vector<double> arima_slice(const RunConfig& config, const std::vector<double>& values) {
    if (config.arima_search_slice == "full") {
        return values;
    }
    const auto [i1, i2] = split_boundaries(values.size(), config.split);
    (void)i2;
    return {values.begin(), values.begin() + static_cast<std::ptrdiff_t>(i1)};
}

int run(int argc, char** argv) {
    CLI::App app{"loadcast: short-term household load forecasting workbench"};
    app.require_subcommand(1);

    // ingest
    std::string ingest_in, ingest_out, zero_policy = "per_point";
    auto* ingest = app.add_subcommand("ingest", "wide meter CSV -> cleaned long CSV");
    ingest->add_option("-i,--input", ingest_in, "wide CSV")->required();
    ingest->add_option("-o,--output", ingest_out, "long CSV (stdout if omitted)");
    ingest->add_option("--zero-policy", zero_policy, "per_point | full_days");

    // synth
    CommonOptions synth_opts;
    std::string synth_out, synth_format = "long";
    auto* synth = app.add_subcommand("synth", "write the synthetic household series");
    synth->add_option("-c,--config", synth_opts.config_path, "config file (synth.* keys)");
    synth->add_option("--set", synth_opts.sets, "override one config key; repeatable");
    synth->add_option("--seed", synth_opts.seed, "seed")->expected(1);
    synth->add_option("-o,--output", synth_out, "output CSV (stdout if omitted)");
    synth->add_option("--format", synth_format, "long | wide");

    // train
    CommonOptions train_opts;
    std::string sweep;
    auto* train_cmd = app.add_subcommand("train", "run the end-to-end pipeline");
    add_common(train_cmd, train_opts);
    train_cmd->add_option("-m,--model", train_opts.model, "lstm | gru | arima | all");
    train_cmd->add_option("--window-sweep", sweep, "comma-separated window sizes, one run each");

    // evaluate
    std::string eval_path, eval_scale = "normalized";
    double eval_eps = kDefaultMapeEpsilon;
    auto* evaluate_cmd = app.add_subcommand("evaluate", "score a predictions CSV");
    evaluate_cmd->add_option("-p,--predictions", eval_path, "index,timestamp,actual,predicted CSV")->required();
    evaluate_cmd->add_option("--epsilon", eval_eps, "MAPE denominator floor");
    evaluate_cmd->add_option("--scale", eval_scale, "scale label for the report");

    // compare
    std::string run_dir, compare_format = "text", split_name = "test";
    std::vector<std::string> named;
    auto* compare = app.add_subcommand("compare", "comparison table from stored predictions");
    compare->add_option("-r,--run-dir", run_dir, "run directory with predictions_<model>_<split>.csv");
    compare->add_option("-p,--predictions", named, "name=path; repeatable");
    compare->add_option("--split", split_name, "train | val | test");
    compare->add_option("--format", compare_format, "text | csv | json");

    // adf
    CommonOptions adf_opts;
    int max_lag = -1;
    auto* adf = app.add_subcommand("adf", "augmented Dickey-Fuller test");
    add_common(adf, adf_opts, false);
    adf->add_option("--max-lag", max_lag, "largest lag considered (default from series length)");

    // search-order
    CommonOptions search_opts;
    auto* search = app.add_subcommand("search-order", "stepwise ARIMA order search");
    add_common(search, search_opts, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    if (ingest->parsed()) {
        if (zero_policy != "per_point" && zero_policy != "full_days") {
            fail(ErrorCode::usage, "--zero-policy must be per_point or full_days");
        }
        const ZeroPolicy policy = zero_policy == "full_days" ? ZeroPolicy::full_days : ZeroPolicy::per_point;
        const MeterSeries raw = transpose_to_long(parse_wide_csv(read_text_file(ingest_in)));
        const MeterSeries cleaned = drop_zero_readings(raw, policy);
        const std::string csv = write_long_csv(cleaned);
        if (ingest_out.empty()) {
            std::cout << csv;
        } else {
            write_text_file(ingest_out, csv);
        }
        std::cerr << raw.size() << " readings, " << raw.size() - cleaned.size() << " zero readings dropped, "
                  << cleaned.size() << " kept\n";
        return 0;
    }
    if (synth->parsed()) {
        const RunConfig config = resolve(synth_opts);
        SynthProfile profile = config.synth;
        profile.seed = config.seed;
        const MeterSeries series = synth_household(profile);
        std::string csv;
        if (synth_format == "wide") {
            WideMeterTable table;
            for (std::size_t i = 0; i + kHoursPerDay <= series.size(); i += kHoursPerDay) {
                WideRow row;
                row.reading_date = series.points[i].timestamp.date;
                for (int h = 0; h < kHoursPerDay; ++h) {
                    row.readings[static_cast<std::size_t>(h)] = series.points[i + static_cast<std::size_t>(h)].kwh;
                }
                table.rows.push_back(row);
            }
            csv = write_wide_csv(table);
        } else if (synth_format == "long") {
            csv = write_long_csv(series);
        } else {
            fail(ErrorCode::usage, "--format must be long or wide");
        }
        if (synth_out.empty()) {
            std::cout << csv;
        } else {
            write_text_file(synth_out, csv);
        }
        return 0;
    }
    if (train_cmd->parsed()) {
        const RunConfig config = resolve(train_opts);
        if (!sweep.empty()) {
            const auto results = run_window_sweep(config, parse_windows(sweep), logger(train_opts.quiet));
            std::cout << "sweep written to " << resolve_output_dir(config) << "/sweep.csv\n";
            return results.empty() ? 2 : 0;
        }
        const PipelineResult result = run_pipeline(config, logger(train_opts.quiet));
        std::cout << render_text(result.table);
        return 0;
    }
    if (evaluate_cmd->parsed()) {
        const PredictionTable t = parse_predictions_csv(read_text_file(eval_path));
        const EvalReport r = evaluate(t.predicted, t.actual, eval_eps, eval_scale);
        std::cout << report_to_json(r).dump(2) << "\n";
        return 0;
    }
    if (compare->parsed()) {
        std::vector<std::pair<std::string, std::string>> sources;
        if (!run_dir.empty()) {
            for (const char* m : {"lstm", "gru", "arima", "persistence"}) {
                const std::string path = run_dir + "/predictions_" + m + "_" + split_name + ".csv";
                if (std::FILE* f = std::fopen(path.c_str(), "rb")) {
                    std::fclose(f);
                    sources.emplace_back(m, path);
                }
            }
        }
        for (const std::string& s : named) {
            const auto eq = s.find('=');
            if (eq == std::string::npos) {
                fail(ErrorCode::usage, "--predictions expects name=path, got '" + s + "'");
            }
            sources.emplace_back(s.substr(0, eq), s.substr(eq + 1));
        }
        if (sources.empty()) {
            fail(ErrorCode::usage, "compare needs --run-dir or --predictions");
        }
        // The ARIMA file in a kWh-scale run is tagged from the run's config.
        bool kwh_arima = false;
        if (!run_dir.empty()) {
            try {
                kwh_arima = parse_config_file(run_dir + "/config.json").paper_faithful_scales;
            } catch (const Error&) {
            }
        }
        std::vector<std::pair<std::string, EvalReport>> reports;
        for (const auto& [name, path] : sources) {
            const PredictionTable t = parse_predictions_csv(read_text_file(path));
            reports.emplace_back(name, evaluate(t.predicted, t.actual, kDefaultMapeEpsilon,
                                                (kwh_arima && name == "arima") ? "kWh" : "normalized"));
        }
        const ComparisonTable table = compare_models(reports);
        if (compare_format == "csv") {
            std::cout << render_csv(table);
        } else if (compare_format == "json") {
            std::cout << table_to_json(table).dump(2) << "\n";
        } else if (compare_format == "text") {
            std::cout << render_text(table);
        } else {
            fail(ErrorCode::usage, "--format must be text, csv or json");
        }
        return 0;
    }
    if (adf->parsed()) {
        const RunConfig config = resolve(adf_opts);
        const std::vector<double> values = arima_slice(config, load_series(config).values());
        const arima::AdfResult r =
            max_lag >= 0 ? arima::adf_test(values, max_lag) : arima::adf_test(values);
        std::cout << arima::format_adf_report(r);
        return 0;
    }
    if (search->parsed()) {
        const RunConfig config = resolve(search_opts);
        const std::vector<double> values = arima_slice(config, load_series(config).values());
        try {
            const arima::SearchResult r = arima::stepwise_search(values);
            std::cout << arima::format_trace(r.trace);
        } catch (const arima::SearchError& e) {
            std::cout << arima::format_trace(e.trace());
            throw;
        }
        return 0;
    }
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const Error& e) {
        std::cerr << "loadcast: " << e.what() << "\n";
        return e.is_validation() ? 1 : 2;
    } catch (const std::exception& e) {
        std::cerr << "loadcast: " << e.what() << "\n";
        return 2;
    }
}
