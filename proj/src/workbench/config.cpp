#include "loadcast/workbench/config.hpp"

#include <charconv>
#include <cstdlib>
#include <functional>
#include <map>

#include "loadcast/errors.hpp"
#include "loadcast/meter_ingest.hpp"

namespace loadcast::workbench {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* expected) {
    fail(ErrorCode::config, "key '" + key + "': cannot parse '" + value + "' as " + expected);
}

template <typename T>
T parse_integer(const std::string& key, const std::string& value) {
    T out{};
    const auto* end = value.data() + value.size();
    const auto res = std::from_chars(value.data(), end, out);
    if (value.empty() || res.ec != std::errc() || res.ptr != end) {
        bad_value(key, value, "an integer");
    }
    return out;
}

double parse_real(const std::string& key, const std::string& value) {
    double out = 0.0;
    const auto* end = value.data() + value.size();
    const auto res = std::from_chars(value.data(), end, out);
    if (value.empty() || res.ec != std::errc() || res.ptr != end) {
        bad_value(key, value, "a number");
    }
    return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes" || value == "on") {
        return true;
    }
    if (value == "false" || value == "0" || value == "no" || value == "off") {
        return false;
    }
    bad_value(key, value, "a boolean");
}

std::string one_of(const std::string& key, const std::string& value, std::initializer_list<const char*> choices) {
    std::string list;
    for (const char* c : choices) {
        if (value == c) {
            return value;
        }
        list += list.empty() ? c : std::string("|") + c;
    }
    fail(ErrorCode::config, "key '" + key + "': expected " + list + ", got '" + value + "'");
}

std::optional<arima::ArimaOrder> parse_order(const std::string& key, const std::string& value) {
    if (value == "auto") {
        return std::nullopt;
    }
    arima::ArimaOrder o;
    std::string v = value;
    if (!v.empty() && v.front() == '(' && v.back() == ')') {
        v = v.substr(1, v.size() - 2);
    }
    const auto c1 = v.find(',');
    const auto c2 = c1 == std::string::npos ? std::string::npos : v.find(',', c1 + 1);
    if (c2 == std::string::npos) {
        bad_value(key, value, "'auto' or p,d,q");
    }
    o.p = parse_integer<int>(key, trim(v.substr(0, c1)));
    o.d = parse_integer<int>(key, trim(v.substr(c1 + 1, c2 - c1 - 1)));
    o.q = parse_integer<int>(key, trim(v.substr(c2 + 1)));
    return o;
}

std::string real_text(double v) {
    return format_double(v);
}

struct Field {
    std::function<void(RunConfig&, const std::string&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
    enum Kind { text, integer, real, boolean } kind;
};

#define LC_REAL(member)                                                                              \
    Field{[](RunConfig& c, const std::string& k, const std::string& v) { c.member = parse_real(k, v); }, \
          [](const RunConfig& c) { return real_text(c.member); }, Field::real}
#define LC_INT(member, type)                                                                                 \
    Field{[](RunConfig& c, const std::string& k, const std::string& v) { c.member = parse_integer<type>(k, v); }, \
          [](const RunConfig& c) { return std::to_string(c.member); }, Field::integer}
#define LC_BOOL(member)                                                                              \
    Field{[](RunConfig& c, const std::string& k, const std::string& v) { c.member = parse_bool(k, v); }, \
          [](const RunConfig& c) { return std::string(c.member ? "true" : "false"); }, Field::boolean}
#define LC_TEXT(member)                                                                               \
    Field{[](RunConfig& c, const std::string&, const std::string& v) { c.member = v; },              \
          [](const RunConfig& c) { return c.member; }, Field::text}
#define LC_CHOICE(member, ...)                                                                                \
    Field{[](RunConfig& c, const std::string& k, const std::string& v) { c.member = one_of(k, v, {__VA_ARGS__}); }, \
          [](const RunConfig& c) { return c.member; }, Field::text}

const std::vector<std::pair<std::string, Field>>& fields() {
    static const std::vector<std::pair<std::string, Field>> table = {
        {"input", LC_TEXT(input)},
        {"input_format", LC_CHOICE(input_format, "wide", "long")},
        {"zero_policy", LC_CHOICE(zero_policy, "per_point", "full_days")},
        {"synth.days", LC_INT(synth.days, int)},
        {"synth.base_load", LC_REAL(synth.base_load)},
        {"synth.morning_amplitude", LC_REAL(synth.morning_amplitude)},
        {"synth.morning_hour", LC_REAL(synth.morning_hour)},
        {"synth.morning_width", LC_REAL(synth.morning_width)},
        {"synth.evening_amplitude", LC_REAL(synth.evening_amplitude)},
        {"synth.evening_hour", LC_REAL(synth.evening_hour)},
        {"synth.evening_width", LC_REAL(synth.evening_width)},
        {"synth.peak_shape", LC_REAL(synth.peak_shape)},
        {"synth.noise_std", LC_REAL(synth.noise_std)},
        {"synth.spike_probability", LC_REAL(synth.spike_probability)},
        {"synth.spike_amplitude", LC_REAL(synth.spike_amplitude)},
        {"synth.spike_decay", LC_REAL(synth.spike_decay)},
        {"synth.start_date", LC_TEXT(synth.start_date)},
        {"model", LC_CHOICE(model, "lstm", "gru", "arima", "all")},
        {"window", LC_INT(window, int)},
        {"split.train", LC_REAL(split.train)},
        {"split.val", LC_REAL(split.val)},
        {"split.test", LC_REAL(split.test)},
        {"epochs", LC_INT(train.epochs, int)},
        {"batch_size", LC_INT(train.batch_size, int)},
        {"learning_rate", LC_REAL(train.learning_rate)},
        {"beta1", LC_REAL(train.beta1)},
        {"beta2", LC_REAL(train.beta2)},
        {"adam_epsilon", LC_REAL(train.epsilon)},
        {"units", LC_INT(units, int)},
        {"dropout", LC_REAL(dropout)},
        {"dense_units", LC_INT(dense_units, int)},
        {"paper_faithful_split", LC_BOOL(paper_faithful_split)},
        {"paper_faithful_scales", LC_BOOL(paper_faithful_scales)},
        {"strict_scaler", LC_BOOL(strict_scaler)},
        {"gap_respecting_windows", LC_BOOL(gap_respecting_windows)},
        {"arima_order",
         Field{[](RunConfig& c, const std::string& k, const std::string& v) { c.arima_order = parse_order(k, v); },
               [](const RunConfig& c) {
                   return c.arima_order ? std::to_string(c.arima_order->p) + "," + std::to_string(c.arima_order->d) +
                                              "," + std::to_string(c.arima_order->q)
                                        : std::string("auto");
               },
               Field::text}},
        {"arima_search_slice", LC_CHOICE(arima_search_slice, "train", "full")},
        {"mape_epsilon", LC_REAL(mape_epsilon)},
        {"seed", LC_INT(seed, std::uint64_t)},
        {"output_dir", LC_TEXT(output_dir)},
        {"plot_points", LC_INT(plot_points, int)},
    };
    return table;
}

#undef LC_REAL
#undef LC_INT
#undef LC_BOOL
#undef LC_TEXT
#undef LC_CHOICE

const Field& find_field(const std::string& key) {
    for (const auto& [name, field] : fields()) {
        if (name == key) {
            return field;
        }
    }
    fail(ErrorCode::config, "unknown key '" + key + "'");
}

}  // namespace

void RunConfig::validate() const {
    if (window < 1) {
        fail(ErrorCode::validation, "window must be >= 1, got " + std::to_string(window));
    }
    const double sum = split.train + split.val + split.test;
    if (split.train <= 0.0 || split.val < 0.0 || split.test <= 0.0 || std::abs(sum - 1.0) > 1e-9) {
        fail(ErrorCode::validation, "split fractions must be positive and sum to 1");
    }
    train.validate();
    if (units < 1 || dense_units < 1) {
        fail(ErrorCode::validation, "units and dense_units must be >= 1");
    }
    if (!(dropout >= 0.0 && dropout < 1.0)) {
        fail(ErrorCode::validation, "dropout must be in [0, 1)");
    }
    if (!(mape_epsilon > 0.0)) {
        fail(ErrorCode::validation, "mape_epsilon must be > 0");
    }
    if (plot_points < 1) {
        fail(ErrorCode::validation, "plot_points must be >= 1");
    }
    if (arima_order) {
        arima_order->validate();
    }
    synth.validate();
}

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> out;
        for (const auto& [name, field] : fields()) {
            out.push_back(name);
        }
        return out;
    }();
    return keys;
}

void set_config_value(RunConfig& config, const std::string& key, const std::string& value) {
    find_field(key).set(config, key, value);
}

std::string get_config_value(const RunConfig& config, const std::string& key) {
    return find_field(key).get(config);
}

RunConfig parse_config(std::string_view document, const Overrides& overrides) {
    RunConfig config;
    const std::string body = trim(document);
    if (!body.empty() && body.front() == '{') {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(body);
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorCode::config, std::string("config JSON: ") + e.what());
        }
        for (const auto& [key, value] : j.items()) {
            std::string text;
            if (value.is_string()) {
                text = value.get<std::string>();
            } else if (value.is_boolean()) {
                text = value.get<bool>() ? "true" : "false";
            } else if (value.is_number_integer() || value.is_number_unsigned()) {
                text = value.dump();
            } else if (value.is_number_float()) {
                text = format_double(value.get<double>());
            } else {
                fail(ErrorCode::config, "key '" + key + "': unsupported JSON value");
            }
            set_config_value(config, key, text);
        }
    } else {
        std::size_t line_no = 0;
        std::size_t pos = 0;
        while (pos <= document.size()) {
            const auto nl = document.find('\n', pos);
            const std::string_view raw = document.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
            pos = nl == std::string_view::npos ? document.size() + 1 : nl + 1;
            ++line_no;
            std::string line = trim(raw);
            if (line.empty() || line.front() == '#') {
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos) {
                fail(ErrorCode::config, "line " + std::to_string(line_no) + ": expected key=value");
            }
            set_config_value(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        }
    }
    for (const auto& [key, value] : overrides) {
        set_config_value(config, key, value);
    }
    config.validate();
    return config;
}

RunConfig parse_config_file(const std::string& path, const Overrides& overrides) {
    return parse_config(read_text_file(path), overrides);
}

nlohmann::ordered_json config_to_json(const RunConfig& config) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& [name, field] : fields()) {
        const std::string v = field.get(config);
        switch (field.kind) {
        case Field::integer:
            if (name == "seed") {
                j[name] = config.seed;
            } else {
                j[name] = std::stoll(v);
            }
            break;
        case Field::real: j[name] = std::stod(v); break;
        case Field::boolean: j[name] = v == "true"; break;
        case Field::text: j[name] = v; break;
        }
    }
    return j;
}

std::string config_to_text(const RunConfig& config) {
    std::string out;
    for (const auto& [name, field] : fields()) {
        out += name + "=" + field.get(config) + "\n";
    }
    return out;
}

std::string resolve_output_dir(const RunConfig& config) {
    if (!config.output_dir.empty()) {
        return config.output_dir;
    }
    const char* root = std::getenv("LOADCAST_OUTPUT_ROOT");
    const std::string base = (root != nullptr && *root != '\0') ? root : "runs";
    return base + "/run-" + config.model + "-seed" + std::to_string(config.seed);
}

}  // namespace loadcast::workbench
