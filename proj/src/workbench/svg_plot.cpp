#include "loadcast/workbench/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "loadcast/errors.hpp"
#include "loadcast/meter_ingest.hpp"

namespace loadcast::workbench {

namespace {

constexpr double kWidth = 900.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

std::string escape(const std::string& s) {
    std::string out;
    for (const char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

}  // namespace

std::string render_line_chart(const std::vector<PlotSeries>& series, const std::string& title,
                              const std::string& x_label, const std::string& y_label) {
    if (series.empty()) {
        fail(ErrorCode::validation, "plot needs at least one series");
    }
    std::size_t n = 0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& s : series) {
        if (s.values.empty()) {
            fail(ErrorCode::validation, "plot series '" + s.label + "' is empty");
        }
        n = std::max(n, s.values.size());
        for (const double v : s.values) {
            if (!std::isfinite(v)) {
                fail(ErrorCode::numeric, "plot series '" + s.label + "' has non-finite values");
            }
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    if (hi - lo < 1e-12) {
        lo -= 0.5;
        hi += 0.5;
    }
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;
    const auto px = [&](std::size_t i) {
        return kLeft + (n > 1 ? plot_w * static_cast<double>(i) / static_cast<double>(n - 1) : plot_w / 2.0);
    };
    const auto py = [&](double v) { return kTop + plot_h * (hi - v) / (hi - lo); };

    std::string svg;
    svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" + num(kHeight) +
           "\" viewBox=\"0 0 " + num(kWidth) + " " + num(kHeight) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<text x=\"" + num(kWidth / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" + escape(title) +
           "</text>\n";

    // axes and ticks
    svg += "<g stroke=\"#444\" stroke-width=\"1\">\n";
    svg += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(kTop + plot_h) + "\" x2=\"" + num(kLeft + plot_w) + "\" y2=\"" +
           num(kTop + plot_h) + "\"/>\n";
    svg += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(kTop) + "\" x2=\"" + num(kLeft) + "\" y2=\"" +
           num(kTop + plot_h) + "\"/>\n";
    svg += "</g>\n<g fill=\"#444\">\n";
    for (int k = 0; k <= 5; ++k) {
        const double v = lo + (hi - lo) * k / 5.0;
        svg += "<text x=\"" + num(kLeft - 6) + "\" y=\"" + num(py(v) + 4) + "\" text-anchor=\"end\">" + tick(v) +
               "</text>\n";
        const auto i = static_cast<std::size_t>(std::lround(static_cast<double>(n - 1) * k / 5.0));
        svg += "<text x=\"" + num(px(i)) + "\" y=\"" + num(kTop + plot_h + 16) + "\" text-anchor=\"middle\">" +
               std::to_string(i) + "</text>\n";
    }
    svg += "<text x=\"" + num(kLeft + plot_w / 2) + "\" y=\"" + num(kHeight - 10) + "\" text-anchor=\"middle\">" +
           escape(x_label) + "</text>\n";
    svg += "<text transform=\"translate(16," + num(kTop + plot_h / 2) + ") rotate(-90)\" text-anchor=\"middle\">" +
           escape(y_label) + "</text>\n</g>\n";

    for (const auto& s : series) {
        svg += "<polyline fill=\"none\" stroke=\"" + escape(s.colour) + "\" stroke-width=\"1.3\" points=\"";
        for (std::size_t i = 0; i < s.values.size(); ++i) {
            svg += (i ? " " : "") + num(px(i)) + "," + num(py(s.values[i]));
        }
        svg += "\"/>\n";
    }

    // legend
    double ly = kTop + 8;
    for (const auto& s : series) {
        svg += "<line x1=\"" + num(kLeft + plot_w - 150) + "\" y1=\"" + num(ly) + "\" x2=\"" +
               num(kLeft + plot_w - 125) + "\" y2=\"" + num(ly) + "\" stroke=\"" + escape(s.colour) +
               "\" stroke-width=\"2\"/>\n";
        svg += "<text x=\"" + num(kLeft + plot_w - 118) + "\" y=\"" + num(ly + 4) + "\">" + escape(s.label) +
               "</text>\n";
        ly += 18;
    }
    svg += "</svg>\n";
    return svg;
}

void emit_plot(std::span<const double> actual, std::span<const double> predicted, const std::string& title,
               const std::string& path) {
    if (actual.size() != predicted.size()) {
        fail(ErrorCode::dimension, "plot series lengths differ");
    }
    if (actual.empty()) {
        fail(ErrorCode::validation, "cannot plot an empty series");
    }
    const std::string svg = render_line_chart(
        {{"Actual", {actual.begin(), actual.end()}, "#1f77b4"}, {"Predicted", {predicted.begin(), predicted.end()}, "#d62728"}},
        title);
    write_text_file(path, svg);
}

}  // namespace loadcast::workbench
