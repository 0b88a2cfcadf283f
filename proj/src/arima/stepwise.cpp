#include "loadcast/arima/stepwise.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <tuple>

namespace loadcast::arima {

int SearchTrace::best_index() const {
    int best = -1;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const double aic = entries[i].aic;
        if (std::isfinite(aic) && (best < 0 || aic < entries[static_cast<std::size_t>(best)].aic)) {
            best = static_cast<int>(i);
        }
    }
    return best;
}

namespace {

std::string model_label(const ArimaOrder& o, bool include_const) {
    return "ARIMA" + to_string(o) + "(0,0,0)[0]" + (include_const ? " intercept" : "");
}

}  // namespace

std::string format_trace(const SearchTrace& trace) {
    std::string out = "Performing stepwise search to minimize AIC\n";
    char buf[256];
    for (const TraceEntry& e : trace.entries) {
        if (std::isfinite(e.aic)) {
            std::snprintf(buf, sizeof buf, " %-36s : AIC=%.3f, Time=%.2f sec\n",
                          model_label(e.order, e.include_const).c_str(), e.aic, e.seconds);
        } else {
            std::snprintf(buf, sizeof buf, " %-36s : AIC=inf, Time=%.2f sec\n",
                          model_label(e.order, e.include_const).c_str(), e.seconds);
        }
        out += buf;
    }
    const int best = trace.best_index();
    if (best >= 0) {
        const TraceEntry& b = trace.entries[static_cast<std::size_t>(best)];
        out += "\nBest model:  " + model_label(b.order, b.include_const) + "\n";
    } else {
        out += "\nBest model:  none (every fit failed)\n";
    }
    std::snprintf(buf, sizeof buf, "Total fit time: %.3f seconds\n", trace.total_seconds);
    out += buf;
    return out;
}

DifferencingChoice choose_differencing(std::span<const double> series, double alpha, int max_d) {
    DifferencingChoice choice;
    std::vector<double> current(series.begin(), series.end());
    for (int d = 0;; ++d) {
        choice.d = d;
        const AdfResult res = adf_test(current);
        choice.tests.push_back(res);
        if (res.p_value < alpha || d >= max_d) {
            break;
        }
        current = difference(current, 1);
    }
    return choice;
}

SearchResult stepwise_search(std::span<const double> series, const StepwiseOptions& options) {
    using clock = std::chrono::steady_clock;
    const auto started = clock::now();

    SearchResult result;
    if (options.d) {
        result.differencing.d = *options.d;
    } else {
        result.differencing = choose_differencing(series, options.alpha, options.max_d);
    }
    const int d = result.differencing.d;
    const bool allow_const = d <= 1;

    SearchTrace& trace = result.trace;
    std::map<std::tuple<int, int, bool>, std::size_t> tried;
    std::vector<ArimaFit> fits;
    int best = -1;

    // Returns true when the new fit improves on the incumbent.
    const auto attempt = [&](int p, int q, bool with_const) {
        if (p < 0 || q < 0 || p > options.max_p || q > options.max_q) {
            return false;
        }
        if (with_const && !allow_const) {
            return false;
        }
        if (tried.count({p, q, with_const}) != 0 || static_cast<int>(trace.entries.size()) >= options.max_fits) {
            return false;
        }
        TraceEntry entry;
        entry.order = {p, d, q};
        entry.include_const = with_const;
        const auto t0 = clock::now();
        ArimaFit fit;
        try {
            fit = fit_arima(series, entry.order, with_const, options.fit);
            entry.aic = fit.aic;
            if (!std::isfinite(entry.aic)) {
                entry.failure = "non-finite AIC";
            } else if (fit.min_ar_root < options.min_root || fit.min_ma_root < options.min_root) {
                entry.aic = std::numeric_limits<double>::infinity();
                entry.failure = "characteristic root modulus below " + std::to_string(options.min_root);
            }
        } catch (const Error& e) {
            entry.aic = std::numeric_limits<double>::infinity();
            entry.failure = e.what();
        }
        entry.seconds = std::chrono::duration<double>(clock::now() - t0).count();
        tried[{p, q, with_const}] = trace.entries.size();
        trace.entries.push_back(entry);
        fits.push_back(std::move(fit));
        const int index = static_cast<int>(trace.entries.size()) - 1;
        if (std::isfinite(entry.aic) &&
            (best < 0 || entry.aic < trace.entries[static_cast<std::size_t>(best)].aic)) {
            best = index;
            return true;
        }
        return false;
    };

    attempt(2, 2, allow_const);
    attempt(0, 0, allow_const);
    attempt(1, 0, allow_const);
    attempt(0, 1, allow_const);
    if (allow_const) {
        attempt(0, 0, false);
    }
    if (best < 0) {
        trace.total_seconds = std::chrono::duration<double>(clock::now() - started).count();
        throw SearchError("every starting model failed to fit", trace);
    }

    while (static_cast<int>(trace.entries.size()) < options.max_fits) {
        const TraceEntry& inc = trace.entries[static_cast<std::size_t>(best)];
        const int p = inc.order.p;
        const int q = inc.order.q;
        const bool c = inc.include_const;
        const bool moved = attempt(p - 1, q, c) || attempt(p + 1, q, c) || attempt(p, q - 1, c) ||
                           attempt(p, q + 1, c) || attempt(p - 1, q - 1, c) || attempt(p - 1, q + 1, c) ||
                           attempt(p + 1, q - 1, c) || attempt(p + 1, q + 1, c) || attempt(p, q, !c);
        if (!moved) {
            break;
        }
    }

    trace.total_seconds = std::chrono::duration<double>(clock::now() - started).count();
    const auto& winner = trace.entries[static_cast<std::size_t>(best)];
    result.order = winner.order;
    result.include_const = winner.include_const;
    result.fit = std::move(fits[static_cast<std::size_t>(best)]);
    return result;
}

}  // namespace loadcast::arima
