#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "loadcast/arima/adf.hpp"
#include "loadcast/arima/arima.hpp"

namespace loadcast::arima {

struct TraceEntry {
    ArimaOrder order;
    bool include_const = true;
    double aic = 0.0;  // +inf marks a failed fit
    double seconds = 0.0;
    std::string failure;  // empty on success
};

struct SearchTrace {
    std::vector<TraceEntry> entries;
    double total_seconds = 0.0;

    // Index of the entry with the smallest finite AIC (first on ties), or -1.
    int best_index() const;
};

// pmdarima-style listing of the search.
std::string format_trace(const SearchTrace& trace);

struct StepwiseOptions {
    int max_p = 5;
    int max_q = 5;
    int max_d = 2;
    int max_fits = 25;
    double alpha = 0.05;          // ADF rejection level for choosing d
    double min_root = 1.01;       // fits with a root modulus below this score AIC = inf
    std::optional<int> d;         // fixed d skips the unit-root tests
    FitOptions fit;
};

struct DifferencingChoice {
    int d = 0;
    std::vector<AdfResult> tests;  // one per differencing level tried
};

// Differences until the ADF test rejects a unit root at `alpha`, at most max_d times.
DifferencingChoice choose_differencing(std::span<const double> series, double alpha = 0.05, int max_d = 2);

struct SearchResult {
    ArimaOrder order;
    bool include_const = true;
    ArimaFit fit;
    SearchTrace trace;
    DifferencingChoice differencing;
};

class SearchError : public Error {
public:
    SearchError(const std::string& message, SearchTrace trace)
        : Error(ErrorCode::search, "search error: " + message), trace_(std::move(trace)) {}
    const SearchTrace& trace() const noexcept { return trace_; }

private:
    SearchTrace trace_;
};

// Hyndman-Khandakar stepwise search minimising AIC. Starts from (2,d,2),
// (0,d,0), (1,d,0), (0,d,1) with a constant plus the constant-free null
// model, then moves to the first neighbour (p or q +-1, both +-1, constant
// toggled) that lowers AIC until none does or max_fits is reached. Fits
// with AR or MA roots close to the unit circle count as failures. The
// constant is only considered for d <= 1.
SearchResult stepwise_search(std::span<const double> series, const StepwiseOptions& options = {});

}  // namespace loadcast::arima
