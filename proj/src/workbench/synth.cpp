#include "loadcast/workbench/synth.hpp"

#include <algorithm>
#include <cmath>

#include "loadcast/errors.hpp"
#include "loadcast/random.hpp"

namespace loadcast::workbench {

void SynthProfile::validate() const {
    if (days < 1) {
        fail(ErrorCode::validation, "synth days must be >= 1");
    }
    const double amplitudes[] = {base_load, morning_amplitude, evening_amplitude, noise_std, spike_amplitude};
    for (const double a : amplitudes) {
        if (!(a >= 0.0) || !std::isfinite(a)) {
            fail(ErrorCode::validation, "synth amplitudes and noise must be finite and >= 0");
        }
    }
    if (!(morning_width > 0.0) || !(evening_width > 0.0)) {
        fail(ErrorCode::validation, "synth peak widths must be > 0");
    }
    if (!(peak_shape > 0.0) || !std::isfinite(peak_shape)) {
        fail(ErrorCode::validation, "synth peak_shape must be > 0");
    }
    if (!(spike_probability >= 0.0 && spike_probability <= 1.0)) {
        fail(ErrorCode::validation, "synth spike_probability must be in [0, 1]");
    }
    if (!(spike_decay >= 0.0 && spike_decay < 1.0)) {
        fail(ErrorCode::validation, "synth spike_decay must be in [0, 1)");
    }
    parse_iso_date(start_date);
}

namespace {

double bump(double hour, double centre, double width, double shape) {
    // circular distance so a late-evening peak wraps past midnight
    double dist = std::abs(hour - centre);
    dist = std::min(dist, 24.0 - dist);
    return std::exp(-0.5 * std::pow(dist / width, shape));
}

}  // namespace

double daily_pattern(const SynthProfile& p, double hour) {
    return p.base_load + p.morning_amplitude * bump(hour, p.morning_hour, p.morning_width, p.peak_shape) +
           p.evening_amplitude * bump(hour, p.evening_hour, p.evening_width, p.peak_shape);
}

MeterSeries synth_household(const SynthProfile& profile) {
    profile.validate();
    Rng rng(derive_seed(profile.seed, "synth"));
    std::array<double, kHoursPerDay> shape{};
    for (int h = 0; h < kHoursPerDay; ++h) {
        shape[static_cast<std::size_t>(h)] = daily_pattern(profile, h);
    }
    const auto start = parse_iso_date(profile.start_date);
    MeterSeries series;
    series.points.reserve(static_cast<std::size_t>(profile.days) * kHoursPerDay);
    double spike = 0.0;
    for (int day = 0; day < profile.days; ++day) {
        for (int h = 0; h < kHoursPerDay; ++h) {
            spike *= profile.spike_decay;
            // Draw order is fixed (noise, spike test, spike height) so streams stay aligned.
            const double noise = profile.noise_std * rng.normal();
            if (rng.bernoulli(profile.spike_probability)) {
                spike += profile.spike_amplitude * rng.uniform(0.5, 1.5);
            }
            const double value = shape[static_cast<std::size_t>(h)] + noise + spike;
            series.points.push_back({{start + std::chrono::days(day), h}, std::max(value, 0.0)});
        }
    }
    return series;
}

}  // namespace loadcast::workbench
