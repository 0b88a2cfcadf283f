#pragma once

#include <cstdint>
#include <string>

#include "loadcast/meter_ingest.hpp"

namespace loadcast::workbench {

// Household load stand-in: flat base load, a morning and an evening
// plateau-shaped peak, Gaussian noise and occasional appliance spikes that
// decay over a few hours.
struct SynthProfile {
    int days = 120;
    double base_load = 0.4;  // kWh
    double morning_amplitude = 0.8;
    double morning_hour = 7.0;
    double morning_width = 2.0;  // hours
    double evening_amplitude = 1.4;
    double evening_hour = 19.0;
    double evening_width = 2.5;
    double peak_shape = 2.0;  // bump is exp(-|dt / width|^shape / 2); 2 is Gaussian, larger is flatter
    double noise_std = 0.04;
    double spike_probability = 0.02;  // per hour
    double spike_amplitude = 0.8;     // mean spike height; actual height is uniform in [0.5, 1.5] x this
    double spike_decay = 0.3;         // fraction of a spike carried into the next hour
    std::string start_date = "2022-08-10";
    std::uint64_t seed = 42;

    void validate() const;
};

// Deterministic per profile (seed included); values clipped at 0.
MeterSeries synth_household(const SynthProfile& profile);

// Noise-free daily shape at hour-of-day h (0..23).
double daily_pattern(const SynthProfile& profile, double hour);

}  // namespace loadcast::workbench
