#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "spiderp/types.hpp"

namespace spiderp {

// Knobs of the synthetic cohort. Defaults generate the standard desk-scale
// cohort: 30 annotated source subjects plus 24 target subjects with planted
// PCL-M scores, 10-minute records.
struct SynthConfig {
    uint64_t seed = 7;
    int n_source_subjects = 30;
    int n_target_subjects = 24;
    double record_duration_s = 600.0;
    double fs = 128.0;

    // cardiac dynamics
    double hr_baseline_bpm = 62.0;
    double hr_fear_elevation_bpm = 28.0;
    double hr_jitter = 0.02;  // multiplicative RR jitter (fraction)

    // electrodermal dynamics
    double scr_rate_fear_per_min = 6.0;
    double scr_rate_rest_per_min = 0.5;
    double scr_amplitude_us = 0.8;
    double scr_rise_s = 0.75;
    double scr_decay_s = 3.0;
    double scr_recovery_s = 20.0;  // pulses decay below 1% within this horizon

    // severity link: planted pclm = round(intercept + span * severity)
    double pclm_link_intercept = 20.0;
    double pclm_link_span = 55.0;

    // fear-state trajectory shape: high-severity subjects start low and
    // rise, low-severity subjects start high and fall
    double target_initial_high = 0.75;
    double target_initial_low = 0.10;
    double target_trend_low = -0.55;
    double target_trend_high = 0.80;

    double source_segment_s = 60.0;  // alternating rest/fear blocks
};

struct GeneratedSignal {
    std::vector<double> samples;
    std::vector<double> truth_times_s;  // planted R-peak / SCR-onset times
};

// Gaussian-bump R-waves at RR = 60/(baseline + elevation*fear_state(t)),
// with seeded jitter, baseline wander and measurement noise.
GeneratedSignal gen_ecg(const std::vector<double>& fear_state_per_s, const SynthConfig& config,
                        uint64_t rng_seed);

// Slow tonic drift plus bi-exponential SCR pulses arriving as an
// inhomogeneous point process with rate proportional to fear_state.
GeneratedSignal gen_gsr(const std::vector<double>& fear_state_per_s, const SynthConfig& config,
                        uint64_t rng_seed);

// Planted per-subject ground truth for one target subject.
struct PlantedTarget {
    double severity = 0.0;
    double initial_level = 0.0;
    double trend = 0.0;
    int pclm = 17;
};

PlantedTarget planted_target(const SynthConfig& config, int subject_index);

// Piecewise-linear (per-minute knots) fear-state trajectory, clamped to [0,1].
std::vector<double> target_fear_state(const SynthConfig& config, int subject_index);
std::vector<double> source_fear_state(const SynthConfig& config, int subject_index);
std::vector<Annotation> source_annotations(const SynthConfig& config, int subject_index);

// Writes the full cohort (signal CSVs, annotation CSVs, manifest) under
// out_dir and returns the manifest path. Byte-identical for equal configs.
std::filesystem::path gen_cohort(const SynthConfig& config, const std::filesystem::path& out_dir);

}  // namespace spiderp
