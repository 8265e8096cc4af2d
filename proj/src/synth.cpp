#include "spiderp/synth.hpp"

#include <algorithm>
#include <cmath>

#include "spiderp/csv.hpp"
#include "spiderp/errors.hpp"
#include "spiderp/rng.hpp"

namespace spiderp {

namespace {

constexpr double kPi = 3.14159265358979323846;

// purpose tags for per-subject stream derivation
enum : uint64_t {
    kPurposeSourceEcg = 1,
    kPurposeSourceGsr = 2,
    kPurposeTargetEcg = 3,
    kPurposeTargetGsr = 4,
    kPurposeSeverity = 5,
    kPurposeKnots = 6,
};

void validate(const SynthConfig& c) {
    if (c.record_duration_s < 60.0)
        throw OutOfRange("synth: record_duration_s must be at least 60 s");
    if (c.fs <= 0.0) throw BadSamplingRate("synth: fs must be positive");
    if (c.n_source_subjects < 0 || c.n_target_subjects < 0)
        throw OutOfRange("synth: subject counts must be nonnegative");
}

size_t seconds(const SynthConfig& c) {
    return static_cast<size_t>(std::lround(c.record_duration_s));
}

double fear_at(const std::vector<double>& fear_per_s, double t) {
    const size_t idx = std::min(fear_per_s.size() - 1,
                                static_cast<size_t>(std::max(0.0, std::floor(t))));
    return fear_per_s[idx];
}

}  // namespace

PlantedTarget planted_target(const SynthConfig& config, int subject_index) {
    validate(config);
    Rng rng(derive_seed(config.seed, static_cast<uint64_t>(subject_index), kPurposeSeverity));
    const double base =
        (static_cast<double>(subject_index) + 0.5) / std::max(1, config.n_target_subjects);
    PlantedTarget p;
    p.severity = std::clamp(base + rng.uniform(-0.02, 0.02), 0.0, 1.0);
    p.initial_level = config.target_initial_high -
                      (config.target_initial_high - config.target_initial_low) * p.severity;
    p.trend = config.target_trend_low +
              (config.target_trend_high - config.target_trend_low) * p.severity;
    p.pclm = static_cast<int>(std::clamp(
        std::lround(config.pclm_link_intercept + config.pclm_link_span * p.severity), 17l, 85l));
    return p;
}

std::vector<double> target_fear_state(const SynthConfig& config, int subject_index) {
    const auto planted = planted_target(config, subject_index);
    Rng rng(derive_seed(config.seed, static_cast<uint64_t>(subject_index), kPurposeKnots));
    const size_t n = seconds(config);
    const size_t n_seg = (n + 59) / 60;  // per-minute knots, short final segment allowed
    std::vector<double> knot_t(n_seg + 1), knot_v(n_seg + 1);
    for (size_t k = 0; k <= n_seg; ++k) {
        const double t = std::min(static_cast<double>(k) * 60.0, static_cast<double>(n));
        const double line = planted.initial_level + planted.trend * (t / config.record_duration_s);
        const double jitter = (k == 0) ? 0.0 : rng.uniform(-0.03, 0.03);
        knot_t[k] = t;
        knot_v[k] = std::clamp(line + jitter, 0.0, 1.0);
    }
    std::vector<double> fear(n);
    for (size_t s = 0; s < n; ++s) {
        const double t = static_cast<double>(s);
        const size_t seg = std::min(static_cast<size_t>(t / 60.0), n_seg - 1);
        const double w = (t - knot_t[seg]) / (knot_t[seg + 1] - knot_t[seg]);
        fear[s] = knot_v[seg] + w * (knot_v[seg + 1] - knot_v[seg]);
    }
    return fear;
}

std::vector<double> source_fear_state(const SynthConfig& config, int subject_index) {
    validate(config);
    const size_t n = seconds(config);
    std::vector<double> fear(n);
    const int start_fear = subject_index % 2;  // half the cohort starts in a fear block
    for (size_t s = 0; s < n; ++s) {
        const int block = static_cast<int>(static_cast<double>(s) / config.source_segment_s);
        fear[s] = ((block + start_fear) % 2 == 1) ? 1.0 : 0.0;
    }
    return fear;
}

std::vector<Annotation> source_annotations(const SynthConfig& config, int subject_index) {
    validate(config);
    const double duration = config.record_duration_s;
    const int start_fear = subject_index % 2;
    std::vector<Annotation> ann;
    for (int block = 0; block * config.source_segment_s < duration; ++block) {
        Annotation a;
        a.start_s = block * config.source_segment_s;
        a.end_s = std::min((block + 1) * config.source_segment_s, duration);
        a.fr_label = (block + start_fear) % 2 == 1 ? 1 : 0;
        ann.push_back(a);
    }
    return ann;
}

GeneratedSignal gen_ecg(const std::vector<double>& fear_state_per_s, const SynthConfig& config,
                        uint64_t rng_seed) {
    validate(config);
    Rng rng(rng_seed);
    const double duration = config.record_duration_s;
    const size_t n = static_cast<size_t>(std::lround(duration * config.fs));

    const double wander_phase1 = rng.uniform(0.0, 2.0 * kPi);
    const double wander_phase2 = rng.uniform(0.0, 2.0 * kPi);

    GeneratedSignal out;
    double t = 0.1 + 0.4 * rng.uniform();
    while (t < duration) {
        out.truth_times_s.push_back(t);
        const double fear = fear_at(fear_state_per_s, t);
        const double bpm = config.hr_baseline_bpm + config.hr_fear_elevation_bpm * fear;
        double rr = (60.0 / bpm) * (1.0 + config.hr_jitter * rng.normal());
        rr = std::max(rr, 0.25);
        t += rr;
    }

    out.samples.assign(n, 0.0);
    const double r_width_s = 0.012;
    const int support = static_cast<int>(std::ceil(5.0 * r_width_s * config.fs));
    for (double p : out.truth_times_s) {
        const int center = static_cast<int>(std::lround(p * config.fs));
        for (int i = std::max(0, center - support);
             i <= std::min(static_cast<int>(n) - 1, center + support); ++i) {
            const double dt = static_cast<double>(i) / config.fs - p;
            out.samples[i] += std::exp(-0.5 * (dt / r_width_s) * (dt / r_width_s));
        }
    }
    for (size_t i = 0; i < n; ++i) {
        const double ts = static_cast<double>(i) / config.fs;
        out.samples[i] += 0.08 * std::sin(2.0 * kPi * 0.15 * ts + wander_phase1) +
                          0.05 * std::sin(2.0 * kPi * 0.33 * ts + wander_phase2) +
                          0.01 * rng.normal();
    }
    return out;
}

GeneratedSignal gen_gsr(const std::vector<double>& fear_state_per_s, const SynthConfig& config,
                        uint64_t rng_seed) {
    validate(config);
    Rng rng(rng_seed);
    const double duration = config.record_duration_s;
    const size_t n = static_cast<size_t>(std::lround(duration * config.fs));

    const double level0 = 2.0 + rng.uniform(-0.3, 0.3);
    const double drift_per_s = rng.uniform(2e-4, 8e-4);
    const double slow_amp = 0.10 + 0.10 * rng.uniform();
    const double slow_phase = rng.uniform(0.0, 2.0 * kPi);

    // SCR arrivals: thinned inhomogeneous process, rate linear in fear state
    GeneratedSignal out;
    std::vector<double> amplitudes;
    const double rate_rest = config.scr_rate_rest_per_min / 60.0;
    const double rate_fear = config.scr_rate_fear_per_min / 60.0;
    const double rate_max = std::max(rate_rest, rate_fear);
    if (rate_max > 0.0) {
        double t = 0.0;
        while (true) {
            double u = rng.uniform();
            while (u <= 0.0) u = rng.uniform();
            t += -std::log(u) / rate_max;
            if (t >= duration) break;
            const double fear = fear_at(fear_state_per_s, t);
            const double rate = rate_rest + (rate_fear - rate_rest) * fear;
            if (rng.uniform() * rate_max < rate) {
                out.truth_times_s.push_back(t);
                amplitudes.push_back(config.scr_amplitude_us * (0.8 + 0.4 * rng.uniform()));
            }
        }
    }

    // bi-exponential pulse, peak normalized to 1
    const double tr = config.scr_rise_s, td = config.scr_decay_s;
    const double t_peak = std::log(td / tr) * tr * td / (td - tr);
    const double peak = std::exp(-t_peak / td) - std::exp(-t_peak / tr);
    const double shape_gain = 1.0 / peak;

    out.samples.assign(n, 0.0);
    for (size_t k = 0; k < out.truth_times_s.size(); ++k) {
        const double onset = out.truth_times_s[k];
        const int lo = static_cast<int>(std::ceil(onset * config.fs));
        const int hi = std::min(static_cast<int>(n) - 1,
                                static_cast<int>(std::floor((onset + config.scr_recovery_s) *
                                                            config.fs)));
        for (int i = std::max(0, lo); i <= hi; ++i) {
            const double tau = static_cast<double>(i) / config.fs - onset;
            out.samples[i] += amplitudes[k] * shape_gain *
                              (std::exp(-tau / td) - std::exp(-tau / tr));
        }
    }
    for (size_t i = 0; i < n; ++i) {
        const double ts = static_cast<double>(i) / config.fs;
        out.samples[i] += level0 + drift_per_s * ts +
                          slow_amp * std::sin(2.0 * kPi * ts / 300.0 + slow_phase) +
                          0.002 * rng.normal();
    }
    return out;
}

std::filesystem::path gen_cohort(const SynthConfig& config,
                                 const std::filesystem::path& out_dir) {
    validate(config);
    std::filesystem::create_directories(out_dir / "subjects");
    std::vector<ManifestEntry> entries;

    auto write_subject = [&](const std::string& id, const std::vector<double>& fear,
                             uint64_t ecg_seed, uint64_t gsr_seed) {
        const auto ecg = gen_ecg(fear, config, ecg_seed);
        const auto gsr = gen_gsr(fear, config, gsr_seed);
        write_signal_csv(out_dir / "subjects" / (id + "_ecg.csv"), ecg.samples, config.fs);
        write_signal_csv(out_dir / "subjects" / (id + "_gsr.csv"), gsr.samples, config.fs);
    };

    char name[32];
    for (int i = 0; i < config.n_source_subjects; ++i) {
        std::snprintf(name, sizeof(name), "src%03d", i);
        const std::string id = name;
        write_subject(id, source_fear_state(config, i),
                      derive_seed(config.seed, static_cast<uint64_t>(i), kPurposeSourceEcg),
                      derive_seed(config.seed, static_cast<uint64_t>(i), kPurposeSourceGsr));
        write_annotation_csv(out_dir / "subjects" / (id + "_ann.csv"),
                             source_annotations(config, i));
        ManifestEntry e;
        e.id = id;
        e.role = Role::source;
        e.sex = i % 2;
        e.fs = config.fs;
        e.ecg_path = "subjects/" + id + "_ecg.csv";
        e.gsr_path = "subjects/" + id + "_gsr.csv";
        e.annotation_path = "subjects/" + id + "_ann.csv";
        entries.push_back(std::move(e));
    }

    for (int i = 0; i < config.n_target_subjects; ++i) {
        std::snprintf(name, sizeof(name), "tgt%03d", i);
        const std::string id = name;
        write_subject(id, target_fear_state(config, i),
                      derive_seed(config.seed, static_cast<uint64_t>(i), kPurposeTargetEcg),
                      derive_seed(config.seed, static_cast<uint64_t>(i), kPurposeTargetGsr));
        ManifestEntry e;
        e.id = id;
        e.role = Role::target;
        e.sex = (i % 4 == 3) ? 1 : 0;
        e.pclm = planted_target(config, i).pclm;
        e.fs = config.fs;
        e.ecg_path = "subjects/" + id + "_ecg.csv";
        e.gsr_path = "subjects/" + id + "_gsr.csv";
        entries.push_back(std::move(e));
    }

    const auto manifest = out_dir / "manifest.csv";
    write_manifest(manifest, entries);
    return manifest;
}

}  // namespace spiderp
