#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "spiderp/csv.hpp"
#include "spiderp/synth.hpp"

using namespace spiderp;

namespace {

SynthConfig small_config() {
    SynthConfig cfg;
    cfg.seed = 7;
    cfg.n_source_subjects = 2;
    cfg.n_target_subjects = 3;
    cfg.record_duration_s = 120.0;
    cfg.fs = 128.0;
    return cfg;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::string s((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return s;
}

double mean_hr_bpm(const GeneratedSignal& ecg) {
    const auto& t = ecg.truth_times_s;
    return 60.0 * static_cast<double>(t.size() - 1) / (t.back() - t.front());
}

}  // namespace

TEST_CASE("gen_ecg: rest trace beats near the baseline rate") {
    SynthConfig cfg = small_config();
    cfg.hr_baseline_bpm = 60.0;
    const std::vector<double> rest(120, 0.0);
    const auto ecg = gen_ecg(rest, cfg, 1234);
    CHECK(std::abs(mean_hr_bpm(ecg) - 60.0) < 1.0);
    // RR intervals near 1 s throughout
    for (size_t i = 1; i < ecg.truth_times_s.size(); ++i) {
        const double rr = ecg.truth_times_s[i] - ecg.truth_times_s[i - 1];
        CHECK(rr > 0.85);
        CHECK(rr < 1.15);
    }
}

TEST_CASE("gen_ecg: full fear with 30 BPM elevation reads 90 BPM") {
    SynthConfig cfg = small_config();
    cfg.record_duration_s = 600.0;
    cfg.hr_baseline_bpm = 60.0;
    cfg.hr_fear_elevation_bpm = 30.0;
    const std::vector<double> fear(600, 1.0);
    const auto ecg = gen_ecg(fear, cfg, 99);
    CHECK(std::abs(mean_hr_bpm(ecg) - 90.0) < 1.0);
}

TEST_CASE("gen_ecg is deterministic in its seed") {
    const SynthConfig cfg = small_config();
    const std::vector<double> fear(120, 0.5);
    const auto a = gen_ecg(fear, cfg, 42);
    const auto b = gen_ecg(fear, cfg, 42);
    CHECK(a.samples == b.samples);
    CHECK(a.truth_times_s == b.truth_times_s);
    const auto c = gen_ecg(fear, cfg, 43);
    CHECK(a.samples != c.samples);
}

TEST_CASE("gen_gsr: zero rates produce a pulse-free tonic trace") {
    SynthConfig cfg = small_config();
    cfg.scr_rate_rest_per_min = 0.0;
    cfg.scr_rate_fear_per_min = 0.0;
    const std::vector<double> rest(120, 0.0);
    const auto gsr = gen_gsr(rest, cfg, 5);
    CHECK(gsr.truth_times_s.empty());
}

TEST_CASE("gen_gsr: sustained fear delivers the configured event rate") {
    SynthConfig cfg = small_config();
    cfg.record_duration_s = 600.0;
    cfg.scr_rate_fear_per_min = 4.0;
    cfg.scr_rate_rest_per_min = 0.0;
    const std::vector<double> fear(600, 1.0);
    const auto gsr = gen_gsr(fear, cfg, 6);
    // 10 min at 4/min: 40 expected, 3 sigma window
    const double n = static_cast<double>(gsr.truth_times_s.size());
    CHECK(n > 40.0 - 3.0 * std::sqrt(40.0));
    CHECK(n < 40.0 + 3.0 * std::sqrt(40.0));
}

TEST_CASE("SCR pulses decay below 1% within the recovery horizon") {
    const SynthConfig cfg;
    const double tr = cfg.scr_rise_s, td = cfg.scr_decay_s;
    const double tpk = std::log(td / tr) * tr * td / (td - tr);
    const double gain = 1.0 / (std::exp(-tpk / td) - std::exp(-tpk / tr));
    const double tail =
        gain * (std::exp(-cfg.scr_recovery_s / td) - std::exp(-cfg.scr_recovery_s / tr));
    CHECK(tail < 0.01);
    CHECK(tail >= 0.0);
}

TEST_CASE("planted severity link is monotone and in range") {
    SynthConfig cfg;
    cfg.n_target_subjects = 24;
    double prev = -1.0;
    for (int i = 0; i < cfg.n_target_subjects; ++i) {
        const auto p = planted_target(cfg, i);
        CHECK(p.pclm >= 17);
        CHECK(p.pclm <= 85);
        CHECK(p.severity >= prev);  // severity grid is increasing in index
        prev = p.severity;
        // higher severity: lower starting point, steeper rise
        if (p.pclm < 36) CHECK(p.trend < 0.0);
    }
    const auto low = planted_target(cfg, 0);
    const auto high = planted_target(cfg, cfg.n_target_subjects - 1);
    CHECK(low.initial_level > high.initial_level);
    CHECK(low.trend < high.trend);
    CHECK(low.pclm < 36);
    CHECK(high.pclm >= 36);
}

TEST_CASE("planted severity link is recoverable from (initial, trend)") {
    SynthConfig cfg;
    for (int i = 0; i < cfg.n_target_subjects; ++i) {
        const auto p = planted_target(cfg, i);
        // invert the affine trajectory parameters back to the severity
        const double s_from_trend =
            (p.trend - cfg.target_trend_low) / (cfg.target_trend_high - cfg.target_trend_low);
        const double s_from_initial = (cfg.target_initial_high - p.initial_level) /
                                      (cfg.target_initial_high - cfg.target_initial_low);
        CHECK(s_from_trend == doctest::Approx(p.severity).epsilon(1e-12));
        CHECK(s_from_initial == doctest::Approx(p.severity).epsilon(1e-12));
        const long recovered =
            std::lround(cfg.pclm_link_intercept + cfg.pclm_link_span * s_from_trend);
        CHECK(std::clamp(recovered, 17l, 85l) == p.pclm);
    }
}

TEST_CASE("target fear state stays in [0,1] and follows the planted trend") {
    SynthConfig cfg;
    for (int i : {0, 11, 23}) {
        const auto fear = target_fear_state(cfg, i);
        REQUIRE(fear.size() == 600);
        for (double v : fear) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
        const auto p = planted_target(cfg, i);
        const double head = fear[30], tail = fear[570];
        if (p.trend > 0.1) CHECK(tail > head);
        if (p.trend < -0.1) CHECK(tail < head);
    }
}

TEST_CASE("gen_cohort writes a loadable, annotated, reproducible cohort") {
    const auto dir1 = std::filesystem::temp_directory_path() / "spiderp_synth_a";
    const auto dir2 = std::filesystem::temp_directory_path() / "spiderp_synth_b";
    std::filesystem::remove_all(dir1);
    std::filesystem::remove_all(dir2);

    const auto cfg = small_config();
    const auto manifest1 = gen_cohort(cfg, dir1);
    const auto manifest2 = gen_cohort(cfg, dir2);

    const auto entries = read_manifest(manifest1);
    REQUIRE(entries.size() == 5);
    int targets = 0;
    for (const auto& e : entries) {
        const auto rec = load_record(e, dir1);  // validates lengths, t column, annotations
        CHECK(rec.ecg.size() == static_cast<size_t>(cfg.record_duration_s * cfg.fs));
        if (e.role == Role::target) {
            ++targets;
            REQUIRE(e.pclm.has_value());
            CHECK(*e.pclm >= 17);
            CHECK(*e.pclm <= 85);
            CHECK(rec.annotations.empty());
        } else {
            CHECK(!rec.annotations.empty());
        }
    }
    CHECK(targets == 3);

    // same seed, byte-identical tree
    CHECK(slurp(manifest1) == slurp(manifest2));
    for (const auto& e : entries) {
        CHECK(slurp(dir1 / e.ecg_path) == slurp(dir2 / e.ecg_path));
        CHECK(slurp(dir1 / e.gsr_path) == slurp(dir2 / e.gsr_path));
    }
    std::filesystem::remove_all(dir1);
    std::filesystem::remove_all(dir2);
}
