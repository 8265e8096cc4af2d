// Acceptance suite: one pass/fail line per criterion, nonzero exit if any
// gating criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "spiderp/csv.hpp"
#include "spiderp/ensemble.hpp"
#include "spiderp/eval.hpp"
#include "spiderp/features.hpp"
#include "spiderp/mkde.hpp"
#include "spiderp/mlp.hpp"
#include "spiderp/pipeline.hpp"
#include "spiderp/rng.hpp"
#include "spiderp/signal.hpp"
#include "spiderp/synth.hpp"

using namespace spiderp;

namespace {

struct Outcome {
    bool pass = false;
    bool skipped = false;
    std::string detail;
};

int g_failures = 0;

void run_criterion(int id, const std::string& name, double budget_s,
                   const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
        out = body();
    } catch (const std::exception& e) {
        out.pass = false;
        out.detail = std::string("exception: ") + e.what();
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (budget_s > 0.0 && elapsed > budget_s) {
        out.pass = false;
        out.detail += (out.detail.empty() ? "" : "; ") + std::string("over time budget");
    }
    const char* tag = out.skipped ? "SKIP" : (out.pass ? "PASS" : "FAIL");
    std::printf("[%s] criterion %2d: %s (%.1f s)%s%s\n", tag, id, name.c_str(), elapsed,
                out.detail.empty() ? "" : " -- ", out.detail.c_str());
    std::fflush(stdout);
    if (!out.pass && !out.skipped) ++g_failures;
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), f, v);
    return buf;
}

const std::vector<mkde::KernelKind> kKinds3 = {mkde::KernelKind::continuous_rbf,
                                               mkde::KernelKind::continuous_rbf,
                                               mkde::KernelKind::binary_bernoulli};

// ---------------------------------------------------------------------------

Outcome mlp_gradient_check() {
    Rng rng(31);
    Dataset data;
    data.n = 8;
    data.dim = 12;
    data.x.resize(data.n * data.dim);
    data.y.resize(data.n);
    for (auto& v : data.x) v = rng.normal();
    for (size_t i = 0; i < data.n; ++i) data.y[i] = i % 2 ? 1.0 : 0.0;

    Mlp mlp({12, 16, 16, 1}, 7);
    const double wd = 0.001;
    const auto analytic = mlp.gradient(data, wd);
    Mlp probe = mlp;
    const auto fd = oracle::fd_gradient(
        [&](const std::vector<double>& p) {
            probe.set_params(p);
            return probe.loss(data, wd);
        },
        mlp.params(), 1e-5);

    double worst = 0.0;
    for (size_t i = 0; i < analytic.size(); ++i)
        worst = std::max(worst, std::abs(analytic[i] - fd[i]) /
                                    std::max({std::abs(analytic[i]), std::abs(fd[i]), 1e-6}));
    return {worst < 1e-4, false, "max rel err " + fmt("%.2e", worst)};
}

Outcome mkde_oracle_equivalence() {
    Rng meta(211);
    double worst = 0.0;
    for (int inst = 0; inst < 100; ++inst) {
        const size_t m = 2 + meta.below(49);  // M <= 50
        Rng rng(1000 + inst);
        std::vector<std::vector<double>> x;
        std::vector<double> y;
        for (size_t i = 0; i < m; ++i) {
            x.push_back({rng.normal(), 0.5 + 0.3 * rng.normal(),
                         rng.uniform() < 0.5 ? 0.0 : 1.0});
            y.push_back(17.0 + 68.0 * rng.uniform());
        }
        const auto model = mkde::fit(x, y, kKinds3);

        oracle::KdeOracle o;
        o.x = x;
        o.y = y;
        o.is_binary = {false, false, true};
        o.standardize();

        const std::vector<std::optional<double>> q = {rng.normal(), 0.5 + 0.3 * rng.normal(),
                                                      rng.uniform() < 0.5 ? 0.0 : 1.0};
        const auto got = mkde::raw_conditional(model, q);
        const auto want = o.grid_density(q, model.sigma);
        for (int g = 0; g < mkde::kGridSize; ++g) {
            const double rel = std::abs(got[g] - want[g]) /
                               std::max({1.0, std::abs(got[g]), std::abs(want[g])});
            worst = std::max(worst, rel);
        }
    }
    return {worst < 1e-12, false, "100 instances, max err " + fmt("%.2e", worst)};
}

Outcome marginalization_exactness() {
    Rng rng(77);
    std::vector<std::vector<double>> x;
    std::vector<double> y;
    for (int i = 0; i < 8; ++i) {
        x.push_back({rng.normal(), 0.5 + 0.3 * rng.normal(), i % 2 ? 1.0 : 0.0});
        y.push_back(20.0 + 6.0 * i);
    }
    const auto model = mkde::fit(x, y, kKinds3);

    // binary: omission equals summing the full product over both values
    const std::vector<std::optional<double>> no_sex = {0.4, 0.6, std::nullopt};
    const std::vector<std::optional<double>> sex0 = {0.4, 0.6, 0.0};
    const std::vector<std::optional<double>> sex1 = {0.4, 0.6, 1.0};
    const auto marg_b = mkde::raw_conditional(model, no_sex);
    const auto d0 = mkde::raw_conditional(model, sex0);
    const auto d1 = mkde::raw_conditional(model, sex1);
    double worst_b = 0.0;
    for (int g = 0; g < mkde::kGridSize; ++g)
        worst_b = std::max(worst_b, std::abs(marg_b[g] - (d0[g] + d1[g])) /
                                        std::max(1.0, std::abs(marg_b[g])));
    if (worst_b > 1e-12)
        return {false, false, "binary summation err " + fmt("%.2e", worst_b)};

    // continuous: omission equals quadrature over +-10 bandwidths
    const std::vector<std::optional<double>> no_slope = {std::nullopt, 0.6, 1.0};
    const auto marg_c = mkde::raw_conditional(model, no_slope);
    double lo = 1e300, hi = -1e300;
    for (size_t i = 0; i < model.m; ++i) {
        lo = std::min(lo, model.x[i * 3]);
        hi = std::max(hi, model.x[i * 3]);
    }
    lo -= 10.0 * model.sigma;
    hi += 10.0 * model.sigma;
    double worst_c = 0.0;
    for (int g = 0; g < mkde::kGridSize; g += 2) {
        const double integrated = oracle::simpson(
            [&](double u) {
                const std::vector<std::optional<double>> q = {
                    model.feature_mean[0] + model.feature_std[0] * u, 0.6, 1.0};
                return mkde::raw_conditional(model, q)[g];
            },
            lo, hi, 3000);
        worst_c = std::max(worst_c,
                           std::abs(marg_c[g] - integrated) / std::max(1.0, std::abs(marg_c[g])));
    }
    return {worst_c < 1e-6, false,
            "binary err " + fmt("%.2e", worst_b) + ", quadrature err " + fmt("%.2e", worst_c)};
}

Outcome kernel_normalization() {
    for (double nu : {0.01, 0.05, 0.2, 0.495, 1.0, 3.0}) {
        const double mass = oracle::simpson([&](double u) { return mkde::rbf(u, 0.0, nu); },
                                            -10.0 * nu, 10.0 * nu, 20000);
        if (std::abs(mass - 1.0) > 1e-6)
            return {false, false, "rbf(nu=" + fmt("%g", nu) + ") mass " + fmt("%.8f", mass)};
    }
    for (double sigma : {0.005, 0.1, 0.25, 0.495}) {
        const double p = mkde::bernoulli_p(sigma);
        for (int a : {0, 1})
            if (mkde::bernoulli_k(a, 0, p) + mkde::bernoulli_k(a, 1, p) != 1.0)
                return {false, false, "bernoulli sum != 1 at sigma " + fmt("%g", sigma)};
    }
    return {true, false, "rbf mass within 1e-6, bernoulli sums exactly 1"};
}

Outcome rpeak_recovery() {
    SynthConfig cfg;
    cfg.record_duration_s = 60.0;
    cfg.fs = 128.0;
    size_t planted_total = 0, hit_total = 0;
    double worst_hr_err = 0.0;
    for (int rec = 0; rec < 50; ++rec) {
        // sweep a mix of flat and ramping fear trajectories
        std::vector<double> fear(60);
        for (int s = 0; s < 60; ++s) {
            switch (rec % 3) {
                case 0: fear[s] = 0.0; break;
                case 1: fear[s] = 1.0; break;
                default: fear[s] = s / 59.0; break;
            }
        }
        const auto ecg = gen_ecg(fear, cfg, derive_seed(5000, rec, 1));
        const auto detected = detect_r_peaks(ecg.samples, cfg.fs);

        size_t hits = 0, cursor = 0;
        for (double p : ecg.truth_times_s) {
            while (cursor + 1 < detected.size() &&
                   std::abs(detected[cursor + 1] - p) <= std::abs(detected[cursor] - p))
                ++cursor;
            if (std::abs(detected[cursor] - p) <= 0.010) ++hits;
        }
        planted_total += ecg.truth_times_s.size();
        hit_total += hits;

        const auto hr = hr_from_peaks(detected, 4.0, cfg.record_duration_s);
        double derived_mean = 0.0;
        for (double v : hr) derived_mean += v;
        derived_mean /= static_cast<double>(hr.size());
        const auto& t = ecg.truth_times_s;
        const double planted_mean =
            60.0 * static_cast<double>(t.size() - 1) / (t.back() - t.front());
        worst_hr_err = std::max(worst_hr_err, std::abs(derived_mean - planted_mean));
    }
    const double recall = static_cast<double>(hit_total) / static_cast<double>(planted_total);
    const bool pass = recall >= 0.99 && worst_hr_err < 1.0;
    return {pass, false,
            "recall " + fmt("%.4f", recall) + ", worst HR err " + fmt("%.3f", worst_hr_err) +
                " BPM over 50 records"};
}

Outcome featurizer_oracle() {
    Rng rng(404);
    ChannelSet ch;
    ch.grid_hz = 4.0;
    for (int i = 0; i < 200 * 4; ++i) {
        ch.hr.push_back(rng.normal());
        ch.gsr_phasic.push_back(rng.normal());
        ch.gsr_tonic.push_back(rng.normal());
    }
    const auto windows = featurize(ch, "s");
    const std::vector<double>* chans[3] = {&ch.hr, &ch.gsr_phasic, &ch.gsr_tonic};
    double worst = 0.0;
    for (const auto& w : windows) {
        const size_t begin = static_cast<size_t>(w.start_s) * 4;
        for (int c = 0; c < 3; ++c) {
            const auto ref = oracle::window_features(*chans[c], begin, 80);
            const double refs[4] = {ref.nmean, ref.nstd, ref.ndiff1, ref.ndiff2};
            for (int f = 0; f < 4; ++f)
                worst = std::max(worst, std::abs(w.features[4 * c + f] - refs[f]));
        }
    }
    return {worst < 1e-12, false,
            std::to_string(windows.size()) + " windows x 12 features, max err " +
                fmt("%.2e", worst)};
}

struct PipelineRun {
    std::filesystem::path dir;
    EvalReport report;
    double mean_fold_accuracy = 0.0;
};

PipelineRun run_pipeline(const SynthConfig& synth_cfg, const PipelineConfig& cfg,
                         const std::filesystem::path& dir) {
    std::filesystem::remove_all(dir);
    PipelineRun run;
    run.dir = dir;
    const auto manifest = gen_cohort(synth_cfg, dir);
    const auto cohort = load_and_featurize(manifest, cfg.grid_hz);
    const auto ensemble = train_fr(cohort, cfg);

    std::vector<FeatureWindow> source_windows;
    for (const auto& s : cohort)
        if (s.entry.role == Role::source)
            source_windows.insert(source_windows.end(), s.windows.begin(), s.windows.end());
    const auto accs = fold_accuracies(ensemble, source_windows);
    for (double a : accs) run.mean_fold_accuracy += a;
    run.mean_fold_accuracy /= static_cast<double>(accs.size());

    save_ensemble(ensemble, dir / "model.frm");
    const auto curves = build_target_curves(ensemble, cohort);
    const auto rows = to_subject_rows(curves);
    run.report = loo_evaluate(rows, BaselineMode::mean, cfg.sigma_grid_points);
    write_evaluation_outputs(run.report, curves, cfg, dir / "eval");
    return run;
}

PipelineRun g_default_run;  // criterion 7 output, reused by criterion 9

Outcome end_to_end_planted_recovery() {
    SynthConfig synth_cfg;  // 30 source + 24 target, 600 s, seed 7
    PipelineConfig cfg;
    cfg.mlp.seed = 7;
    const auto base = std::filesystem::temp_directory_path() / "spiderp_acceptance";
    g_default_run = run_pipeline(synth_cfg, cfg, base / "default_cohort");
    const auto& report = g_default_run.report;

    std::string detail = "fold acc " + fmt("%.3f", g_default_run.mean_fold_accuracy);
    if (g_default_run.mean_fold_accuracy <= 0.9) return {false, false, detail + " (a) <= 0.9"};

    // (b) group ordering of the measured static features against the planted
    // threshold-36 labels: PTSD-planted subjects start low and rise
    const auto entries = read_manifest(g_default_run.dir / "manifest.csv");
    const auto curves_csv = g_default_run.dir / "eval" / "static_features.csv";
    double slope_ptsd = 0.0, slope_no = 0.0, init_ptsd = 0.0, init_no = 0.0;
    int n_ptsd = 0, n_no = 0;
    {
        std::ifstream in(curves_csv);
        std::string line;
        std::getline(in, line);  // header
        while (std::getline(in, line)) {
            std::stringstream ss(line);
            std::string id, slope_s, init_s, sex_s, pclm_s;
            std::getline(ss, id, ',');
            std::getline(ss, slope_s, ',');
            std::getline(ss, init_s, ',');
            std::getline(ss, sex_s, ',');
            std::getline(ss, pclm_s, ',');
            const int pclm = std::stoi(pclm_s);
            if (pclm >= 36) {
                slope_ptsd += std::stod(slope_s);
                init_ptsd += std::stod(init_s);
                ++n_ptsd;
            } else {
                slope_no += std::stod(slope_s);
                init_no += std::stod(init_s);
                ++n_no;
            }
        }
    }
    slope_ptsd /= n_ptsd;
    init_ptsd /= n_ptsd;
    slope_no /= n_no;
    init_no /= n_no;
    detail += ", slope " + fmt("%.3f", slope_ptsd) + " vs " + fmt("%.3f", slope_no) +
              ", initial " + fmt("%.3f", init_ptsd) + " vs " + fmt("%.3f", init_no);
    if (!(slope_ptsd > slope_no && init_ptsd < init_no))
        return {false, false, detail + " (b) group ordering violated"};

    // (c) model beats the constant baseline on MAE
    detail += ", mae " + fmt("%.2f", report.spiderp.mae) + " vs baseline " +
              fmt("%.2f", report.baseline_constant.mae);
    if (!(report.spiderp.mae < report.baseline_constant.mae))
        return {false, false, detail + " (c) baseline not beaten"};

    // (d) binary accuracy against the planted threshold-36 labels
    detail += ", accuracy " + fmt("%.3f", report.spiderp.binary_accuracy);
    if (report.spiderp.binary_accuracy < 0.8) return {false, false, detail + " (d) < 0.8"};
    return {true, false, detail};
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

Outcome determinism() {
    SynthConfig synth_cfg;
    synth_cfg.seed = 11;
    synth_cfg.n_source_subjects = 8;
    synth_cfg.n_target_subjects = 6;
    synth_cfg.record_duration_s = 180.0;
    PipelineConfig cfg;
    cfg.k = 3;
    cfg.mlp.epochs = 25;
    cfg.mlp.seed = 11;

    const auto base = std::filesystem::temp_directory_path() / "spiderp_acceptance";
    const auto a = run_pipeline(synth_cfg, cfg, base / "det_a");
    const auto b = run_pipeline(synth_cfg, cfg, base / "det_b");

    if (slurp(a.dir / "model.frm") != slurp(b.dir / "model.frm"))
        return {false, false, "model files differ"};
    if (slurp(a.dir / "eval" / "report.json") != slurp(b.dir / "eval" / "report.json"))
        return {false, false, "reports differ"};
    if (slurp(a.dir / "manifest.csv") != slurp(b.dir / "manifest.csv"))
        return {false, false, "manifests differ"};
    return {true, false, "model file, report and manifest byte-identical across reruns"};
}

Outcome readout_contracts() {
    if (mkde::to_binary(36) != mkde::PtsdLabel::ptsd) return {false, false, "to_binary(36)"};
    if (mkde::to_binary(35) != mkde::PtsdLabel::no_ptsd) return {false, false, "to_binary(35)"};
    if (g_default_run.report.subjects.empty())
        return {false, false, "no densities from criterion 7"};
    double worst = 0.0;
    for (const auto& r : g_default_run.report.subjects) {
        double sum = 0.0;
        for (double p : r.density.probs) {
            if (p < 0.0) return {false, false, "negative density for " + r.id};
            sum += p;
        }
        worst = std::max(worst, std::abs(sum - 1.0));
    }
    return {worst < 1e-9, false,
            "threshold readouts exact; " + std::to_string(g_default_run.report.subjects.size()) +
                " densities sum to 1 within " + fmt("%.1e", worst)};
}

Outcome external_phobia_dataset() {
    const char* manifest = std::getenv("SPIDERP_PHOBIA_MANIFEST");
    if (!manifest)
        return {true, true,
                "informational: set SPIDERP_PHOBIA_MANIFEST to a phobia-cohort manifest to run"};
    PipelineConfig cfg;
    const auto cohort = load_and_featurize(manifest, cfg.grid_hz);
    const auto ensemble = train_fr(cohort, cfg);
    std::vector<FeatureWindow> source_windows;
    for (const auto& s : cohort)
        if (s.entry.role == Role::source)
            source_windows.insert(source_windows.end(), s.windows.begin(), s.windows.end());
    const auto accs = fold_accuracies(ensemble, source_windows);
    double mean = 0.0;
    for (double a : accs) mean += a;
    mean /= static_cast<double>(accs.size());
    return {true, false, "informational: mean fold accuracy " + fmt("%.3f", mean)};
}

}  // namespace

int main() {
    std::printf("SPIDERP acceptance suite\n");
    run_criterion(1, "MLP analytic gradient vs central finite differences", 5.0,
                  mlp_gradient_check);
    run_criterion(2, "MKDE matches the brute-force double loop (100 instances)", 10.0,
                  mkde_oracle_equivalence);
    run_criterion(3, "marginalization equals integration/summation", 10.0,
                  marginalization_exactness);
    run_criterion(4, "kernel factors carry unit mass", 0.0, kernel_normalization);
    run_criterion(5, "R-peak and HR recovery on 50 planted records", 30.0, rpeak_recovery);
    run_criterion(6, "featurizer matches the straight-loop oracle", 0.0, featurizer_oracle);
    run_criterion(7, "end-to-end planted recovery on the default cohort", 300.0,
                  end_to_end_planted_recovery);
    run_criterion(8, "byte-identical models and reports across reruns", 0.0, determinism);
    run_criterion(9, "threshold readouts and density normalization", 0.0, readout_contracts);
    run_criterion(10, "external phobia dataset (optional)", 0.0, external_phobia_dataset);

    std::error_code ec;
    std::filesystem::remove_all(std::filesystem::temp_directory_path() / "spiderp_acceptance",
                                ec);

    if (g_failures > 0) {
        std::printf("%d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
