// spiderp: synthetic-cohort generation, fear-response model training and
// PTSD severity evaluation from physiological records.

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>

#include "spiderp/csv.hpp"
#include "spiderp/ensemble.hpp"
#include "spiderp/errors.hpp"
#include "spiderp/eval.hpp"
#include "spiderp/pipeline.hpp"
#include "spiderp/synth.hpp"

namespace {

enum class LogLevel { quiet = 0, info = 1, debug = 2 };

LogLevel log_level() {
    const char* env = std::getenv("SPIDERP_LOG");
    if (!env) return LogLevel::info;
    const std::string v = env;
    if (v == "quiet") return LogLevel::quiet;
    if (v == "debug") return LogLevel::debug;
    return LogLevel::info;
}

void log_info(const std::string& msg) {
    if (log_level() >= LogLevel::info) std::fprintf(stderr, "%s\n", msg.c_str());
}

// config file < explicit flags
struct ConfigFlags {
    std::optional<std::string> config_path;
    std::optional<int> k, epochs, batch_size, n_units, depth, sigma_grid_points;
    std::optional<double> learning_rate, momentum, weight_decay, grid_hz;
    std::optional<uint64_t> seed;
    std::optional<std::string> baseline;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config_path, "pipeline config JSON");
        cmd->add_option("--k", k, "ensemble fold count");
        cmd->add_option("--epochs", epochs);
        cmd->add_option("--batch-size", batch_size);
        cmd->add_option("--n-units", n_units);
        cmd->add_option("--depth", depth);
        cmd->add_option("--learning-rate", learning_rate);
        cmd->add_option("--momentum", momentum);
        cmd->add_option("--weight-decay", weight_decay);
        cmd->add_option("--grid-hz", grid_hz, "derived-channel resample rate");
        cmd->add_option("--sigma-grid-points", sigma_grid_points, "bandwidth grid resolution");
        cmd->add_option("--seed", seed, "training seed");
        cmd->add_option("--baseline", baseline, "constant/sex baseline statistic: mean|mode")
            ->check(CLI::IsMember({"mean", "mode"}));
    }

    spiderp::PipelineConfig resolve() const {
        spiderp::PipelineConfig cfg;
        if (config_path) cfg = spiderp::load_pipeline_config(*config_path);
        if (k) cfg.k = *k;
        if (epochs) cfg.mlp.epochs = *epochs;
        if (batch_size) cfg.mlp.batch_size = *batch_size;
        if (n_units) cfg.mlp.n_units = *n_units;
        if (depth) cfg.mlp.depth = *depth;
        if (learning_rate) cfg.mlp.learning_rate = *learning_rate;
        if (momentum) cfg.mlp.momentum = *momentum;
        if (weight_decay) cfg.mlp.weight_decay = *weight_decay;
        if (grid_hz) cfg.grid_hz = *grid_hz;
        if (sigma_grid_points) cfg.sigma_grid_points = *sigma_grid_points;
        if (seed) cfg.mlp.seed = *seed;
        if (baseline) cfg.baseline = *baseline;
        return cfg;
    }
};

spiderp::BaselineMode baseline_mode(const spiderp::PipelineConfig& cfg) {
    return cfg.baseline == "mode" ? spiderp::BaselineMode::mode : spiderp::BaselineMode::mean;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SPIDERP physiological PTSD-severity pipeline"};
    app.require_subcommand(1);

    // --- synth ---
    auto* synth = app.add_subcommand("synth", "generate a synthetic cohort");
    std::string synth_out;
    spiderp::SynthConfig synth_cfg;
    synth->add_option("--out", synth_out, "output directory")->required();
    synth->add_option("--seed", synth_cfg.seed);
    synth->add_option("--n-source", synth_cfg.n_source_subjects);
    synth->add_option("--n-target", synth_cfg.n_target_subjects);
    synth->add_option("--duration-s", synth_cfg.record_duration_s);
    synth->add_option("--fs", synth_cfg.fs);
    synth->add_option("--hr-baseline", synth_cfg.hr_baseline_bpm);
    synth->add_option("--hr-elevation", synth_cfg.hr_fear_elevation_bpm);
    synth->add_option("--scr-rate-fear", synth_cfg.scr_rate_fear_per_min);
    synth->add_option("--scr-rate-rest", synth_cfg.scr_rate_rest_per_min);
    synth->callback([&] {
        const auto manifest = spiderp::gen_cohort(synth_cfg, synth_out);
        log_info("wrote " + manifest.string());
    });

    // --- featurize ---
    auto* featurize = app.add_subcommand("featurize", "dump per-window features to CSV");
    std::string feat_manifest, feat_out;
    ConfigFlags feat_flags;
    featurize->add_option("--manifest", feat_manifest, "cohort manifest")->required();
    featurize->add_option("--out", feat_out, "output CSV")->required();
    feat_flags.attach(featurize);
    featurize->callback([&] {
        const auto cfg = feat_flags.resolve();
        const auto cohort = spiderp::load_and_featurize(feat_manifest, cfg.grid_hz);
        spiderp::write_features_csv(feat_out, cohort);
        size_t n = 0;
        for (const auto& s : cohort) n += s.windows.size();
        log_info("wrote " + std::to_string(n) + " windows to " + feat_out);
    });

    // --- train-fr ---
    auto* train = app.add_subcommand("train-fr", "train the fear-response ensemble");
    std::string train_manifest, train_out;
    ConfigFlags train_flags;
    train->add_option("--manifest", train_manifest, "cohort manifest")->required();
    train->add_option("--out", train_out, "output model file")->required();
    train_flags.attach(train);
    train->callback([&] {
        const auto cfg = train_flags.resolve();
        const auto cohort = spiderp::load_and_featurize(train_manifest, cfg.grid_hz);
        const auto ensemble = spiderp::train_fr(cohort, cfg);

        std::vector<spiderp::FeatureWindow> source_windows;
        for (const auto& s : cohort)
            if (s.entry.role == spiderp::Role::source)
                source_windows.insert(source_windows.end(), s.windows.begin(), s.windows.end());
        const auto acc = spiderp::fold_accuracies(ensemble, source_windows);
        double mean_acc = 0.0;
        for (size_t i = 0; i < acc.size(); ++i) {
            std::printf("fold %zu held-out accuracy: %.4f\n", i, acc[i]);
            mean_acc += acc[i];
        }
        std::printf("mean fold accuracy: %.4f\n", mean_acc / static_cast<double>(acc.size()));

        spiderp::save_ensemble(ensemble, train_out);
        const std::filesystem::path cfg_path =
            std::filesystem::path(train_out).replace_extension(".config.json");
        spiderp::save_pipeline_config(cfg, cfg_path);
        log_info("wrote " + train_out);
    });

    // --- curves ---
    auto* curves = app.add_subcommand("curves", "export fear curves and static features");
    std::string curves_manifest, curves_model, curves_out;
    ConfigFlags curves_flags;
    curves->add_option("--manifest", curves_manifest)->required();
    curves->add_option("--model", curves_model, "fear-response model file")->required();
    curves->add_option("--out", curves_out, "output directory")->required();
    curves_flags.attach(curves);
    curves->callback([&] {
        const auto cfg = curves_flags.resolve();
        const auto cohort = spiderp::load_and_featurize(curves_manifest, cfg.grid_hz);
        const auto ensemble = spiderp::load_ensemble(curves_model);
        const auto subject_curves = spiderp::build_target_curves(ensemble, cohort);
        for (const auto& c : subject_curves)
            spiderp::write_curve_csv(std::filesystem::path(curves_out) / "curves" /
                                         (c.entry.id + ".csv"),
                                     c.curve);
        spiderp::write_static_features_csv(
            std::filesystem::path(curves_out) / "static_features.csv", subject_curves);
        log_info("wrote curves for " + std::to_string(subject_curves.size()) + " subjects");
    });

    // --- evaluate ---
    auto* evaluate = app.add_subcommand("evaluate", "leave-one-out evaluation on the target cohort");
    std::string eval_manifest, eval_model, eval_out;
    ConfigFlags eval_flags;
    evaluate->add_option("--manifest", eval_manifest)->required();
    evaluate->add_option("--model", eval_model, "fear-response model file")->required();
    evaluate->add_option("--out", eval_out, "output directory")->required();
    eval_flags.attach(evaluate);
    evaluate->callback([&] {
        const auto cfg = eval_flags.resolve();
        const auto cohort = spiderp::load_and_featurize(eval_manifest, cfg.grid_hz);
        const auto ensemble = spiderp::load_ensemble(eval_model);
        const auto subject_curves = spiderp::build_target_curves(ensemble, cohort);
        const auto rows = spiderp::to_subject_rows(subject_curves);
        const auto report =
            spiderp::loo_evaluate(rows, baseline_mode(cfg), cfg.sigma_grid_points);
        spiderp::write_evaluation_outputs(report, subject_curves, cfg, eval_out);
        std::printf("subjects: %zu\n", report.subjects.size());
        std::printf("spiderp           mae %.3f  mape %.1f%%  accuracy %.3f\n", report.spiderp.mae,
                    report.spiderp.mape_percent, report.spiderp.binary_accuracy);
        std::printf("constant baseline mae %.3f  mape %.1f%%  accuracy %.3f\n",
                    report.baseline_constant.mae, report.baseline_constant.mape_percent,
                    report.baseline_constant.binary_accuracy);
        std::printf("sex baseline      mae %.3f  mape %.1f%%  accuracy %.3f\n",
                    report.baseline_sex.mae, report.baseline_sex.mape_percent,
                    report.baseline_sex.binary_accuracy);
        log_info("wrote " + (std::filesystem::path(eval_out) / "report.json").string());
    });

    // --- report ---
    auto* report_cmd = app.add_subcommand("report", "print a saved evaluation report");
    std::string report_path;
    report_cmd->add_option("--in", report_path, "report.json path")->required();
    report_cmd->callback([&] {
        const auto report = spiderp::report_from_json_file(report_path);
        std::printf("%-10s %5s %5s %5s %5s %5s\n", "subject", "pclm", "pred", "const", "sex",
                    "ptsd");
        for (const auto& r : report.subjects)
            std::printf("%-10s %5d %5d %5d %5d %5s\n", r.id.c_str(), r.true_pclm, r.pred_pclm,
                        r.constant_pred, r.sex_pred, r.pred_ptsd ? "yes" : "no");
        std::printf("spiderp           mae %.3f  mape %.1f%%  accuracy %.3f\n", report.spiderp.mae,
                    report.spiderp.mape_percent, report.spiderp.binary_accuracy);
        std::printf("constant baseline mae %.3f  mape %.1f%%  accuracy %.3f\n",
                    report.baseline_constant.mae, report.baseline_constant.mape_percent,
                    report.baseline_constant.binary_accuracy);
        std::printf("sex baseline      mae %.3f  mape %.1f%%  accuracy %.3f\n",
                    report.baseline_sex.mae, report.baseline_sex.mape_percent,
                    report.baseline_sex.binary_accuracy);
        const auto& c = report.spiderp.confusion;
        std::printf("confusion tp=%d fp=%d fn=%d tn=%d\n", c.tp, c.fp, c.fn, c.tn);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::fprintf(stderr, "error: usage: %s\n", e.what());
        return 2;
    } catch (const spiderp::SpiderpError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
