#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "spiderp/ensemble.hpp"
#include "spiderp/eval.hpp"
#include "spiderp/fear_features.hpp"
#include "spiderp/types.hpp"

namespace spiderp {

// Everything the pipeline commands share; fully serializable so runs are
// reproducible from the dumped config alone.
struct PipelineConfig {
    MlpConfig mlp;
    int k = 5;
    double grid_hz = 4.0;
    int sigma_grid_points = 99;
    std::string baseline = "mean";  // or "mode"
};

std::string pipeline_config_to_json(const PipelineConfig& config);
PipelineConfig pipeline_config_from_json(const std::string& text);
PipelineConfig load_pipeline_config(const std::filesystem::path& path);
void save_pipeline_config(const PipelineConfig& config, const std::filesystem::path& path);

// One manifest entry with its processed windows.
struct SubjectWindows {
    ManifestEntry entry;
    std::vector<FeatureWindow> windows;
};

// Loads and featurizes every manifest record (parallel over subjects).
std::vector<SubjectWindows> load_and_featurize(const std::filesystem::path& manifest_path,
                                               double grid_hz);

// Trains the fear-response ensemble on the manifest's source subjects.
FrEnsemble train_fr(const std::vector<SubjectWindows>& cohort, const PipelineConfig& config);

struct SubjectCurve {
    ManifestEntry entry;
    FearCurve curve;
    StaticFeatures features;
};

// Fear curves and static features for every target-role subject.
std::vector<SubjectCurve> build_target_curves(const FrEnsemble& ensemble,
                                              const std::vector<SubjectWindows>& cohort);

// Rows for the leave-one-out evaluation (target subjects with a PCL-M label).
std::vector<SubjectRow> to_subject_rows(const std::vector<SubjectCurve>& curves);

// Writers for the exported artifacts.
void write_curve_csv(const std::filesystem::path& path, const FearCurve& curve);
void write_static_features_csv(const std::filesystem::path& path,
                               const std::vector<SubjectCurve>& curves);
void write_density_csv(const std::filesystem::path& path, const mkde::PclmDensity& density);
void write_confusion_csv(const std::filesystem::path& path, const Confusion& confusion);
void write_features_csv(const std::filesystem::path& path,
                        const std::vector<SubjectWindows>& cohort);

std::string report_to_json(const EvalReport& report);
void write_report(const EvalReport& report, const std::filesystem::path& path);
EvalReport report_from_json_file(const std::filesystem::path& path);

// evaluate-command output bundle: report.json, confusion.csv, per-subject
// density and curve CSVs, and the effective config.
void write_evaluation_outputs(const EvalReport& report, const std::vector<SubjectCurve>& curves,
                              const PipelineConfig& config,
                              const std::filesystem::path& out_dir);

}  // namespace spiderp
