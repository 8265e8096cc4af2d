#include "spiderp/pipeline.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "spiderp/csv.hpp"
#include "spiderp/errors.hpp"
#include "spiderp/features.hpp"

namespace spiderp {

using nlohmann::json;

namespace {

json config_to_json_obj(const PipelineConfig& c) {
    return json{
        {"mlp",
         {{"n_units", c.mlp.n_units},
          {"depth", c.mlp.depth},
          {"epochs", c.mlp.epochs},
          {"batch_size", c.mlp.batch_size},
          {"learning_rate", c.mlp.learning_rate},
          {"momentum", c.mlp.momentum},
          {"weight_decay", c.mlp.weight_decay},
          {"seed", c.mlp.seed}}},
        {"k", c.k},
        {"grid_hz", c.grid_hz},
        {"sigma_grid_points", c.sigma_grid_points},
        {"baseline", c.baseline},
    };
}

void merge_config(PipelineConfig& c, const json& j) {
    if (j.contains("mlp")) {
        const auto& m = j.at("mlp");
        if (m.contains("n_units")) c.mlp.n_units = m.at("n_units").get<int>();
        if (m.contains("depth")) c.mlp.depth = m.at("depth").get<int>();
        if (m.contains("epochs")) c.mlp.epochs = m.at("epochs").get<int>();
        if (m.contains("batch_size")) c.mlp.batch_size = m.at("batch_size").get<int>();
        if (m.contains("learning_rate")) c.mlp.learning_rate = m.at("learning_rate").get<double>();
        if (m.contains("momentum")) c.mlp.momentum = m.at("momentum").get<double>();
        if (m.contains("weight_decay")) c.mlp.weight_decay = m.at("weight_decay").get<double>();
        if (m.contains("seed")) c.mlp.seed = m.at("seed").get<uint64_t>();
    }
    if (j.contains("k")) c.k = j.at("k").get<int>();
    if (j.contains("grid_hz")) c.grid_hz = j.at("grid_hz").get<double>();
    if (j.contains("sigma_grid_points"))
        c.sigma_grid_points = j.at("sigma_grid_points").get<int>();
    if (j.contains("baseline")) c.baseline = j.at("baseline").get<std::string>();
    if (c.baseline != "mean" && c.baseline != "mode")
        throw IoError("config: baseline must be 'mean' or 'mode'");
}

}  // namespace

std::string pipeline_config_to_json(const PipelineConfig& config) {
    return config_to_json_obj(config).dump(2) + "\n";
}

PipelineConfig pipeline_config_from_json(const std::string& text) {
    PipelineConfig c;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw IoError(std::string("config: ") + e.what());
    }
    merge_config(c, j);
    return c;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MissingFile("cannot open config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return pipeline_config_from_json(ss.str());
}

void save_pipeline_config(const PipelineConfig& config, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << pipeline_config_to_json(config);
}

std::vector<SubjectWindows> load_and_featurize(const std::filesystem::path& manifest_path,
                                               double grid_hz) {
    const auto entries = read_manifest(manifest_path);
    const auto dir = manifest_path.parent_path();
    std::vector<SubjectWindows> cohort(entries.size());
    std::exception_ptr error;
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < static_cast<long long>(entries.size()); ++i) {
        try {
            cohort[i].entry = entries[i];
            cohort[i].windows = process_record(load_record(entries[i], dir), grid_hz);
        } catch (...) {
#pragma omp critical
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);
    return cohort;
}

FrEnsemble train_fr(const std::vector<SubjectWindows>& cohort, const PipelineConfig& config) {
    std::vector<FeatureWindow> source_windows;
    for (const auto& s : cohort) {
        if (s.entry.role != Role::source) continue;
        for (const auto& w : s.windows)
            if (w.fr_label) source_windows.push_back(w);
    }
    if (source_windows.empty())
        throw DegenerateLabels("train_fr: manifest has no labeled source windows");
    return train_ensemble(source_windows, config.k, config.mlp);
}

std::vector<SubjectCurve> build_target_curves(const FrEnsemble& ensemble,
                                              const std::vector<SubjectWindows>& cohort) {
    std::vector<SubjectCurve> out;
    for (const auto& s : cohort) {
        if (s.entry.role != Role::target) continue;
        SubjectCurve c;
        c.entry = s.entry;
        c.curve = build_curve(ensemble, s.windows);
        c.features = assemble(c.curve, s.entry.sex);
        out.push_back(std::move(c));
    }
    return out;
}

std::vector<SubjectRow> to_subject_rows(const std::vector<SubjectCurve>& curves) {
    std::vector<SubjectRow> rows;
    for (const auto& c : curves) {
        if (!c.entry.pclm) continue;
        rows.push_back({c.entry.id, c.features.slope, c.features.initial_fr, c.features.sex,
                        *c.entry.pclm});
    }
    return rows;
}

void write_curve_csv(const std::filesystem::path& path, const FearCurve& curve) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << "subject_id,start_s,score\n";
    for (size_t i = 0; i < curve.times_s.size(); ++i)
        out << curve.subject_id << ',' << format_shortest(curve.times_s[i]) << ','
            << format_full(curve.scores[i]) << '\n';
}

void write_static_features_csv(const std::filesystem::path& path,
                               const std::vector<SubjectCurve>& curves) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << "subject_id,slope,initial_fr,sex,pclm\n";
    for (const auto& c : curves) {
        out << c.entry.id << ',' << format_full(c.features.slope) << ','
            << format_full(c.features.initial_fr) << ',' << c.features.sex << ',';
        if (c.entry.pclm) out << *c.entry.pclm;
        out << '\n';
    }
}

void write_density_csv(const std::filesystem::path& path, const mkde::PclmDensity& density) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << "pclm,probability\n";
    for (int i = 0; i < mkde::kGridSize; ++i)
        out << mkde::PclmDensity::value_at(i) << ',' << format_full(density.probs[i]) << '\n';
}

void write_confusion_csv(const std::filesystem::path& path, const Confusion& confusion) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << ",pred_ptsd,pred_no_ptsd\n";
    out << "true_ptsd," << confusion.tp << ',' << confusion.fn << '\n';
    out << "true_no_ptsd," << confusion.fp << ',' << confusion.tn << '\n';
}

void write_features_csv(const std::filesystem::path& path,
                        const std::vector<SubjectWindows>& cohort) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << "subject_id,start_s";
    static const char* kChannels[] = {"hr", "gsr_phasic", "gsr_tonic"};
    static const char* kStats[] = {"nmean", "nstd", "ndiff1", "ndiff2"};
    for (const auto* ch : kChannels)
        for (const auto* st : kStats) out << ',' << ch << '_' << st;
    out << ",fr_label\n";
    for (const auto& s : cohort) {
        for (const auto& w : s.windows) {
            out << w.subject_id << ',' << format_shortest(w.start_s);
            for (double f : w.features) out << ',' << format_full(f);
            out << ',';
            if (w.fr_label) out << *w.fr_label;
            out << '\n';
        }
    }
}

namespace {

json metric_set_to_json(const MetricSet& m) {
    return json{{"mae", m.mae},
                {"mape_percent", m.mape_percent},
                {"binary_accuracy", m.binary_accuracy},
                {"confusion",
                 {{"tp", m.confusion.tp},
                  {"fp", m.confusion.fp},
                  {"fn", m.confusion.fn},
                  {"tn", m.confusion.tn}}}};
}

MetricSet metric_set_from_json(const json& j) {
    MetricSet m;
    m.mae = j.at("mae").get<double>();
    m.mape_percent = j.at("mape_percent").get<double>();
    m.binary_accuracy = j.at("binary_accuracy").get<double>();
    const auto& c = j.at("confusion");
    m.confusion.tp = c.at("tp").get<int>();
    m.confusion.fp = c.at("fp").get<int>();
    m.confusion.fn = c.at("fn").get<int>();
    m.confusion.tn = c.at("tn").get<int>();
    return m;
}

}  // namespace

std::string report_to_json(const EvalReport& report) {
    json subjects = json::array();
    for (const auto& r : report.subjects) {
        json density = json::array();
        for (double p : r.density.probs) density.push_back(p);
        subjects.push_back({{"id", r.id},
                            {"true_pclm", r.true_pclm},
                            {"pred_pclm", r.pred_pclm},
                            {"true_ptsd", r.true_ptsd},
                            {"pred_ptsd", r.pred_ptsd},
                            {"constant_pred", r.constant_pred},
                            {"sex_pred", r.sex_pred},
                            {"sigma", r.sigma},
                            {"density", std::move(density)}});
    }
    const json j{{"baseline_mode", report.baseline_mode == BaselineMode::mean ? "mean" : "mode"},
                 {"subjects", std::move(subjects)},
                 {"spiderp", metric_set_to_json(report.spiderp)},
                 {"baseline_constant", metric_set_to_json(report.baseline_constant)},
                 {"baseline_sex", metric_set_to_json(report.baseline_sex)}};
    return j.dump(2) + "\n";
}

void write_report(const EvalReport& report, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << report_to_json(report);
}

EvalReport report_from_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MissingFile("cannot open report " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw IoError(std::string("report: ") + e.what());
    }
    EvalReport report;
    report.baseline_mode =
        j.at("baseline_mode").get<std::string>() == "mode" ? BaselineMode::mode : BaselineMode::mean;
    for (const auto& s : j.at("subjects")) {
        SubjectResult r;
        r.id = s.at("id").get<std::string>();
        r.true_pclm = s.at("true_pclm").get<int>();
        r.pred_pclm = s.at("pred_pclm").get<int>();
        r.true_ptsd = s.at("true_ptsd").get<bool>();
        r.pred_ptsd = s.at("pred_ptsd").get<bool>();
        r.constant_pred = s.at("constant_pred").get<int>();
        r.sex_pred = s.at("sex_pred").get<int>();
        r.sigma = s.at("sigma").get<double>();
        const auto& density = s.at("density");
        for (int i = 0; i < mkde::kGridSize && i < static_cast<int>(density.size()); ++i)
            r.density.probs[i] = density[i].get<double>();
        report.subjects.push_back(std::move(r));
    }
    report.spiderp = metric_set_from_json(j.at("spiderp"));
    report.baseline_constant = metric_set_from_json(j.at("baseline_constant"));
    report.baseline_sex = metric_set_from_json(j.at("baseline_sex"));
    return report;
}

void write_evaluation_outputs(const EvalReport& report, const std::vector<SubjectCurve>& curves,
                              const PipelineConfig& config,
                              const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    write_report(report, out_dir / "report.json");
    write_confusion_csv(out_dir / "confusion.csv", report.spiderp.confusion);
    for (const auto& r : report.subjects)
        write_density_csv(out_dir / "densities" / (r.id + ".csv"), r.density);
    for (const auto& c : curves)
        write_curve_csv(out_dir / "curves" / (c.entry.id + ".csv"), c.curve);
    write_static_features_csv(out_dir / "static_features.csv", curves);
    save_pipeline_config(config, out_dir / "effective_config.json");
}

}  // namespace spiderp
