#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "spiderp/csv.hpp"
#include "spiderp/errors.hpp"
#include "spiderp/pipeline.hpp"
#include "spiderp/rng.hpp"

using namespace spiderp;

namespace {

std::filesystem::path temp_dir() {
    const auto dir = std::filesystem::temp_directory_path() / "spiderp_io_test";
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("signal CSV round-trips and validates the declared rate") {
    const auto dir = temp_dir();
    Rng rng(1);
    std::vector<double> samples(256 * 60);
    for (auto& v : samples) v = rng.normal();

    const auto path = dir / "sig.csv";
    write_signal_csv(path, samples, 256.0);
    const auto back = read_signal_csv(path, 256.0);
    REQUIRE(back.size() == samples.size());
    CHECK(back.size() == 15360);  // 60 s at 256 Hz
    for (size_t i = 0; i < samples.size(); ++i) CHECK(back[i] == samples[i]);

    // declared rate disagreeing with the t column is rejected
    CHECK_THROWS_AS(read_signal_csv(path, 250.0), BadSamplingRate);
    CHECK_THROWS_AS(read_signal_csv(path, 0.0), BadSamplingRate);
    CHECK_THROWS_AS(read_signal_csv(dir / "nope.csv", 256.0), MissingFile);
}

TEST_CASE("load_record enforces the record invariants") {
    const auto dir = temp_dir();
    Rng rng(2);
    std::vector<double> ecg(128 * 30), gsr(128 * 30);
    for (auto& v : ecg) v = rng.normal();
    for (auto& v : gsr) v = 2.0 + 0.1 * rng.normal();

    write_signal_csv(dir / "e.csv", ecg, 128.0);
    write_signal_csv(dir / "g.csv", gsr, 128.0);

    ManifestEntry entry;
    entry.id = "x";
    entry.role = Role::target;
    entry.fs = 128.0;
    entry.ecg_path = "e.csv";
    entry.gsr_path = "g.csv";

    const auto rec = load_record(entry, dir);
    CHECK(rec.ecg.size() == ecg.size());
    CHECK(rec.duration_s() == doctest::Approx(30.0));

    SUBCASE("gsr one sample short") {
        gsr.pop_back();
        write_signal_csv(dir / "g.csv", gsr, 128.0);
        CHECK_THROWS_AS(load_record(entry, dir), LengthMismatch);
    }
    SUBCASE("nonpositive sampling rate") {
        entry.fs = 0.0;
        CHECK_THROWS_AS(load_record(entry, dir), BadSamplingRate);
    }
    SUBCASE("missing ecg file") {
        entry.ecg_path = "missing.csv";
        CHECK_THROWS_AS(load_record(entry, dir), MissingFile);
    }
    SUBCASE("record below 20 s") {
        std::vector<double> stub(128 * 15, 0.1);
        write_signal_csv(dir / "e.csv", stub, 128.0);
        write_signal_csv(dir / "g.csv", stub, 128.0);
        CHECK_THROWS_AS(load_record(entry, dir), RecordTooShort);
    }
    SUBCASE("overlapping annotations") {
        write_annotation_csv(dir / "a.csv", {{0.0, 20.0, 1}, {15.0, 30.0, 0}});
        entry.annotation_path = "a.csv";
        CHECK_THROWS_AS(load_record(entry, dir), IoError);
    }
    SUBCASE("annotation beyond the record") {
        write_annotation_csv(dir / "a.csv", {{0.0, 31.0, 1}});
        entry.annotation_path = "a.csv";
        CHECK_THROWS_AS(load_record(entry, dir), IoError);
    }
}

TEST_CASE("manifest round-trips including optional fields") {
    const auto dir = temp_dir();
    std::vector<ManifestEntry> entries;
    ManifestEntry a{"s1", Role::source, 0, std::nullopt, 128.0, "e1.csv", "g1.csv", "a1.csv"};
    ManifestEntry b{"t1", Role::target, 1, 43, 256.0, "e2.csv", "g2.csv", std::nullopt};
    entries.push_back(a);
    entries.push_back(b);
    write_manifest(dir / "m.csv", entries);
    const auto back = read_manifest(dir / "m.csv");
    REQUIRE(back.size() == 2);
    CHECK(back[0].id == "s1");
    CHECK(back[0].role == Role::source);
    CHECK(!back[0].pclm);
    CHECK(back[0].annotation_path == "a1.csv");
    CHECK(back[1].role == Role::target);
    CHECK(back[1].sex == 1);
    REQUIRE(back[1].pclm);
    CHECK(*back[1].pclm == 43);
    CHECK(back[1].fs == 256.0);
    CHECK(!back[1].annotation_path);
}

TEST_CASE("pipeline config dump -> load -> dump is byte-identical") {
    PipelineConfig cfg;
    cfg.mlp.learning_rate = 0.007;
    cfg.mlp.seed = 123456789;
    cfg.k = 7;
    cfg.grid_hz = 4.0;
    cfg.baseline = "mode";
    const auto dumped = pipeline_config_to_json(cfg);
    const auto reloaded = pipeline_config_from_json(dumped);
    CHECK(pipeline_config_to_json(reloaded) == dumped);
    CHECK(reloaded.mlp.learning_rate == cfg.mlp.learning_rate);
    CHECK(reloaded.k == 7);
    CHECK(reloaded.baseline == "mode");
}

TEST_CASE("config defaults stay pinned") {
    const PipelineConfig cfg;
    CHECK(cfg.mlp.n_units == 16);
    CHECK(cfg.mlp.depth == 6);
    CHECK(cfg.mlp.epochs == 100);
    CHECK(cfg.mlp.batch_size == 512);
    CHECK(cfg.mlp.learning_rate == 0.01);
    CHECK(cfg.mlp.momentum == 0.9);
    CHECK(cfg.mlp.weight_decay == 0.001);
    CHECK(cfg.sigma_grid_points == 99);
    CHECK(cfg.baseline == "mean");
}

TEST_CASE("evaluation report JSON round-trips") {
    EvalReport report;
    report.baseline_mode = BaselineMode::mean;
    SubjectResult r;
    r.id = "t1";
    r.true_pclm = 40;
    r.pred_pclm = 38;
    r.true_ptsd = true;
    r.pred_ptsd = true;
    r.constant_pred = 32;
    r.sex_pred = 31;
    r.sigma = 0.125;
    for (int g = 0; g < mkde::kGridSize; ++g) r.density.probs[g] = 1.0 / mkde::kGridSize;
    report.subjects.push_back(r);
    report.spiderp = {2.0, 5.0, 1.0, {1, 0, 0, 0}};
    report.baseline_constant = {8.0, 25.0, 0.0, {0, 0, 1, 0}};
    report.baseline_sex = {9.0, 30.0, 0.0, {0, 0, 1, 0}};

    const auto dir = temp_dir();
    write_report(report, dir / "report.json");
    const auto back = report_from_json_file(dir / "report.json");
    REQUIRE(back.subjects.size() == 1);
    CHECK(back.subjects[0].id == "t1");
    CHECK(back.subjects[0].pred_pclm == 38);
    CHECK(back.subjects[0].sigma == 0.125);
    CHECK(back.spiderp.mae == 2.0);
    CHECK(back.baseline_constant.confusion.fn == 1);
    CHECK(report_to_json(back) == report_to_json(report));
}

TEST_CASE("format_full survives a text round-trip exactly") {
    Rng rng(9);
    for (int i = 0; i < 200; ++i) {
        const double v = (rng.uniform() - 0.5) * std::pow(10.0, int(rng.below(12)) - 6);
        CHECK(std::stod(format_full(v)) == v);
    }
}
