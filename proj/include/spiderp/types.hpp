#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace spiderp {

// One labeled interval of a source record: [start_s, end_s) carries fr_label.
struct Annotation {
    double start_s = 0.0;
    double end_s = 0.0;
    int fr_label = 0;  // 0 = rest, 1 = fear response
};

// Raw multichannel record as loaded from disk. ecg amplitude units are
// arbitrary, gsr is in microsiemens, both sampled at fs.
struct RawRecord {
    std::string subject_id;
    double fs = 0.0;
    std::vector<double> ecg;
    std::vector<double> gsr;
    std::vector<Annotation> annotations;

    double duration_s() const { return fs > 0.0 ? static_cast<double>(ecg.size()) / fs : 0.0; }
};

// Derived channels on a uniform grid: heart rate (BPM), phasic and tonic
// skin conductance. All three share one length and time base.
struct ChannelSet {
    std::vector<double> hr;
    std::vector<double> gsr_phasic;
    std::vector<double> gsr_tonic;
    double grid_hz = 4.0;

    size_t length() const { return hr.size(); }
    double duration_s() const { return grid_hz > 0.0 ? static_cast<double>(hr.size()) / grid_hz : 0.0; }
};

inline constexpr int kFeatureDim = 12;

// Feature layout: channel-major (hr, gsr_phasic, gsr_tonic) x
// (Nmean, Nstd, Ndiff1, Ndiff2).
struct FeatureWindow {
    std::string subject_id;
    double start_s = 0.0;
    std::array<double, kFeatureDim> features{};
    std::optional<int> fr_label;
};

enum class Role { source, target };

// One line of the cohort manifest. Paths are relative to the manifest file.
struct ManifestEntry {
    std::string id;
    Role role = Role::target;
    int sex = 0;  // 0 = male, 1 = female
    std::optional<int> pclm;
    double fs = 0.0;  // declared sampling rate of the signal files
    std::string ecg_path;
    std::string gsr_path;
    std::optional<std::string> annotation_path;
};

}  // namespace spiderp
