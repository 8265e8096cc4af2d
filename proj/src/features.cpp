#include "spiderp/features.hpp"

#include <cmath>

#include "spiderp/errors.hpp"
#include "spiderp/signal.hpp"

namespace spiderp {

namespace {

// Nmean, Nstd, Ndiff1, Ndiff2 of one channel window; every sum is divided
// by the window sample count n.
void channel_features(const std::vector<double>& x, size_t begin, size_t n, double* out) {
    double mean = 0.0;
    for (size_t i = 0; i < n; ++i) mean += x[begin + i];
    mean /= static_cast<double>(n);

    double msd = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double d = x[begin + i] - mean;
        msd += d * d;
    }

    double d1 = 0.0;
    for (size_t i = 0; i + 1 < n; ++i) d1 += std::abs(x[begin + i + 1] - x[begin + i]);

    double d2 = 0.0;
    for (size_t i = 0; i + 2 < n; ++i) d2 += std::abs(x[begin + i + 2] - x[begin + i]);

    out[0] = mean;
    out[1] = msd / static_cast<double>(n);
    out[2] = d1 / static_cast<double>(n);
    out[3] = d2 / static_cast<double>(n);
}

FeatureWindow window_at(const ChannelSet& ch, size_t start_s, size_t grid,
                        const std::string& subject_id) {
    FeatureWindow w;
    w.subject_id = subject_id;
    w.start_s = static_cast<double>(start_s);
    const size_t begin = start_s * grid;
    const size_t n = 20 * grid;
    channel_features(ch.hr, begin, n, w.features.data());
    channel_features(ch.gsr_phasic, begin, n, w.features.data() + 4);
    channel_features(ch.gsr_tonic, begin, n, w.features.data() + 8);
    return w;
}

size_t window_count(const ChannelSet& ch, size_t grid) {
    if (ch.hr.size() != ch.gsr_phasic.size() || ch.hr.size() != ch.gsr_tonic.size())
        throw LengthMismatch("featurize: channels have different lengths");
    const double duration = static_cast<double>(ch.hr.size()) / static_cast<double>(grid);
    if (duration < 20.0) throw RecordTooShort("featurize: need at least 20 s of channels");
    return static_cast<size_t>(std::floor(duration - 20.0)) + 1;
}

size_t integral_grid(double grid_hz) {
    const size_t grid = static_cast<size_t>(std::lround(grid_hz));
    if (grid < 1 || std::abs(grid_hz - static_cast<double>(grid)) > 1e-9)
        throw BadSamplingRate("featurize: grid_hz must be a positive integer");
    return grid;
}

}  // namespace

std::vector<FeatureWindow> featurize(const ChannelSet& channels, const std::string& subject_id) {
    const size_t grid = integral_grid(channels.grid_hz);
    const size_t n_windows = window_count(channels, grid);
    std::vector<FeatureWindow> windows(n_windows);
#pragma omp parallel for schedule(static)
    for (long long s = 0; s < static_cast<long long>(n_windows); ++s)
        windows[s] = window_at(channels, static_cast<size_t>(s), grid, subject_id);
    return windows;
}

std::vector<FeatureWindow> featurize_serial(const ChannelSet& channels,
                                            const std::string& subject_id) {
    const size_t grid = integral_grid(channels.grid_hz);
    const size_t n_windows = window_count(channels, grid);
    std::vector<FeatureWindow> windows;
    windows.reserve(n_windows);
    for (size_t s = 0; s < n_windows; ++s)
        windows.push_back(window_at(channels, s, grid, subject_id));
    return windows;
}

std::vector<FeatureWindow> attach_labels(std::vector<FeatureWindow> windows,
                                         const std::vector<Annotation>& annotations) {
    if (annotations.empty()) return windows;
    std::vector<FeatureWindow> kept;
    kept.reserve(windows.size());
    for (auto& w : windows) {
        const double lo = w.start_s;
        const double hi = w.start_s + 20.0;
        bool contained = false, overlaps = false;
        int label = 0;
        for (const auto& a : annotations) {
            if (lo >= a.start_s - 1e-9 && hi <= a.end_s + 1e-9) {
                contained = true;
                label = a.fr_label;
                break;
            }
            if (lo < a.end_s && hi > a.start_s) overlaps = true;
        }
        if (contained) {
            w.fr_label = label;
            kept.push_back(std::move(w));
        } else if (!overlaps) {
            kept.push_back(std::move(w));  // outside all intervals: unlabeled
        }
        // straddles an interval boundary: dropped
    }
    return kept;
}

std::vector<FeatureWindow> process_record(const RawRecord& record, double grid_hz) {
    const ChannelSet channels = normalize_subjectwise(derive_channels(record, grid_hz));
    return attach_labels(featurize(channels, record.subject_id), record.annotations);
}

}  // namespace spiderp
