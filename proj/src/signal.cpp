#include "spiderp/signal.hpp"

#include <algorithm>
#include <cmath>

#include "spiderp/errors.hpp"

namespace spiderp {

namespace {

// Centered moving average with window half-width hw (window 2*hw+1,
// truncated at the edges).
std::vector<double> moving_average(std::span<const double> x, int hw) {
    const int n = static_cast<int>(x.size());
    std::vector<double> out(x.size());
    if (hw <= 0) {
        std::copy(x.begin(), x.end(), out.begin());
        return out;
    }
    // prefix sums; window sums differ only at the edges
    std::vector<double> prefix(n + 1, 0.0);
    for (int i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + x[i];
    for (int i = 0; i < n; ++i) {
        const int lo = std::max(0, i - hw);
        const int hi = std::min(n - 1, i + hw);
        out[i] = (prefix[hi + 1] - prefix[lo]) / static_cast<double>(hi - lo + 1);
    }
    return out;
}

std::vector<double> median_filter(std::span<const double> x, int hw) {
    const int n = static_cast<int>(x.size());
    std::vector<double> out(n);
    std::vector<double> win;
    win.reserve(2 * hw + 1);
    for (int i = 0; i < n; ++i) {
        const int lo = std::max(0, i - hw);
        const int hi = std::min(n - 1, i + hw);
        win.assign(x.begin() + lo, x.begin() + hi + 1);
        const size_t mid = win.size() / 2;
        std::nth_element(win.begin(), win.begin() + mid, win.end());
        double med = win[mid];
        if (win.size() % 2 == 0) {
            const double lower = *std::max_element(win.begin(), win.begin() + mid);
            med = 0.5 * (lower + med);
        }
        out[i] = med;
    }
    return out;
}

}  // namespace

std::vector<double> detect_r_peaks(std::span<const double> ecg, double fs) {
    if (fs <= 0.0) throw BadSamplingRate("detect_r_peaks: fs must be positive");
    const int n = static_cast<int>(ecg.size());
    if (n < 2 * fs) throw RecordTooShort("detect_r_peaks: need at least 2 s of ECG");

    // band-pass ~5-15 Hz: subtract a 0.2 s baseline average, then smooth
    // with a 1/15 s average
    const int hw_high = std::max(1, static_cast<int>(std::lround(fs / 5.0 / 2.0)));
    const int hw_low = std::max(1, static_cast<int>(std::lround(fs / 15.0 / 2.0)));
    const auto baseline = moving_average(ecg, hw_high);
    std::vector<double> hp(n);
    for (int i = 0; i < n; ++i) hp[i] = ecg[i] - baseline[i];
    const auto bp = moving_average(hp, hw_low);

    // squared central derivative, then 150 ms moving-window integration
    std::vector<double> sq(n, 0.0);
    for (int i = 1; i + 1 < n; ++i) {
        const double d = 0.5 * (bp[i + 1] - bp[i - 1]) * fs;
        sq[i] = d * d;
    }
    const int hw_integ = std::max(1, static_cast<int>(std::lround(0.150 * fs / 2.0)));
    const auto integ = moving_average(sq, hw_integ);

    const double integ_max = *std::max_element(integ.begin(), integ.end());
    if (!(integ_max > 0.0)) throw NoPeaksFound("detect_r_peaks: flat signal");

    const int refractory = static_cast<int>(std::lround(0.240 * fs));
    const int refine_hw = static_cast<int>(std::lround(0.100 * fs));

    // adaptive threshold seeded from the first two seconds
    const int warmup = std::min(n, static_cast<int>(std::lround(2.0 * fs)));
    double signal_level = *std::max_element(integ.begin(), integ.begin() + warmup);
    double noise_level = 0.0;
    for (int i = 0; i < warmup; ++i) noise_level += integ[i];
    noise_level /= warmup;
    if (signal_level <= noise_level) signal_level = integ_max;

    std::vector<int> peak_idx;
    int last_accept = -refractory - 1;
    for (int i = 1; i + 1 < n; ++i) {
        if (!(integ[i] > integ[i - 1] && integ[i] >= integ[i + 1])) continue;
        const double threshold = noise_level + 0.25 * (signal_level - noise_level);
        if (integ[i] >= threshold) {
            if (i - last_accept > refractory) {
                // refine to the band-passed magnitude maximum nearby
                int best = i;
                double best_v = std::abs(bp[i]);
                for (int j = std::max(0, i - refine_hw);
                     j <= std::min(n - 1, i + refine_hw); ++j) {
                    if (std::abs(bp[j]) > best_v) {
                        best_v = std::abs(bp[j]);
                        best = j;
                    }
                }
                if (!peak_idx.empty() && best - peak_idx.back() <= refractory) {
                    // refinement collided with the previous peak; keep the larger
                    if (best_v > std::abs(bp[peak_idx.back()])) peak_idx.back() = best;
                } else {
                    peak_idx.push_back(best);
                }
                last_accept = i;
                signal_level = 0.875 * signal_level + 0.125 * integ[i];
            } else {
                noise_level = 0.875 * noise_level + 0.125 * integ[i];
            }
        } else {
            noise_level = 0.875 * noise_level + 0.125 * integ[i];
        }
    }

    if (peak_idx.empty()) throw NoPeaksFound("detect_r_peaks: no QRS-like activity");

    std::vector<double> peaks;
    peaks.reserve(peak_idx.size());
    for (int idx : peak_idx) peaks.push_back(static_cast<double>(idx) / fs);
    return peaks;
}

std::vector<double> hr_from_peaks(std::span<const double> peaks, double grid_hz,
                                  double duration_s) {
    if (peaks.size() < 2) throw TooFewPeaks("hr_from_peaks: need at least 2 peaks");
    const size_t n_intervals = peaks.size() - 1;
    std::vector<double> mid(n_intervals), bpm(n_intervals);
    for (size_t j = 0; j < n_intervals; ++j) {
        const double rr = peaks[j + 1] - peaks[j];
        if (rr <= 0.0) throw TooFewPeaks("hr_from_peaks: peak times not strictly increasing");
        mid[j] = 0.5 * (peaks[j] + peaks[j + 1]);
        bpm[j] = 60.0 / rr;
    }

    const size_t n_out = static_cast<size_t>(std::ceil(duration_s * grid_hz));
    std::vector<double> hr(n_out);
    size_t seg = 0;
    for (size_t k = 0; k < n_out; ++k) {
        const double t = static_cast<double>(k) / grid_hz;
        if (t <= mid.front()) {
            hr[k] = bpm.front();
        } else if (t >= mid.back()) {
            hr[k] = bpm.back();
        } else {
            while (mid[seg + 1] < t) ++seg;
            const double w = (t - mid[seg]) / (mid[seg + 1] - mid[seg]);
            hr[k] = bpm[seg] + w * (bpm[seg + 1] - bpm[seg]);
        }
    }
    return hr;
}

std::vector<double> downsample(std::span<const double> x, double fs, double grid_hz) {
    const size_t n = x.size();
    const size_t n_out =
        static_cast<size_t>(std::ceil(static_cast<double>(n) / fs * grid_hz));
    std::vector<double> out(n_out);
    for (size_t k = 0; k < n_out; ++k) {
        size_t lo = static_cast<size_t>(std::floor(static_cast<double>(k) * fs / grid_hz));
        size_t hi = static_cast<size_t>(std::floor(static_cast<double>(k + 1) * fs / grid_hz));
        lo = std::min(lo, n - 1);
        hi = std::min(std::max(hi, lo + 1), n);
        double sum = 0.0;
        for (size_t i = lo; i < hi; ++i) sum += x[i];
        out[k] = sum / static_cast<double>(hi - lo);
    }
    return out;
}

GsrDecomposition decompose_gsr(std::span<const double> gsr, double fs, double grid_hz) {
    if (fs <= 0.0) throw BadSamplingRate("decompose_gsr: fs must be positive");
    if (static_cast<double>(gsr.size()) < 10.0 * fs)
        throw RecordTooShort("decompose_gsr: need at least 10 s of GSR");
    const auto down = downsample(gsr, fs, grid_hz);
    const int hw = std::max(1, static_cast<int>(std::lround(2.0 * grid_hz)));  // 4 s kernel
    GsrDecomposition d;
    d.tonic = median_filter(down, hw);
    d.phasic.resize(down.size());
    for (size_t i = 0; i < down.size(); ++i) d.phasic[i] = down[i] - d.tonic[i];
    return d;
}

namespace {

std::vector<double> zscore(const std::vector<double>& x, const char* channel_name) {
    const double n = static_cast<double>(x.size());
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    var /= n;
    if (var <= 0.0)
        throw DeadChannel(std::string("normalize_subjectwise: zero variance in ") + channel_name);
    const double inv_sd = 1.0 / std::sqrt(var);
    std::vector<double> out(x.size());
    for (size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - mean) * inv_sd;
    return out;
}

}  // namespace

ChannelSet normalize_subjectwise(const ChannelSet& channels) {
    ChannelSet out;
    out.grid_hz = channels.grid_hz;
    out.hr = zscore(channels.hr, "hr");
    out.gsr_phasic = zscore(channels.gsr_phasic, "gsr_phasic");
    out.gsr_tonic = zscore(channels.gsr_tonic, "gsr_tonic");
    return out;
}

ChannelSet derive_channels(const RawRecord& record, double grid_hz) {
    ChannelSet ch;
    ch.grid_hz = grid_hz;
    const auto peaks = detect_r_peaks(record.ecg, record.fs);
    ch.hr = hr_from_peaks(peaks, grid_hz, record.duration_s());
    for (double& v : ch.hr) v = std::clamp(v, 20.0, 250.0);
    auto d = decompose_gsr(record.gsr, record.fs, grid_hz);
    ch.gsr_phasic = std::move(d.phasic);
    ch.gsr_tonic = std::move(d.tonic);
    if (ch.gsr_phasic.size() != ch.hr.size()) {
        // rounding at the record tail can differ by one grid sample
        const size_t n = std::min(ch.hr.size(), ch.gsr_phasic.size());
        ch.hr.resize(n);
        ch.gsr_phasic.resize(n);
        ch.gsr_tonic.resize(n);
    }
    return ch;
}

}  // namespace spiderp
