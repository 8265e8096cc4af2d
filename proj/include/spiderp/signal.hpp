#pragma once

#include <span>
#include <vector>

#include "spiderp/types.hpp"

namespace spiderp {

// R-peak detection on raw ECG: band-pass via difference of centered moving
// averages (~5-15 Hz), squared derivative, 150 ms integration window,
// adaptive threshold, 240 ms refractory. Returns strictly increasing peak
// times in seconds.
std::vector<double> detect_r_peaks(std::span<const double> ecg, double fs);

// Instantaneous heart rate (60/RR per interval, placed at interval
// midpoints) linearly interpolated onto a uniform grid of
// ceil(duration_s * grid_hz) samples; clamped extrapolation at the edges.
std::vector<double> hr_from_peaks(std::span<const double> peaks, double grid_hz,
                                  double duration_s);

struct GsrDecomposition {
    std::vector<double> phasic;
    std::vector<double> tonic;
};

// Downsamples gsr to grid_hz (block means), takes a 4 s median-filter
// baseline as the tonic component and the residual as phasic.
// tonic + phasic reconstructs the downsampled signal exactly.
GsrDecomposition decompose_gsr(std::span<const double> gsr, double fs, double grid_hz);

// Block-mean downsampling to a uniform grid of ceil(n/fs*grid_hz) samples.
std::vector<double> downsample(std::span<const double> x, double fs, double grid_hz);

// z-scores each channel with its full-record population statistics.
// Throws DeadChannel on zero variance.
ChannelSet normalize_subjectwise(const ChannelSet& channels);

// hr + gsr decomposition for one record, resampled to grid_hz (raw, not
// yet normalized). HR values are clamped to the physiological 20-250 BPM band.
ChannelSet derive_channels(const RawRecord& record, double grid_hz);

}  // namespace spiderp
