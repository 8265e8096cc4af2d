#pragma once

#include <string>
#include <vector>

#include "spiderp/types.hpp"

namespace spiderp {

// Per-channel window features over 20 s windows at 1 s stride:
// Nmean, Nstd (mean squared deviation, no square root), Ndiff1, Ndiff2,
// all divided by the window sample count. Channels must be normalized
// before calling (the pipeline order is derive -> normalize -> featurize).
std::vector<FeatureWindow> featurize(const ChannelSet& channels, const std::string& subject_id);

// Serial reference for the parallel featurize; identical numerics.
std::vector<FeatureWindow> featurize_serial(const ChannelSet& channels,
                                            const std::string& subject_id);

// Labels windows fully contained in an annotation interval; windows that
// overlap an interval without being contained are dropped; windows touching
// no interval stay unlabeled.
std::vector<FeatureWindow> attach_labels(std::vector<FeatureWindow> windows,
                                         const std::vector<Annotation>& annotations);

// Full per-record pipeline: derive channels, normalize subject-wise,
// featurize, attach labels from the record's annotations.
std::vector<FeatureWindow> process_record(const RawRecord& record, double grid_hz);

}  // namespace spiderp
