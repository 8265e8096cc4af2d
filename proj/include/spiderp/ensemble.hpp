#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "spiderp/mlp.hpp"
#include "spiderp/types.hpp"

namespace spiderp {

// Per-subject labeled-window statistics used for fold balancing.
struct SubjectWindowStats {
    std::string id;
    size_t n_windows = 0;
    size_t n_positive = 0;
};

// Partitions subjects into k folds of near-equal size (difference <= 1
// subject), greedily balancing the per-fold positive-window fraction.
// Subjects are placed in order of decreasing positive fraction, ties by id;
// the seed parameter is reserved and does not affect the assignment.
std::vector<std::vector<std::string>> group_kfold(const std::vector<SubjectWindowStats>& subjects,
                                                  int k, uint64_t seed);

struct FrEnsemble {
    MlpConfig config;
    std::vector<std::vector<std::string>> folds;  // held-out subjects per member
    std::vector<Mlp> members;

    int k() const { return static_cast<int>(members.size()); }
};

// Trains one MLP per fold on the windows of all other folds; member i uses
// seed config.seed + i. Members train in parallel; the result is identical
// for any thread count.
FrEnsemble train_ensemble(const std::vector<FeatureWindow>& source_windows, int k,
                          const MlpConfig& config);
FrEnsemble train_ensemble_serial(const std::vector<FeatureWindow>& source_windows, int k,
                                 const MlpConfig& config);

// Mean of the K member outputs. Throws NonFiniteFeature on bad input.
double score(const FrEnsemble& ensemble, const FeatureWindow& window);

// Batch scoring; parallel over windows with a serial reference twin.
std::vector<double> score_all(const FrEnsemble& ensemble,
                              const std::vector<FeatureWindow>& windows);
std::vector<double> score_all_serial(const FrEnsemble& ensemble,
                                     const std::vector<FeatureWindow>& windows);

// Held-out accuracy of each member on its own fold.
std::vector<double> fold_accuracies(const FrEnsemble& ensemble,
                                    const std::vector<FeatureWindow>& source_windows);

// Versioned text container; floats printed with 17 significant digits so
// save/load round-trips exactly.
void save_ensemble(const FrEnsemble& ensemble, const std::filesystem::path& path);
FrEnsemble load_ensemble(const std::filesystem::path& path);

// Converts labeled windows to a training matrix (unlabeled windows skipped).
Dataset windows_to_dataset(const std::vector<FeatureWindow>& windows);

}  // namespace spiderp
