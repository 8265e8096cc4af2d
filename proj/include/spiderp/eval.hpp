#pragma once

#include <span>
#include <string>
#include <vector>

#include "spiderp/mkde.hpp"

namespace spiderp {

// One target-cohort subject ready for the density model.
struct SubjectRow {
    std::string id;
    double slope = 0.0;
    double initial_fr = 0.0;
    int sex = 0;
    int pclm = 0;
};

enum class BaselineMode { mean, mode };

struct Confusion {
    int tp = 0, fp = 0, fn = 0, tn = 0;
    int total() const { return tp + fp + fn + tn; }
    double accuracy() const {
        return total() ? static_cast<double>(tp + tn) / total() : 0.0;
    }
};

struct MetricSet {
    double mae = 0.0;
    double mape_percent = 0.0;
    double binary_accuracy = 0.0;
    Confusion confusion;
};

struct SubjectResult {
    std::string id;
    int true_pclm = 0;
    int pred_pclm = 0;
    bool true_ptsd = false;
    bool pred_ptsd = false;
    int constant_pred = 0;
    int sex_pred = 0;
    double sigma = 0.0;  // bandwidth selected by this subject's fold
    mkde::PclmDensity density;
};

struct EvalReport {
    std::vector<SubjectResult> subjects;
    MetricSet spiderp;
    MetricSet baseline_constant;
    MetricSet baseline_sex;
    BaselineMode baseline_mode = BaselineMode::mean;
};

// (mae, mape_percent); throws LengthMismatch on size disagreement.
std::pair<double, double> metrics(std::span<const int> true_pclm, std::span<const int> pred_pclm);

// Prediction of the constant baseline from a training fold's labels:
// round-half-even mean, or the most frequent label (smallest on ties).
int constant_baseline(std::span<const int> train_labels, BaselineMode mode);

// Same-sex variant; falls back to the constant baseline when the training
// fold has no subject of the query sex.
int sex_baseline(std::span<const int> train_labels, std::span<const int> train_sex, int query_sex,
                 BaselineMode mode);

// Leave-one-out evaluation: a fresh density model (including its bandwidth
// search) per held-out subject, baselines computed inside the same folds.
EvalReport loo_evaluate(const std::vector<SubjectRow>& rows,
                        BaselineMode mode = BaselineMode::mean, int sigma_grid_points = 99);

}  // namespace spiderp
