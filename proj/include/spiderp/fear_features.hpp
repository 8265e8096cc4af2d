#pragma once

#include <string>
#include <vector>

#include "spiderp/ensemble.hpp"
#include "spiderp/types.hpp"

namespace spiderp {

// Per-record fear-response curve: one ensemble score per sliding window.
struct FearCurve {
    std::string subject_id;
    std::vector<double> times_s;  // window start times, 1 s apart
    std::vector<double> scores;   // in [0,1]
    double duration_s = 0.0;
};

// The three static predictors, in the order consumed by the density model.
struct StaticFeatures {
    double slope = 0.0;
    double initial_fr = 0.0;
    int sex = 0;
};

// Scores every window of one record in window order. Requires at least 31
// windows so both static features are defined.
FearCurve build_curve(const FrEnsemble& ensemble, const std::vector<FeatureWindow>& windows);

// OLS slope of scores against time rescaled to [0,1] over the record.
double curve_slope(const FearCurve& curve);

// Mean score over window start times in [0, 30) s.
double initial_response(const FearCurve& curve);

StaticFeatures assemble(const FearCurve& curve, int sex);

}  // namespace spiderp
