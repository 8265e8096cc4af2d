#include "spiderp/fear_features.hpp"

#include <algorithm>
#include <cmath>

#include "spiderp/errors.hpp"

namespace spiderp {

FearCurve build_curve(const FrEnsemble& ensemble, const std::vector<FeatureWindow>& windows) {
    if (windows.size() < 31)
        throw RecordTooShort("build_curve: need at least 31 windows, got " +
                             std::to_string(windows.size()));
    auto sorted = windows;
    std::sort(sorted.begin(), sorted.end(),
              [](const FeatureWindow& a, const FeatureWindow& b) { return a.start_s < b.start_s; });
    FearCurve curve;
    curve.subject_id = sorted.front().subject_id;
    curve.times_s.reserve(sorted.size());
    for (const auto& w : sorted) curve.times_s.push_back(w.start_s);
    curve.scores = score_all(ensemble, sorted);
    curve.duration_s = sorted.back().start_s + 20.0;
    return curve;
}

double curve_slope(const FearCurve& curve) {
    const size_t n = curve.scores.size();
    if (n < 2) throw RecordTooShort("curve_slope: need at least 2 points");
    const double t_last = curve.times_s.back();
    if (t_last <= 0.0) throw RecordTooShort("curve_slope: degenerate time axis");

    double mean_t = 0.0, mean_s = 0.0;
    for (size_t i = 0; i < n; ++i) {
        mean_t += curve.times_s[i] / t_last;
        mean_s += curve.scores[i];
    }
    mean_t /= static_cast<double>(n);
    mean_s /= static_cast<double>(n);

    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double dt = curve.times_s[i] / t_last - mean_t;
        num += dt * (curve.scores[i] - mean_s);
        den += dt * dt;
    }
    return num / den;
}

double initial_response(const FearCurve& curve) {
    double sum = 0.0;
    size_t count = 0;
    for (size_t i = 0; i < curve.times_s.size(); ++i) {
        if (curve.times_s[i] < 30.0) {
            sum += curve.scores[i];
            ++count;
        }
    }
    if (count == 0) throw RecordTooShort("initial_response: no windows in the first 30 s");
    return sum / static_cast<double>(count);
}

StaticFeatures assemble(const FearCurve& curve, int sex) {
    return {curve_slope(curve), initial_response(curve), sex};
}

}  // namespace spiderp
