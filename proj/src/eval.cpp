#include "spiderp/eval.hpp"

#include <cmath>
#include <map>

#include "spiderp/errors.hpp"

namespace spiderp {

std::pair<double, double> metrics(std::span<const int> true_pclm, std::span<const int> pred_pclm) {
    if (true_pclm.size() != pred_pclm.size() || true_pclm.empty())
        throw LengthMismatch("metrics: need equal, nonzero prediction and truth counts");
    double abs_sum = 0.0, rel_sum = 0.0;
    for (size_t i = 0; i < true_pclm.size(); ++i) {
        const double err = std::abs(static_cast<double>(pred_pclm[i]) - true_pclm[i]);
        abs_sum += err;
        rel_sum += err / static_cast<double>(true_pclm[i]);
    }
    const double n = static_cast<double>(true_pclm.size());
    return {abs_sum / n, 100.0 * rel_sum / n};
}

namespace {

int round_half_even(double v) { return static_cast<int>(std::nearbyint(v)); }

int most_frequent(std::span<const int> labels) {
    std::map<int, int> counts;
    for (int v : labels) ++counts[v];
    int best = labels.front(), best_count = 0;
    for (const auto& [value, count] : counts) {  // ascending keys: ties keep the smallest
        if (count > best_count) {
            best = value;
            best_count = count;
        }
    }
    return best;
}

}  // namespace

int constant_baseline(std::span<const int> train_labels, BaselineMode mode) {
    if (train_labels.empty()) throw TooFewSamples("constant_baseline: empty training labels");
    if (mode == BaselineMode::mode) return most_frequent(train_labels);
    double mean = 0.0;
    for (int v : train_labels) mean += v;
    return round_half_even(mean / static_cast<double>(train_labels.size()));
}

int sex_baseline(std::span<const int> train_labels, std::span<const int> train_sex, int query_sex,
                 BaselineMode mode) {
    if (train_labels.size() != train_sex.size())
        throw LengthMismatch("sex_baseline: labels and sexes differ in count");
    std::vector<int> same_sex;
    for (size_t i = 0; i < train_labels.size(); ++i)
        if (train_sex[i] == query_sex) same_sex.push_back(train_labels[i]);
    if (same_sex.empty()) return constant_baseline(train_labels, mode);
    return constant_baseline(same_sex, mode);
}

namespace {

MetricSet aggregate(const std::vector<int>& truth, const std::vector<int>& pred) {
    MetricSet m;
    std::tie(m.mae, m.mape_percent) = metrics(truth, pred);
    for (size_t i = 0; i < truth.size(); ++i) {
        const bool t = mkde::to_binary(truth[i]) == mkde::PtsdLabel::ptsd;
        const bool p = mkde::to_binary(pred[i]) == mkde::PtsdLabel::ptsd;
        if (t && p)
            ++m.confusion.tp;
        else if (!t && p)
            ++m.confusion.fp;
        else if (t && !p)
            ++m.confusion.fn;
        else
            ++m.confusion.tn;
    }
    m.binary_accuracy = m.confusion.accuracy();
    return m;
}

}  // namespace

namespace {

SubjectResult evaluate_fold(const std::vector<SubjectRow>& rows, size_t held_out,
                            BaselineMode mode, int sigma_grid_points) {
    static const std::vector<mkde::KernelKind> kinds = {mkde::KernelKind::continuous_rbf,
                                                        mkde::KernelKind::continuous_rbf,
                                                        mkde::KernelKind::binary_bernoulli};
    std::vector<std::vector<double>> x_train;
    std::vector<double> y_train;
    std::vector<int> labels, sexes;
    x_train.reserve(rows.size() - 1);
    for (size_t j = 0; j < rows.size(); ++j) {
        if (j == held_out) continue;
        x_train.push_back({rows[j].slope, rows[j].initial_fr, static_cast<double>(rows[j].sex)});
        y_train.push_back(static_cast<double>(rows[j].pclm));
        labels.push_back(rows[j].pclm);
        sexes.push_back(rows[j].sex);
    }
    const auto model = mkde::fit(x_train, y_train, kinds, sigma_grid_points);
    const auto& s = rows[held_out];
    const std::vector<double> query = {s.slope, s.initial_fr, static_cast<double>(s.sex)};

    SubjectResult r;
    r.id = s.id;
    r.true_pclm = s.pclm;
    r.density = mkde::predict_density(model, query);
    r.pred_pclm = mkde::to_pclm(r.density);
    r.true_ptsd = mkde::to_binary(r.true_pclm) == mkde::PtsdLabel::ptsd;
    r.pred_ptsd = mkde::to_binary(r.pred_pclm) == mkde::PtsdLabel::ptsd;
    r.sigma = model.sigma;
    r.constant_pred = constant_baseline(labels, mode);
    r.sex_pred = sex_baseline(labels, sexes, s.sex, mode);
    return r;
}

}  // namespace

EvalReport loo_evaluate(const std::vector<SubjectRow>& rows, BaselineMode mode,
                        int sigma_grid_points) {
    const size_t n = rows.size();
    if (n < 3) throw TooFewSubjects("loo_evaluate: need at least 3 subjects");

    EvalReport report;
    report.baseline_mode = mode;
    report.subjects.resize(n);

    std::exception_ptr error;
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
        try {
            report.subjects[i] = evaluate_fold(rows, static_cast<size_t>(i), mode,
                                               sigma_grid_points);
        } catch (...) {
#pragma omp critical
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);

    std::vector<int> truth, pred, const_pred, sex_pred;
    for (const auto& r : report.subjects) {
        truth.push_back(r.true_pclm);
        pred.push_back(r.pred_pclm);
        const_pred.push_back(r.constant_pred);
        sex_pred.push_back(r.sex_pred);
    }
    report.spiderp = aggregate(truth, pred);
    report.baseline_constant = aggregate(truth, const_pred);
    report.baseline_sex = aggregate(truth, sex_pred);
    return report;
}

}  // namespace spiderp
