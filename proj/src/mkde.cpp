#include "spiderp/mkde.hpp"

#include <cmath>

#include "spiderp/errors.hpp"

namespace spiderp::mkde {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kLogFloor = 1e-300;

int as_binary(double v, const char* where) {
    if (v == 0.0) return 0;
    if (v == 1.0) return 1;
    throw NonBinaryInput(std::string(where) + ": binary feature must be 0 or 1");
}

// Product of the feature kernels between a standardized query and training
// row `row`; entries with no value are skipped (marginalized out).
double feature_kernel_product(const MkdeModel& model, std::span<const std::optional<double>> x,
                              size_t row, double sigma, double p) {
    double prod = 1.0;
    const double* xr = model.x.data() + row * model.d();
    for (size_t j = 0; j < model.d(); ++j) {
        if (!x[j]) continue;
        if (model.kinds[j] == KernelKind::continuous_rbf)
            prod *= rbf(*x[j], xr[j], sigma);
        else
            prod *= bernoulli_k(as_binary(*x[j], "predict"), as_binary(xr[j], "model"), p);
    }
    return prod;
}

void validate_kinds(const std::vector<KernelKind>& kinds) {
    if (kinds.empty()) throw BadKernelSpec("fit: no features");
    bool seen_binary = false;
    for (auto k : kinds) {
        if (k == KernelKind::binary_bernoulli)
            seen_binary = true;
        else if (seen_binary)
            throw BadKernelSpec("fit: continuous features must precede binary features");
    }
}

double sigma_at(int i, int n_grid) { return 0.5 * static_cast<double>(i) / (n_grid + 1.0); }

template <bool Parallel>
MkdeModel fit_impl(const std::vector<std::vector<double>>& x_raw, const std::vector<double>& y_raw,
                   const std::vector<KernelKind>& kinds, int n_grid) {
    validate_kinds(kinds);
    if (x_raw.size() != y_raw.size())
        throw TooFewSamples("fit: feature rows and labels differ in count");
    const size_t m = x_raw.size();
    if (m < 2) throw TooFewSamples("fit: need at least 2 samples for the leave-one-out search");
    const size_t d = kinds.size();
    for (const auto& row : x_raw)
        if (row.size() != d) throw LengthMismatch("fit: row width does not match kernel kinds");

    MkdeModel model;
    model.kinds = kinds;
    model.m = m;
    model.feature_mean.assign(d, 0.0);
    model.feature_std.assign(d, 1.0);
    model.x.resize(m * d);

    for (size_t j = 0; j < d; ++j) {
        if (kinds[j] == KernelKind::binary_bernoulli) {
            for (size_t i = 0; i < m; ++i) {
                as_binary(x_raw[i][j], "fit");
                model.x[i * d + j] = x_raw[i][j];
            }
            continue;
        }
        double mean = 0.0;
        for (size_t i = 0; i < m; ++i) mean += x_raw[i][j];
        mean /= static_cast<double>(m);
        double var = 0.0;
        for (size_t i = 0; i < m; ++i) var += (x_raw[i][j] - mean) * (x_raw[i][j] - mean);
        var /= static_cast<double>(m);
        if (var <= 0.0)
            throw ZeroVarianceFeature("fit: continuous feature " + std::to_string(j) +
                                      " has zero variance");
        const double sd = std::sqrt(var);
        model.feature_mean[j] = mean;
        model.feature_std[j] = sd;
        for (size_t i = 0; i < m; ++i) model.x[i * d + j] = (x_raw[i][j] - mean) / sd;
    }

    double y_mean = 0.0;
    for (double v : y_raw) y_mean += v;
    y_mean /= static_cast<double>(m);
    double y_var = 0.0;
    for (double v : y_raw) y_var += (v - y_mean) * (v - y_mean);
    y_var /= static_cast<double>(m);
    // a constant label column is legal (degenerate cohort); leave it unscaled
    const double y_sd = y_var > 0.0 ? std::sqrt(y_var) : 1.0;
    model.y_mean = y_mean;
    model.y_std = y_sd;
    model.y.resize(m);
    for (size_t i = 0; i < m; ++i) model.y[i] = (y_raw[i] - y_mean) / y_sd;

    std::vector<double> ll(n_grid);
#pragma omp parallel for schedule(static) if (Parallel)
    for (int i = 1; i <= n_grid; ++i) ll[i - 1] = loo_log_likelihood(model, sigma_at(i, n_grid));

    int best = 1;
    for (int i = 2; i <= n_grid; ++i)
        if (ll[i - 1] >= ll[best - 1]) best = i;  // ties to the larger sigma
    model.sigma = sigma_at(best, n_grid);
    return model;
}

}  // namespace

double rbf(double u, double v, double nu) {
    const double z = (u - v) / nu;
    return std::exp(-0.5 * z * z) / (nu * std::sqrt(kTwoPi));
}

double bernoulli_k(int a, int b, double p) {
    if ((a != 0 && a != 1) || (b != 0 && b != 1))
        throw NonBinaryInput("bernoulli_k: arguments must be 0 or 1");
    return a == b ? p : 1.0 - p;
}

double bernoulli_p(double sigma) { return 0.5 + std::sqrt(0.25 - sigma * sigma); }

double loo_log_likelihood(const MkdeModel& model, double sigma) {
    const size_t m = model.m;
    const double p = bernoulli_p(sigma);
    std::vector<std::optional<double>> xq(model.d());
    double total = 0.0;
    for (size_t held = 0; held < m; ++held) {
        const double* xr = model.x.data() + held * model.d();
        for (size_t j = 0; j < model.d(); ++j) xq[j] = xr[j];
        double density = 0.0;
        for (size_t other = 0; other < m; ++other) {
            if (other == held) continue;
            density += rbf(model.y[held], model.y[other], sigma) *
                       feature_kernel_product(model, xq, other, sigma, p);
        }
        density /= static_cast<double>(m - 1);
        total += std::log(std::max(density, kLogFloor));
    }
    return total;
}

MkdeModel fit(const std::vector<std::vector<double>>& x_raw, const std::vector<double>& y_raw,
              const std::vector<KernelKind>& kinds, int sigma_grid_points) {
    return fit_impl<true>(x_raw, y_raw, kinds, sigma_grid_points);
}

MkdeModel fit_serial(const std::vector<std::vector<double>>& x_raw,
                     const std::vector<double>& y_raw, const std::vector<KernelKind>& kinds,
                     int sigma_grid_points) {
    return fit_impl<false>(x_raw, y_raw, kinds, sigma_grid_points);
}

std::array<double, kGridSize> raw_conditional(const MkdeModel& model,
                                              std::span<const std::optional<double>> x) {
    if (x.size() != model.d()) throw LengthMismatch("predict: query width mismatch");
    for (size_t j = 0; j < model.d(); ++j) {
        if (!x[j]) continue;
        if (!std::isfinite(*x[j])) throw NonFiniteInput("predict: non-finite feature");
    }
    // standardize known continuous entries with the training statistics
    std::vector<std::optional<double>> xs(x.begin(), x.end());
    for (size_t j = 0; j < model.d(); ++j) {
        if (!xs[j]) continue;
        if (model.kinds[j] == KernelKind::continuous_rbf)
            xs[j] = (*xs[j] - model.feature_mean[j]) / model.feature_std[j];
        else
            as_binary(*xs[j], "predict");
    }

    const double p = bernoulli_p(model.sigma);
    std::vector<double> feature_weight(model.m);
    for (size_t row = 0; row < model.m; ++row)
        feature_weight[row] = feature_kernel_product(model, xs, row, model.sigma, p);

    std::array<double, kGridSize> density{};
    for (int g = 0; g < kGridSize; ++g) {
        const double yq = (static_cast<double>(PclmDensity::value_at(g)) - model.y_mean) / model.y_std;
        double sum = 0.0;
        for (size_t row = 0; row < model.m; ++row)
            sum += rbf(yq, model.y[row], model.sigma) * feature_weight[row];
        density[g] = sum / static_cast<double>(model.m);
    }
    return density;
}

namespace {

PclmDensity normalize(const std::array<double, kGridSize>& raw) {
    PclmDensity out;
    double sum = 0.0;
    for (double v : raw) sum += v;
    if (sum > 0.0) {
        for (int i = 0; i < kGridSize; ++i) out.probs[i] = raw[i] / sum;
    } else {
        // every grid point underflowed; fall back to the uninformative answer
        for (auto& v : out.probs) v = 1.0 / kGridSize;
    }
    return out;
}

}  // namespace

PclmDensity predict_density(const MkdeModel& model, std::span<const double> x) {
    std::vector<std::optional<double>> xq(x.begin(), x.end());
    return normalize(raw_conditional(model, xq));
}

PclmDensity predict_marginal(const MkdeModel& model, std::span<const std::optional<double>> x) {
    return normalize(raw_conditional(model, x));
}

int to_pclm(const PclmDensity& density) {
    int best = 0;
    for (int i = 1; i < kGridSize; ++i)
        if (density.probs[i] > density.probs[best]) best = i;
    return PclmDensity::value_at(best);
}

PtsdLabel to_binary(int pclm) {
    if (pclm < kPclmMin || pclm > kPclmMax)
        throw OutOfRange("to_binary: pclm " + std::to_string(pclm) + " outside [17,85]");
    return pclm >= 36 ? PtsdLabel::ptsd : PtsdLabel::no_ptsd;
}

}  // namespace spiderp::mkde
