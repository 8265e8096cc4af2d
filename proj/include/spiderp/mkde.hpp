#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

namespace spiderp::mkde {

inline constexpr int kPclmMin = 17;
inline constexpr int kPclmMax = 85;
inline constexpr int kGridSize = kPclmMax - kPclmMin + 1;  // 69

enum class KernelKind { continuous_rbf, binary_bernoulli };

// Gaussian density kernel, bandwidth nu.
double rbf(double u, double v, double nu);

// Two-point kernel: p on agreement, 1-p on disagreement.
double bernoulli_k(int a, int b, double p);

// Bernoulli parameter carried by the shared-bandwidth standard kernel.
double bernoulli_p(double sigma);

// Product-kernel density estimator over (features, label). Training rows
// are stored standardized; continuous feature and label statistics are kept
// for transforming queries and the PCL-M grid.
struct MkdeModel {
    std::vector<KernelKind> kinds;     // continuous dims first
    size_t m = 0;                      // training rows
    std::vector<double> x;             // m x d, standardized, row-major
    std::vector<double> y;             // m standardized labels
    std::vector<double> feature_mean;  // per dim (0 for binary dims)
    std::vector<double> feature_std;   // per dim (1 for binary dims)
    double y_mean = 0.0;
    double y_std = 1.0;
    double sigma = 0.0;

    size_t d() const { return kinds.size(); }
};

// Discrete distribution over the integer PCL-M grid 17..85.
struct PclmDensity {
    std::array<double, kGridSize> probs{};
    static int value_at(int i) { return kPclmMin + i; }
};

// Standardizes the data and selects sigma on a grid over (0, 0.5) by
// maximizing the leave-one-out log-likelihood of the training labels; exact
// ties go to the larger sigma. Grid point i of n is 0.5*i/(n+1).
MkdeModel fit(const std::vector<std::vector<double>>& x_raw, const std::vector<double>& y_raw,
              const std::vector<KernelKind>& kinds, int sigma_grid_points = 99);
// Serial reference for the parallel bandwidth search; identical numerics.
MkdeModel fit_serial(const std::vector<std::vector<double>>& x_raw,
                     const std::vector<double>& y_raw, const std::vector<KernelKind>& kinds,
                     int sigma_grid_points = 99);

// Unnormalized conditional density over the grid; missing features' kernel
// factors are omitted, which equals exact marginalization because every
// factor is normalized.
std::array<double, kGridSize> raw_conditional(const MkdeModel& model,
                                              std::span<const std::optional<double>> x);

PclmDensity predict_density(const MkdeModel& model, std::span<const double> x);
PclmDensity predict_marginal(const MkdeModel& model, std::span<const std::optional<double>> x);

// Grid argmax; ties resolve to the smallest PCL-M.
int to_pclm(const PclmDensity& density);

enum class PtsdLabel { no_ptsd = 0, ptsd = 1 };

// Threshold-36 reduction: PTSD iff pclm >= 36.
PtsdLabel to_binary(int pclm);

// The leave-one-out log-likelihood the bandwidth search maximizes
// (exposed for the brute-force comparison tests).
double loo_log_likelihood(const MkdeModel& model, double sigma);

}  // namespace spiderp::mkde
