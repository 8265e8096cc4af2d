// Timing harness for the OpenMP kernels against their serial references.
// Each pair must agree bit-for-bit; the table reports the speedup.

#ifdef _OPENMP
#include <omp.h>
#endif

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "spiderp/ensemble.hpp"
#include "spiderp/features.hpp"
#include "spiderp/mkde.hpp"
#include "spiderp/rng.hpp"

using namespace spiderp;

namespace {

// best of two runs, after a warmup pass
double time_ms(const std::function<void()>& fn) {
    fn();
    double best = 1e300;
    for (int rep = 0; rep < 2; ++rep) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        best = std::min(best, std::chrono::duration<double, std::milli>(
                                  std::chrono::steady_clock::now() - t0)
                                  .count());
    }
    return best;
}

void row(const std::string& name, double serial_ms, double parallel_ms, double max_diff) {
    std::printf("%-28s %10.1f %10.1f %8.2fx %12.3g\n", name.c_str(), serial_ms, parallel_ms,
                serial_ms / parallel_ms, max_diff);
}

ChannelSet long_channels(uint64_t seed, double duration_s) {
    Rng rng(seed);
    ChannelSet ch;
    ch.grid_hz = 4.0;
    const size_t n = static_cast<size_t>(duration_s * 4.0);
    for (size_t i = 0; i < n; ++i) {
        ch.hr.push_back(rng.normal());
        ch.gsr_phasic.push_back(rng.normal());
        ch.gsr_tonic.push_back(rng.normal());
    }
    return ch;
}

std::vector<FeatureWindow> labeled_windows(int n_subjects, int per_subject, uint64_t seed) {
    Rng rng(seed);
    std::vector<FeatureWindow> out;
    out.reserve(static_cast<size_t>(n_subjects) * per_subject);
    for (int s = 0; s < n_subjects; ++s) {
        for (int w = 0; w < per_subject; ++w) {
            FeatureWindow fw;
            fw.subject_id = "s" + std::to_string(s);
            fw.start_s = w;
            const int label = w % 2;
            for (auto& f : fw.features) f = rng.normal();
            fw.features[0] += label ? 1.5 : -1.5;
            fw.fr_label = label;
            out.push_back(fw);
        }
    }
    return out;
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("OpenMP enabled, max threads: %d\n", omp_get_max_threads());
#else
    std::printf("built without OpenMP; both columns run serially\n");
#endif
    std::printf("%-28s %10s %10s %9s %12s\n", "kernel", "serial ms", "openmp ms", "speedup",
                "max |diff|");

    {
        const auto ch = long_channels(1, 3600.0);
        std::vector<FeatureWindow> ser, par;
        const double ts = time_ms([&] { ser = featurize_serial(ch, "s"); });
        const double tp = time_ms([&] { par = featurize(ch, "s"); });
        double diff = 0.0;
        for (size_t i = 0; i < ser.size(); ++i)
            for (int f = 0; f < kFeatureDim; ++f)
                diff = std::max(diff, std::abs(ser[i].features[f] - par[i].features[f]));
        row("featurize (1 h record)", ts, tp, diff);
    }

    {
        const auto windows = labeled_windows(10, 400, 2);
        MlpConfig cfg;
        cfg.epochs = 12;
        cfg.seed = 3;
        FrEnsemble ser, par;
        const double ts = time_ms([&] { ser = train_ensemble_serial(windows, 4, cfg); });
        const double tp = time_ms([&] { par = train_ensemble(windows, 4, cfg); });
        double diff = 0.0;
        for (int i = 0; i < ser.k(); ++i) {
            const auto a = ser.members[i].params(), b = par.members[i].params();
            for (size_t j = 0; j < a.size(); ++j) diff = std::max(diff, std::abs(a[j] - b[j]));
        }
        row("train_ensemble (4 members)", ts, tp, diff);

        std::vector<double> ss, sp;
        const double ts2 = time_ms([&] { ss = score_all_serial(ser, windows); });
        const double tp2 = time_ms([&] { sp = score_all(ser, windows); });
        double diff2 = 0.0;
        for (size_t i = 0; i < ss.size(); ++i) diff2 = std::max(diff2, std::abs(ss[i] - sp[i]));
        row("score_all (4k windows)", ts2, tp2, diff2);
    }

    {
        Rng rng(5);
        std::vector<std::vector<double>> x;
        std::vector<double> y;
        for (int i = 0; i < 150; ++i) {
            x.push_back({rng.normal(), rng.normal(), i % 2 ? 1.0 : 0.0});
            y.push_back(17.0 + 68.0 * rng.uniform());
        }
        const std::vector<mkde::KernelKind> kinds = {mkde::KernelKind::continuous_rbf,
                                                     mkde::KernelKind::continuous_rbf,
                                                     mkde::KernelKind::binary_bernoulli};
        mkde::MkdeModel ser, par;
        const double ts = time_ms([&] { ser = mkde::fit_serial(x, y, kinds); });
        const double tp = time_ms([&] { par = mkde::fit(x, y, kinds); });
        row("mkde fit (M=150, 99 sigmas)", ts, tp, std::abs(ser.sigma - par.sigma));
    }

    return 0;
}
