#include "spiderp/mlp.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "spiderp/errors.hpp"
#include "spiderp/rng.hpp"

namespace spiderp {

namespace {

constexpr size_t kGradChunk = 128;  // fixed chunking keeps reductions thread-count invariant

double bce_from_logit(double z, double y) {
    // max(z,0) - z*y + log(1+exp(-|z|)), stable for large |z|
    return std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
}

struct Workspace {
    // activations per layer (input first), preactivations per layer
    std::vector<std::vector<double>> act;
    std::vector<std::vector<double>> delta;
};

// Forward pass storing activations; returns output logit.
double forward_stored(const std::vector<Mlp::Layer>& layers, std::span<const double> input,
                      Workspace& ws) {
    ws.act.resize(layers.size() + 1);
    ws.act[0].assign(input.begin(), input.end());
    for (size_t l = 0; l < layers.size(); ++l) {
        const auto& L = layers[l];
        auto& out = ws.act[l + 1];
        out.assign(static_cast<size_t>(L.out), 0.0);
        const auto& in = ws.act[l];
        for (int j = 0; j < L.out; ++j) {
            double z = L.b[j];
            const double* wrow = L.w.data() + static_cast<size_t>(j) * L.in;
            for (int i = 0; i < L.in; ++i) z += wrow[i] * in[i];
            out[j] = (l + 1 < layers.size()) ? std::max(z, 0.0) : z;  // ReLU except head
        }
    }
    return ws.act.back()[0];
}

// Backprop of d(loss)/d(logit) into flat gradient (same layout as params()).
void backward_accumulate(const std::vector<Mlp::Layer>& layers, Workspace& ws, double dlogit,
                         double* grad) {
    const size_t n_layers = layers.size();
    ws.delta.resize(n_layers);
    ws.delta[n_layers - 1].assign(1, dlogit);
    for (size_t l = n_layers - 1; l-- > 0;) {
        const auto& next = layers[l + 1];
        const auto& dnext = ws.delta[l + 1];
        auto& d = ws.delta[l];
        d.assign(static_cast<size_t>(next.in), 0.0);
        for (int j = 0; j < next.out; ++j) {
            const double dj = dnext[j];
            const double* wrow = next.w.data() + static_cast<size_t>(j) * next.in;
            for (int i = 0; i < next.in; ++i) d[i] += dj * wrow[i];
        }
        // ReLU derivative through this layer's activation
        for (int i = 0; i < next.in; ++i)
            if (ws.act[l + 1][i] <= 0.0) d[i] = 0.0;
    }
    size_t off = 0;
    for (size_t l = 0; l < n_layers; ++l) {
        const auto& L = layers[l];
        const auto& in = ws.act[l];
        const auto& d = ws.delta[l];
        for (int j = 0; j < L.out; ++j) {
            const double dj = d[j];
            double* grow = grad + off + static_cast<size_t>(j) * L.in;
            for (int i = 0; i < L.in; ++i) grow[i] += dj * in[i];
        }
        off += L.w.size();
        for (int j = 0; j < L.out; ++j) grad[off + j] += d[j];
        off += L.b.size();
    }
}

}  // namespace

double stable_sigmoid(double logit) {
    double p;
    if (logit >= 0.0) {
        p = 1.0 / (1.0 + std::exp(-logit));
    } else {
        const double e = std::exp(logit);
        p = e / (1.0 + e);
    }
    // keep the output strictly inside (0,1)
    constexpr double hi = 1.0 - std::numeric_limits<double>::epsilon() / 2;
    if (p >= 1.0) p = hi;
    if (p <= 0.0) p = std::numeric_limits<double>::denorm_min();
    return p;
}

Mlp::Mlp(const std::vector<int>& layer_sizes, uint64_t seed) : sizes_(layer_sizes) {
    Rng rng(derive_seed(seed, 0, /*purpose=*/0x11));
    layers_.resize(sizes_.size() - 1);
    for (size_t l = 0; l + 1 < sizes_.size(); ++l) {
        auto& L = layers_[l];
        L.in = sizes_[l];
        L.out = sizes_[l + 1];
        L.w.resize(static_cast<size_t>(L.in) * L.out);
        L.b.assign(static_cast<size_t>(L.out), 0.0);
        const double limit = std::sqrt(6.0 / L.in);  // He-uniform
        for (auto& w : L.w) w = rng.uniform(-limit, limit);
    }
}

double Mlp::forward_logit(std::span<const double> input) const {
    std::vector<double> cur(input.begin(), input.end());
    std::vector<double> next;
    for (size_t l = 0; l < layers_.size(); ++l) {
        const auto& L = layers_[l];
        next.assign(static_cast<size_t>(L.out), 0.0);
        for (int j = 0; j < L.out; ++j) {
            double z = L.b[j];
            const double* wrow = L.w.data() + static_cast<size_t>(j) * L.in;
            for (int i = 0; i < L.in; ++i) z += wrow[i] * cur[i];
            next[j] = (l + 1 < layers_.size()) ? std::max(z, 0.0) : z;
        }
        cur.swap(next);
    }
    return cur[0];
}

double Mlp::forward(std::span<const double> input) const {
    return stable_sigmoid(forward_logit(input));
}

size_t Mlp::param_count() const {
    size_t n = 0;
    for (const auto& L : layers_) n += L.w.size() + L.b.size();
    return n;
}

std::vector<double> Mlp::params() const {
    std::vector<double> p;
    p.reserve(param_count());
    for (const auto& L : layers_) {
        p.insert(p.end(), L.w.begin(), L.w.end());
        p.insert(p.end(), L.b.begin(), L.b.end());
    }
    return p;
}

void Mlp::set_params(std::span<const double> p) {
    size_t off = 0;
    for (auto& L : layers_) {
        std::copy(p.begin() + off, p.begin() + off + L.w.size(), L.w.begin());
        off += L.w.size();
        std::copy(p.begin() + off, p.begin() + off + L.b.size(), L.b.begin());
        off += L.b.size();
    }
}

double Mlp::loss(const Dataset& data, double weight_decay) const {
    double total = 0.0;
    Workspace ws;
    for (size_t r = 0; r < data.n; ++r)
        total += bce_from_logit(forward_stored(layers_, data.row(r), ws), data.y[r]);
    total /= static_cast<double>(data.n);
    double penalty = 0.0;
    for (const auto& L : layers_)
        for (double w : L.w) penalty += w * w;
    return total + 0.5 * weight_decay * penalty;
}

std::vector<double> Mlp::gradient_rows(const Dataset& data, std::span<const uint32_t> rows,
                                       double weight_decay) const {
    const size_t np = param_count();
    const size_t n_chunks = (rows.size() + kGradChunk - 1) / kGradChunk;
    std::vector<std::vector<double>> partial(n_chunks);

#pragma omp parallel for schedule(static)
    for (long long c = 0; c < static_cast<long long>(n_chunks); ++c) {
        auto& g = partial[c];
        g.assign(np, 0.0);
        Workspace ws;
        const size_t lo = static_cast<size_t>(c) * kGradChunk;
        const size_t hi = std::min(lo + kGradChunk, rows.size());
        for (size_t k = lo; k < hi; ++k) {
            const size_t r = rows[k];
            const double z = forward_stored(layers_, data.row(r), ws);
            const double dlogit = stable_sigmoid(z) - data.y[r];
            backward_accumulate(layers_, ws, dlogit, g.data());
        }
    }

    // fixed-order reduction over chunks, then scale and add the decay term
    std::vector<double> grad(np, 0.0);
    for (size_t c = 0; c < n_chunks; ++c)
        for (size_t i = 0; i < np; ++i) grad[i] += partial[c][i];
    const double scale = 1.0 / static_cast<double>(rows.size());
    for (auto& g : grad) g *= scale;

    size_t off = 0;
    for (const auto& L : layers_) {
        for (size_t i = 0; i < L.w.size(); ++i) grad[off + i] += weight_decay * L.w[i];
        off += L.w.size() + L.b.size();
    }
    return grad;
}

std::vector<double> Mlp::gradient(const Dataset& data, double weight_decay) const {
    std::vector<uint32_t> rows(data.n);
    std::iota(rows.begin(), rows.end(), 0u);
    return gradient_rows(data, rows, weight_decay);
}

Mlp train_mlp(const Dataset& train, const MlpConfig& config, TrainDiagnostics* diagnostics) {
    bool has_pos = false, has_neg = false;
    for (double y : train.y) (y > 0.5 ? has_pos : has_neg) = true;
    if (!has_pos || !has_neg)
        throw DegenerateLabels("train_mlp: training set contains a single class");

    std::vector<int> sizes;
    sizes.push_back(static_cast<int>(train.dim));
    for (int l = 0; l < config.depth; ++l) sizes.push_back(config.n_units);
    sizes.push_back(1);

    Mlp mlp(sizes, config.seed);
    std::vector<double> params = mlp.params();
    std::vector<double> velocity(params.size(), 0.0);

    Rng rng(derive_seed(config.seed, 0, /*purpose=*/0x22));
    std::vector<uint32_t> perm(train.n);
    std::iota(perm.begin(), perm.end(), 0u);

    const size_t batch = static_cast<size_t>(config.batch_size);
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        // Fisher-Yates with the epoch-level stream
        for (size_t i = perm.size() - 1; i > 0; --i)
            std::swap(perm[i], perm[rng.below(i + 1)]);

        double running = 0.0;
        size_t n_batches = 0;
        for (size_t lo = 0; lo < train.n; lo += batch) {
            const size_t hi = std::min(lo + batch, train.n);
            const auto grad = mlp.gradient_rows(
                train, std::span<const uint32_t>(perm.data() + lo, hi - lo),
                config.weight_decay);
            for (size_t i = 0; i < params.size(); ++i) {
                velocity[i] = config.momentum * velocity[i] - config.learning_rate * grad[i];
                params[i] += velocity[i];
            }
            mlp.set_params(params);
            if (diagnostics) {
                double batch_loss = 0.0;
                for (size_t k = lo; k < hi; ++k)
                    batch_loss += bce_from_logit(mlp.forward_logit(train.row(perm[k])),
                                                 train.y[perm[k]]);
                running += batch_loss / static_cast<double>(hi - lo);
                ++n_batches;
            }
        }
        if (diagnostics) diagnostics->epoch_loss.push_back(running / std::max<size_t>(1, n_batches));

        for (double p : params)
            if (!std::isfinite(p)) throw NonFiniteLoss("train_mlp: parameters diverged");
    }
    return mlp;
}

double accuracy(const Mlp& mlp, const Dataset& data) {
    if (data.n == 0) return 0.0;
    size_t correct = 0;
    for (size_t r = 0; r < data.n; ++r) {
        const int pred = mlp.forward(data.row(r)) >= 0.5 ? 1 : 0;
        if (pred == static_cast<int>(data.y[r] > 0.5 ? 1 : 0)) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(data.n);
}

}  // namespace spiderp
