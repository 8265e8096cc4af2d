#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace spiderp {

// Architecture and SGD settings of the fear-response scorer.
struct MlpConfig {
    int n_units = 16;
    int depth = 6;  // hidden layers; a 1-unit sigmoid head is added on top
    int epochs = 100;
    int batch_size = 512;
    double learning_rate = 0.01;
    double momentum = 0.9;
    double weight_decay = 0.001;
    uint64_t seed = 0;
};

// Row-major sample matrix with binary labels.
struct Dataset {
    size_t n = 0;
    size_t dim = 0;
    std::vector<double> x;  // n * dim
    std::vector<double> y;  // n, values in {0,1}

    std::span<const double> row(size_t i) const { return {x.data() + i * dim, dim}; }
};

// Fully connected ReLU stack with a single sigmoid output unit.
class Mlp {
public:
    Mlp() = default;
    // layer_sizes = {in, h1, ..., hk, 1}; He-uniform weights from `seed`,
    // zero biases.
    Mlp(const std::vector<int>& layer_sizes, uint64_t seed);

    double forward_logit(std::span<const double> input) const;
    // sigmoid of the logit, clamped into the open interval (0,1)
    double forward(std::span<const double> input) const;

    // mean binary cross-entropy plus 0.5*weight_decay*sum(w^2), biases
    // excluded from the penalty
    double loss(const Dataset& data, double weight_decay) const;
    // gradient of loss() with respect to params(), same flattening order
    std::vector<double> gradient(const Dataset& data, double weight_decay) const;
    // gradient over a subset of rows (used by minibatch training)
    std::vector<double> gradient_rows(const Dataset& data, std::span<const uint32_t> rows,
                                      double weight_decay) const;

    // flattened parameters, layer by layer: weights row-major, then biases
    std::vector<double> params() const;
    void set_params(std::span<const double> p);
    size_t param_count() const;

    const std::vector<int>& layer_sizes() const { return sizes_; }

    struct Layer {
        int in = 0, out = 0;
        std::vector<double> w;  // out x in, row-major
        std::vector<double> b;  // out
    };
    const std::vector<Layer>& layers() const { return layers_; }
    std::vector<Layer>& layers() { return layers_; }

private:
    std::vector<int> sizes_;
    std::vector<Layer> layers_;
};

struct TrainDiagnostics {
    std::vector<double> epoch_loss;  // running mean batch loss per epoch
};

// SGD with classic momentum for exactly config.epochs passes; minibatches
// from a seeded shuffle each epoch, short final batch kept. The result is a
// deterministic function of (data, config) for any thread count.
Mlp train_mlp(const Dataset& train, const MlpConfig& config,
              TrainDiagnostics* diagnostics = nullptr);

double stable_sigmoid(double logit);

// fraction of rows whose score >= 0.5 matches the label
double accuracy(const Mlp& mlp, const Dataset& data);

}  // namespace spiderp
