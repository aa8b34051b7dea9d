#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dqlids/matrix.hpp"

namespace dqlids {

enum class Activation : std::uint8_t { ReLU = 0 };

struct LayerSpec {
    std::size_t inputs = 0;
    std::size_t outputs = 0;
    Activation activation = Activation::ReLU;

    bool operator==(const LayerSpec&) const = default;
};

// 41 -> 100 -> 100 -> 5, ReLU on every layer including the output so
// Q-values stay nonnegative. `inputs` varies with the encoding mode.
std::vector<LayerSpec> default_layer_spec(std::size_t inputs);

inline constexpr std::size_t kHiddenWidth = 100;
inline constexpr std::size_t kNumActions = 5;

// Fully connected Q-value approximator. Weights are stored inputs x outputs
// so a batch forward pass is one matmul per layer.
struct QNetwork {
    std::vector<LayerSpec> layers;
    std::vector<Matrix> weights;
    std::vector<std::vector<double>> biases;

    std::size_t input_width() const { return layers.front().inputs; }
    std::size_t output_width() const { return layers.back().outputs; }

    bool operator==(const QNetwork&) const = default;
};

// Weights ~ N(0, 1/fan_in), biases zero. Same seed, same network, bit for bit.
// Throws if adjacent layer widths disagree.
QNetwork init_network(const std::vector<LayerSpec>& spec, std::uint64_t seed);

// Q-values for a batch, one row per record, one column per action.
Matrix forward(const QNetwork& net, const Matrix& batch);

struct GradientSet {
    std::vector<Matrix> weight_grads;
    std::vector<std::vector<double>> bias_grads;
};

// Regression target for one record: the Q-output of `action` is pulled
// toward `target`; the other outputs receive no error.
struct ActionTarget {
    int action = 0;
    double target = 0.0;
};

struct BackwardResult {
    double loss = 0.0;
    GradientSet grads;
};

// MSE over the per-record chosen-action outputs, loss = (1/n) sum (Q - target)^2.
// ReLU subgradient at 0 is 0.
BackwardResult backward(const QNetwork& net, const Matrix& batch,
                        const std::vector<ActionTarget>& targets);

enum class OptimizerKind : std::uint8_t { Adam = 0, Sgd = 1 };

struct OptimizerState {
    OptimizerKind kind = OptimizerKind::Adam;
    std::int64_t step = 0;
    // first/second moment estimates, shaped like the parameters (Adam only)
    std::vector<Matrix> weight_m, weight_v;
    std::vector<std::vector<double>> bias_m, bias_v;

    static OptimizerState create(const QNetwork& net, OptimizerKind kind);

    bool operator==(const OptimizerState&) const = default;
};

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEpsilon = 1e-8;

// In-place parameter update. Throws DivergenceError on non-finite gradients.
void apply_update(QNetwork& net, const GradientSet& grads, OptimizerState& opt,
                  double learning_rate);

// Everything needed to resume or evaluate a run. save -> load -> save is
// byte-identical.
struct Checkpoint {
    QNetwork net;
    OptimizerState opt;
    std::string rng_state; // serialized mt19937_64 stream state

    bool operator==(const Checkpoint&) const = default;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

} // namespace dqlids
