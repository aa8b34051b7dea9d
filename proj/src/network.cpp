#include "dqlids/network.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

#include "dqlids/error.hpp"

namespace dqlids {

std::vector<LayerSpec> default_layer_spec(std::size_t inputs) {
    return {
        {inputs, kHiddenWidth, Activation::ReLU},
        {kHiddenWidth, kHiddenWidth, Activation::ReLU},
        {kHiddenWidth, kNumActions, Activation::ReLU},
    };
}

QNetwork init_network(const std::vector<LayerSpec>& spec, std::uint64_t seed) {
    if (spec.empty())
        throw Error("init_network: empty layer spec");
    for (std::size_t t = 0; t < spec.size(); ++t) {
        if (spec[t].inputs == 0 || spec[t].outputs == 0)
            throw Error("init_network: layer " + std::to_string(t) + " has zero width");
        if (t > 0 && spec[t].inputs != spec[t - 1].outputs)
            throw Error("init_network: layer " + std::to_string(t) + " expects " +
                        std::to_string(spec[t].inputs) + " inputs but previous layer emits " +
                        std::to_string(spec[t - 1].outputs));
    }

    QNetwork net;
    net.layers = spec;
    std::mt19937_64 rng(seed);
    for (const LayerSpec& layer : spec) {
        const double sigma = 1.0 / std::sqrt(static_cast<double>(layer.inputs));
        std::normal_distribution<double> normal(0.0, sigma);
        Matrix w(layer.inputs, layer.outputs);
        for (double& v : w.data)
            v = normal(rng);
        net.weights.push_back(std::move(w));
        net.biases.emplace_back(layer.outputs, 0.0);
    }
    return net;
}

namespace {

// activations per layer, a[0] is the input batch; relu'(z) recovers from
// the activation itself (a > 0 iff z > 0)
std::vector<Matrix> forward_trace(const QNetwork& net, const Matrix& batch) {
    if (batch.cols != net.input_width())
        throw Error("forward: batch width " + std::to_string(batch.cols) +
                    " does not match network input width " + std::to_string(net.input_width()));
    std::vector<Matrix> acts;
    acts.reserve(net.layers.size() + 1);
    acts.push_back(batch);
    for (std::size_t t = 0; t < net.layers.size(); ++t) {
        Matrix z;
        matmul(acts.back(), net.weights[t], z);
        const std::vector<double>& bias = net.biases[t];
        for (std::size_t i = 0; i < z.rows; ++i) {
            double* row = z.row(i);
            for (std::size_t j = 0; j < z.cols; ++j) {
                double v = row[j] + bias[j];
                row[j] = v > 0.0 ? v : 0.0;
            }
        }
        acts.push_back(std::move(z));
    }
    return acts;
}

} // namespace

Matrix forward(const QNetwork& net, const Matrix& batch) {
    return forward_trace(net, batch).back();
}

BackwardResult backward(const QNetwork& net, const Matrix& batch,
                        const std::vector<ActionTarget>& targets) {
    if (targets.size() != batch.rows)
        throw Error("backward: " + std::to_string(targets.size()) + " targets for " +
                    std::to_string(batch.rows) + " records");
    const std::size_t actions = net.output_width();
    for (const ActionTarget& t : targets)
        if (t.action < 0 || static_cast<std::size_t>(t.action) >= actions)
            throw Error("backward: action index " + std::to_string(t.action) +
                        " outside 0-" + std::to_string(actions - 1));

    const std::vector<Matrix> acts = forward_trace(net, batch);
    const Matrix& out = acts.back();
    const std::size_t n = batch.rows;

    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double diff = out.at(i, static_cast<std::size_t>(targets[i].action)) - targets[i].target;
        loss += diff * diff;
    }
    loss /= static_cast<double>(n);

    BackwardResult result;
    result.loss = loss;
    result.grads.weight_grads.resize(net.layers.size());
    result.grads.bias_grads.resize(net.layers.size());

    // error only flows through each record's chosen action output
    Matrix delta(out.rows, out.cols);
    for (std::size_t i = 0; i < n; ++i) {
        const auto a = static_cast<std::size_t>(targets[i].action);
        if (out.at(i, a) > 0.0)
            delta.at(i, a) = 2.0 / static_cast<double>(n) * (out.at(i, a) - targets[i].target);
    }

    for (std::size_t t = net.layers.size(); t-- > 0;) {
        matmul_at_b(acts[t], delta, result.grads.weight_grads[t]);
        std::vector<double>& db = result.grads.bias_grads[t];
        db.assign(net.layers[t].outputs, 0.0);
        for (std::size_t i = 0; i < delta.rows; ++i) {
            const double* row = delta.row(i);
            for (std::size_t j = 0; j < delta.cols; ++j)
                db[j] += row[j];
        }
        if (t > 0) {
            Matrix prev_delta;
            matmul_a_bt(delta, net.weights[t], prev_delta);
            const Matrix& prev_act = acts[t];
            for (std::size_t i = 0; i < prev_delta.data.size(); ++i)
                if (!(prev_act.data[i] > 0.0))
                    prev_delta.data[i] = 0.0;
            delta = std::move(prev_delta);
        }
    }
    return result;
}

OptimizerState OptimizerState::create(const QNetwork& net, OptimizerKind kind) {
    OptimizerState state;
    state.kind = kind;
    if (kind == OptimizerKind::Adam) {
        for (std::size_t t = 0; t < net.layers.size(); ++t) {
            state.weight_m.emplace_back(net.weights[t].rows, net.weights[t].cols);
            state.weight_v.emplace_back(net.weights[t].rows, net.weights[t].cols);
            state.bias_m.emplace_back(net.biases[t].size(), 0.0);
            state.bias_v.emplace_back(net.biases[t].size(), 0.0);
        }
    }
    return state;
}

namespace {

void check_finite(const GradientSet& grads) {
    for (std::size_t t = 0; t < grads.weight_grads.size(); ++t) {
        for (double g : grads.weight_grads[t].data)
            if (!std::isfinite(g))
                throw DivergenceError("non-finite weight gradient in layer " + std::to_string(t));
        for (double g : grads.bias_grads[t])
            if (!std::isfinite(g))
                throw DivergenceError("non-finite bias gradient in layer " + std::to_string(t));
    }
}

void adam_step(double* params, const double* grads, double* m, double* v, std::size_t count,
               double lr, double bias1, double bias2) {
    for (std::size_t i = 0; i < count; ++i) {
        const double g = grads[i];
        m[i] = kAdamBeta1 * m[i] + (1.0 - kAdamBeta1) * g;
        v[i] = kAdamBeta2 * v[i] + (1.0 - kAdamBeta2) * g * g;
        const double m_hat = m[i] / bias1;
        const double v_hat = v[i] / bias2;
        params[i] -= lr * m_hat / (std::sqrt(v_hat) + kAdamEpsilon);
    }
}

} // namespace

void apply_update(QNetwork& net, const GradientSet& grads, OptimizerState& opt,
                  double learning_rate) {
    if (grads.weight_grads.size() != net.layers.size())
        throw Error("apply_update: gradient set does not match network layout");
    for (std::size_t t = 0; t < net.layers.size(); ++t)
        if (grads.weight_grads[t].rows != net.weights[t].rows ||
            grads.weight_grads[t].cols != net.weights[t].cols ||
            grads.bias_grads[t].size() != net.biases[t].size())
            throw Error("apply_update: gradient shape mismatch in layer " + std::to_string(t));
    check_finite(grads);

    if (opt.kind == OptimizerKind::Sgd) {
        ++opt.step;
        for (std::size_t t = 0; t < net.layers.size(); ++t) {
            for (std::size_t i = 0; i < net.weights[t].data.size(); ++i)
                net.weights[t].data[i] -= learning_rate * grads.weight_grads[t].data[i];
            for (std::size_t i = 0; i < net.biases[t].size(); ++i)
                net.biases[t][i] -= learning_rate * grads.bias_grads[t][i];
        }
        return;
    }

    ++opt.step;
    const double bias1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(opt.step));
    const double bias2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(opt.step));
    for (std::size_t t = 0; t < net.layers.size(); ++t) {
        adam_step(net.weights[t].data.data(), grads.weight_grads[t].data.data(),
                  opt.weight_m[t].data.data(), opt.weight_v[t].data.data(),
                  net.weights[t].data.size(), learning_rate, bias1, bias2);
        adam_step(net.biases[t].data(), grads.bias_grads[t].data(), opt.bias_m[t].data(),
                  opt.bias_v[t].data(), net.biases[t].size(), learning_rate, bias1, bias2);
    }
}

namespace {

constexpr char kCheckpointMagic[8] = {'D', 'Q', 'L', 'C', 'K', 'P', 'T', '1'};

template <typename T>
void write_pod(std::ostream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
void read_pod(std::istream& in, T& value) {
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
}

void write_doubles(std::ostream& out, const std::vector<double>& values) {
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size() * sizeof(double)));
}

void read_doubles(std::istream& in, std::vector<double>& values) {
    in.read(reinterpret_cast<char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
}

} // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error("cannot write checkpoint: " + path);
    out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
    write_pod(out, std::uint32_t{1});
    write_pod(out, static_cast<std::uint64_t>(ckpt.net.layers.size()));
    for (const LayerSpec& layer : ckpt.net.layers) {
        write_pod(out, static_cast<std::uint64_t>(layer.inputs));
        write_pod(out, static_cast<std::uint64_t>(layer.outputs));
        write_pod(out, static_cast<std::uint8_t>(layer.activation));
    }
    for (std::size_t t = 0; t < ckpt.net.layers.size(); ++t) {
        write_doubles(out, ckpt.net.weights[t].data);
        write_doubles(out, ckpt.net.biases[t]);
    }
    write_pod(out, static_cast<std::uint8_t>(ckpt.opt.kind));
    write_pod(out, ckpt.opt.step);
    const std::uint8_t has_moments = ckpt.opt.kind == OptimizerKind::Adam ? 1 : 0;
    write_pod(out, has_moments);
    if (has_moments) {
        for (std::size_t t = 0; t < ckpt.net.layers.size(); ++t) {
            write_doubles(out, ckpt.opt.weight_m[t].data);
            write_doubles(out, ckpt.opt.weight_v[t].data);
            write_doubles(out, ckpt.opt.bias_m[t]);
            write_doubles(out, ckpt.opt.bias_v[t]);
        }
    }
    write_pod(out, static_cast<std::uint64_t>(ckpt.rng_state.size()));
    out.write(ckpt.rng_state.data(), static_cast<std::streamsize>(ckpt.rng_state.size()));
    if (!out)
        throw Error("short write on checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot open checkpoint: " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0)
        throw Error("not a checkpoint file: " + path);
    std::uint32_t version = 0;
    read_pod(in, version);
    if (version != 1)
        throw Error("unsupported checkpoint version " + std::to_string(version) + ": " + path);

    Checkpoint ckpt;
    std::uint64_t layer_count = 0;
    read_pod(in, layer_count);
    for (std::uint64_t t = 0; t < layer_count; ++t) {
        std::uint64_t inputs = 0, outputs = 0;
        std::uint8_t act = 0;
        read_pod(in, inputs);
        read_pod(in, outputs);
        read_pod(in, act);
        ckpt.net.layers.push_back(
            {static_cast<std::size_t>(inputs), static_cast<std::size_t>(outputs),
             static_cast<Activation>(act)});
    }
    for (const LayerSpec& layer : ckpt.net.layers) {
        Matrix w(layer.inputs, layer.outputs);
        read_doubles(in, w.data);
        ckpt.net.weights.push_back(std::move(w));
        std::vector<double> b(layer.outputs, 0.0);
        read_doubles(in, b);
        ckpt.net.biases.push_back(std::move(b));
    }
    std::uint8_t kind = 0;
    read_pod(in, kind);
    ckpt.opt.kind = static_cast<OptimizerKind>(kind);
    read_pod(in, ckpt.opt.step);
    std::uint8_t has_moments = 0;
    read_pod(in, has_moments);
    if (has_moments) {
        for (const LayerSpec& layer : ckpt.net.layers) {
            Matrix m(layer.inputs, layer.outputs);
            read_doubles(in, m.data);
            ckpt.opt.weight_m.push_back(std::move(m));
            Matrix v(layer.inputs, layer.outputs);
            read_doubles(in, v.data);
            ckpt.opt.weight_v.push_back(std::move(v));
            std::vector<double> bm(layer.outputs, 0.0);
            read_doubles(in, bm);
            ckpt.opt.bias_m.push_back(std::move(bm));
            std::vector<double> bv(layer.outputs, 0.0);
            read_doubles(in, bv);
            ckpt.opt.bias_v.push_back(std::move(bv));
        }
    }
    std::uint64_t rng_len = 0;
    read_pod(in, rng_len);
    ckpt.rng_state.resize(rng_len);
    in.read(ckpt.rng_state.data(), static_cast<std::streamsize>(rng_len));
    if (!in)
        throw Error("truncated checkpoint: " + path);
    return ckpt;
}

} // namespace dqlids
