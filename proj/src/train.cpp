#include "relaudit/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "relaudit/error.hpp"
#include "relaudit/rng.hpp"

namespace relaudit::net {
namespace {

struct SoftmaxCE {
    double loss;
    std::vector<double> grad;  // d loss / d logits
};

SoftmaxCE softmax_cross_entropy(const Tensor& logits, int label) {
    const int c = static_cast<int>(logits.numel());
    double m = logits.at(0);
    for (int i = 1; i < c; ++i) m = std::max(m, static_cast<double>(logits.at(i)));
    double z = 0.0;
    std::vector<double> p(c);
    for (int i = 0; i < c; ++i) {
        p[i] = std::exp(static_cast<double>(logits.at(i)) - m);
        z += p[i];
    }
    SoftmaxCE out;
    out.grad.resize(c);
    for (int i = 0; i < c; ++i) {
        p[i] /= z;
        out.grad[i] = p[i] - (i == label ? 1.0 : 0.0);
    }
    out.loss = -std::log(std::max(p[label], 1e-300));
    return out;
}

// Per-sample forward keeping what backprop needs.
struct LayerCache {
    std::vector<Tensor> inputs;  // input of each layer (flattened views for Dense)
};

Tensor training_forward(const Network& net, const Tensor& x, LayerCache& cache) {
    Tensor cur = x;
    for (const auto& layer : net.layers) {
        cache.inputs.push_back(cur);
        if (const auto* d = std::get_if<Dense>(&layer)) {
            Tensor y = Tensor::zeros({d->out()});
            for (int j = 0; j < d->out(); ++j) {
                double acc = d->bias.at(j);
                for (int i = 0; i < d->in(); ++i)
                    acc += static_cast<double>(d->weights.at(j, i)) * cur.at(i);
                y.at(j) = static_cast<float>(acc);
            }
            cur = std::move(y);
        } else if (std::holds_alternative<ReLU>(layer)) {
            Tensor y = cur;
            for (auto& v : y.data) v = std::max(v, 0.0f);
            cur = std::move(y);
        } else {  // Flatten (validated earlier)
            cur = cur.reshaped({static_cast<int>(cur.numel())});
        }
    }
    return cur;
}

struct Grads {
    // Parallel to net.layers; empty tensors for parameterless layers.
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> bias;
};

void backprop(const Network& net, const LayerCache& cache, std::vector<double> grad_out,
              Grads& grads) {
    for (int k = static_cast<int>(net.layers.size()) - 1; k >= 0; --k) {
        const Tensor& in = cache.inputs[k];
        if (const auto* d = std::get_if<Dense>(&net.layers[k])) {
            std::vector<double> grad_in(d->in(), 0.0);
            for (int j = 0; j < d->out(); ++j) {
                const double g = grad_out[j];
                grads.bias[k][j] += g;
                for (int i = 0; i < d->in(); ++i) {
                    grads.weights[k][static_cast<std::size_t>(j) * d->in() + i] += g * in.at(i);
                    grad_in[i] += static_cast<double>(d->weights.at(j, i)) * g;
                }
            }
            grad_out = std::move(grad_in);
        } else if (std::holds_alternative<ReLU>(net.layers[k])) {
            for (std::size_t i = 0; i < grad_out.size(); ++i)
                if (in.data[i] <= 0.0f) grad_out[i] = 0.0;  // subgradient 0 at the kink
        }
        // Flatten: gradient passes through unchanged (flat indexing).
    }
}

void check_trainable(const Network& arch) {
    for (std::size_t k = 0; k < arch.layers.size(); ++k)
        if (std::holds_alternative<Conv2D>(arch.layers[k]) ||
            std::holds_alternative<MaxPool2D>(arch.layers[k]))
            throw Error("train_toy: layer " + std::to_string(k) + " (" +
                        layer_kind(arch.layers[k]) + ") is inference-only");
}

}  // namespace

Tensor adapt_input(const Network& net, const Tensor& x) {
    if (x.shape == net.input_shape) return x;
    if (x.numel() == shape_numel(net.input_shape)) return x.reshaped(net.input_shape);
    throw Error("sample shape does not match network input");
}

double mean_loss(const Network& net, std::span<const Sample> data) {
    double total = 0.0;
    for (const auto& s : data) {
        LayerCache cache;
        Tensor logits = training_forward(net, adapt_input(net, s.x), cache);
        total += softmax_cross_entropy(logits, s.label).loss;
    }
    return total / static_cast<double>(data.size());
}

int predict_label(const Network& net, const Tensor& x) {
    auto trace = forward(net, adapt_input(net, x));
    const Tensor& s = trace.scores();
    int best = 0;
    for (int i = 1; i < static_cast<int>(s.numel()); ++i)
        if (s.at(i) > s.at(best)) best = i;
    return best;
}

double accuracy(const Network& net, std::span<const Sample> data) {
    if (data.empty()) throw Error("accuracy: empty sample set");
    int hits = 0;
    for (const auto& s : data)
        if (predict_label(net, s.x) == s.label) ++hits;
    return static_cast<double>(hits) / static_cast<double>(data.size());
}

TrainResult train_toy(std::span<const Sample> data, const Network& arch, const TrainConfig& cfg) {
    if (data.empty()) throw Error("train_toy: empty sample set");
    if (cfg.batch < 1) throw Error("train_toy: batch must be >= 1");
    check_trainable(arch);
    arch.validate();
    for (const auto& s : data)
        if (s.label < 0 || s.label >= arch.output_size)
            throw Error("train_toy: label " + std::to_string(s.label) + " out of range");

    TrainResult result;
    result.net = arch;
    Rng root(cfg.seed);

    // Glorot-uniform init for all-zero Dense layers.
    Rng init = root.split("init");
    for (std::size_t k = 0; k < result.net.layers.size(); ++k) {
        auto* d = std::get_if<Dense>(&result.net.layers[k]);
        if (!d) continue;
        const bool all_zero = std::all_of(d->weights.data.begin(), d->weights.data.end(),
                                          [](float v) { return v == 0.0f; });
        if (!all_zero) continue;
        Rng layer_rng = init.split(static_cast<std::uint64_t>(k));
        const double s = std::sqrt(6.0 / (d->in() + d->out()));
        for (auto& w : d->weights.data) w = static_cast<float>(layer_rng.uniform(-s, s));
    }

    result.initial_loss = mean_loss(result.net, data);

    Grads grads;
    grads.weights.resize(result.net.layers.size());
    grads.bias.resize(result.net.layers.size());
    for (std::size_t k = 0; k < result.net.layers.size(); ++k)
        if (const auto* d = std::get_if<Dense>(&result.net.layers[k])) {
            grads.weights[k].resize(d->weights.data.size());
            grads.bias[k].resize(d->bias.data.size());
        }

    std::vector<int> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle = root.split("shuffle");

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        Rng epoch_rng = shuffle.split(static_cast<std::uint64_t>(epoch));
        for (int i = static_cast<int>(order.size()) - 1; i > 0; --i)
            std::swap(order[i], order[epoch_rng.next_int(i + 1)]);

        double epoch_total = 0.0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch) {
            const std::size_t end = std::min(order.size(), start + cfg.batch);
            for (auto& g : grads.weights) std::fill(g.begin(), g.end(), 0.0);
            for (auto& g : grads.bias) std::fill(g.begin(), g.end(), 0.0);

            for (std::size_t n = start; n < end; ++n) {
                const Sample& s = data[order[n]];
                LayerCache cache;
                Tensor logits = training_forward(result.net, adapt_input(result.net, s.x), cache);
                auto ce = softmax_cross_entropy(logits, s.label);
                if (!std::isfinite(ce.loss))
                    throw Error("train_toy: diverged (non-finite loss) at epoch " +
                                std::to_string(epoch));
                epoch_total += ce.loss;
                backprop(result.net, cache, std::move(ce.grad), grads);
            }

            const double scale = cfg.lr / static_cast<double>(end - start);
            for (std::size_t k = 0; k < result.net.layers.size(); ++k) {
                auto* d = std::get_if<Dense>(&result.net.layers[k]);
                if (!d) continue;
                for (std::size_t i = 0; i < d->weights.data.size(); ++i)
                    d->weights.data[i] =
                        static_cast<float>(d->weights.data[i] - scale * grads.weights[k][i]);
                for (std::size_t i = 0; i < d->bias.data.size(); ++i)
                    d->bias.data[i] =
                        static_cast<float>(d->bias.data[i] - scale * grads.bias[k][i]);
            }
        }
        result.epoch_loss.push_back(epoch_total / static_cast<double>(data.size()));
    }
    return result;
}

}  // namespace relaudit::net
