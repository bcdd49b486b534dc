#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "relaudit/dataset.hpp"
#include "relaudit/network.hpp"

namespace relaudit::net {

struct TrainConfig {
    double lr = 0.1;
    int epochs = 10;
    int batch = 32;
    std::uint64_t seed = 0;
};

struct TrainResult {
    Network net;
    double initial_loss = 0.0;        // mean CE of the initialized net
    std::vector<double> epoch_loss;   // mean CE per epoch (pre-update per batch)
};

/// Mini-batch SGD with softmax cross-entropy on Dense/ReLU/Flatten chains.
/// Zero-weight Dense layers are (seeded) Glorot-initialized first; layers
/// that already carry parameters are fine-tuned as-is. Conv2D/MaxPool2D
/// layers are inference-only and rejected here.
TrainResult train_toy(std::span<const Sample> data, const Network& arch, const TrainConfig& cfg);

/// Mean cross-entropy of net over data.
double mean_loss(const Network& net, std::span<const Sample> data);

int predict_label(const Network& net, const Tensor& x);
double accuracy(const Network& net, std::span<const Sample> data);

/// Conforms x to the network input shape (reshape when element counts match).
Tensor adapt_input(const Network& net, const Tensor& x);

}  // namespace relaudit::net
