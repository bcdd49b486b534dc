#pragma once

#include <string>
#include <variant>
#include <vector>

#include "relaudit/tensor.hpp"

namespace relaudit::net {

/// Fully connected layer: weights (out, in), bias (out).
struct Dense {
    Tensor weights;
    Tensor bias;
    int in() const { return weights.shape[1]; }
    int out() const { return weights.shape[0]; }
};

/// Valid (no padding) 2-D convolution: kernel (out_ch, in_ch, kh, kw), bias (out_ch).
struct Conv2D {
    Tensor kernel;
    Tensor bias;
    int stride_h = 1;
    int stride_w = 1;
};

struct ReLU {};

struct MaxPool2D {
    int win_h = 2;
    int win_w = 2;
    int stride_h = 2;
    int stride_w = 2;
};

struct Flatten {};

using LayerSpec = std::variant<Dense, Conv2D, ReLU, MaxPool2D, Flatten>;

const char* layer_kind(const LayerSpec& layer);

/// Output shape of a layer for the given input shape; throws Error on mismatch.
std::vector<int> layer_output_shape(const LayerSpec& layer, const std::vector<int>& in);

/// Sequential chain of layers ending in a rank-1 score vector.
struct Network {
    std::vector<LayerSpec> layers;
    std::vector<int> input_shape;
    int output_size = 0;

    /// Checks the shape chain, parameter consistency and finiteness.
    /// Error messages name the offending layer index.
    void validate() const;
    /// Per-layer input shapes (size layers+1; last entry is the output shape).
    std::vector<std::vector<int>> shape_chain() const;
};

/// All intermediate activations of one forward pass.
struct ForwardTrace {
    std::vector<Tensor> inputs;   // input of layer k
    std::vector<Tensor> outputs;  // output of layer k
    const Tensor& scores() const { return outputs.back(); }
};

/// Deterministic forward pass recording every activation.
ForwardTrace forward(const Network& net, const Tensor& x);

}  // namespace relaudit::net
