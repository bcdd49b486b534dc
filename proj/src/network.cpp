#include "relaudit/network.hpp"

#include <algorithm>
#include <string>

#include "relaudit/error.hpp"

namespace relaudit::net {
namespace {

template <class... Ts>
struct Overload : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overload(Ts...) -> Overload<Ts...>;

std::string shape_str(const std::vector<int>& s) {
    std::string out = "(";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(s[i]);
    }
    return out + ")";
}

}  // namespace

const char* layer_kind(const LayerSpec& layer) {
    return std::visit(Overload{[](const Dense&) { return "Dense"; },
                               [](const Conv2D&) { return "Conv2D"; },
                               [](const ReLU&) { return "ReLU"; },
                               [](const MaxPool2D&) { return "MaxPool2D"; },
                               [](const Flatten&) { return "Flatten"; }},
                      layer);
}

std::vector<int> layer_output_shape(const LayerSpec& layer, const std::vector<int>& in) {
    return std::visit(
        Overload{
            [&](const Dense& d) -> std::vector<int> {
                if (d.weights.rank() != 2 || d.bias.rank() != 1 ||
                    d.bias.shape[0] != d.out())
                    throw Error("Dense: inconsistent parameter shapes");
                if (in.size() != 1 || in[0] != d.in())
                    throw Error("Dense: expected input (" + std::to_string(d.in()) +
                                "), got " + shape_str(in));
                return {d.out()};
            },
            [&](const Conv2D& c) -> std::vector<int> {
                if (c.kernel.rank() != 4 || c.bias.rank() != 1 ||
                    c.bias.shape[0] != c.kernel.shape[0])
                    throw Error("Conv2D: inconsistent parameter shapes");
                if (c.stride_h < 1 || c.stride_w < 1)
                    throw Error("Conv2D: stride must be >= 1");
                if (in.size() != 3 || in[0] != c.kernel.shape[1])
                    throw Error("Conv2D: expected input (" +
                                std::to_string(c.kernel.shape[1]) + ",H,W), got " +
                                shape_str(in));
                int kh = c.kernel.shape[2], kw = c.kernel.shape[3];
                if (in[1] < kh || in[2] < kw)
                    throw Error("Conv2D: input " + shape_str(in) +
                                " smaller than kernel window");
                int oh = (in[1] - kh) / c.stride_h + 1;
                int ow = (in[2] - kw) / c.stride_w + 1;
                return {c.kernel.shape[0], oh, ow};
            },
            [&](const ReLU&) -> std::vector<int> { return in; },
            [&](const MaxPool2D& p) -> std::vector<int> {
                if (p.win_h < 1 || p.win_w < 1 || p.stride_h < 1 || p.stride_w < 1)
                    throw Error("MaxPool2D: window and stride must be >= 1");
                if (in.size() != 3)
                    throw Error("MaxPool2D: expected rank-3 input, got " + shape_str(in));
                if (in[1] < p.win_h || in[2] < p.win_w)
                    throw Error("MaxPool2D: input " + shape_str(in) +
                                " smaller than pool window");
                int oh = (in[1] - p.win_h) / p.stride_h + 1;
                int ow = (in[2] - p.win_w) / p.stride_w + 1;
                return {in[0], oh, ow};
            },
            [&](const Flatten&) -> std::vector<int> {
                return {static_cast<int>(shape_numel(in))};
            }},
        layer);
}

std::vector<std::vector<int>> Network::shape_chain() const {
    std::vector<std::vector<int>> chain;
    chain.push_back(input_shape);
    for (std::size_t k = 0; k < layers.size(); ++k) {
        try {
            chain.push_back(layer_output_shape(layers[k], chain.back()));
        } catch (const Error& e) {
            throw Error("layer " + std::to_string(k) + ": " + e.what());
        }
    }
    return chain;
}

void Network::validate() const {
    if (layers.empty()) throw Error("no layers");
    shape_numel(input_shape);
    auto chain = shape_chain();
    const auto& out = chain.back();
    if (out.size() != 1 || out[0] != output_size)
        throw Error("network output shape " + shape_str(out) + " does not match output_size " +
                    std::to_string(output_size));
    for (std::size_t k = 0; k < layers.size(); ++k) {
        const Tensor* params[2] = {nullptr, nullptr};
        if (const auto* d = std::get_if<Dense>(&layers[k])) {
            params[0] = &d->weights;
            params[1] = &d->bias;
        } else if (const auto* c = std::get_if<Conv2D>(&layers[k])) {
            params[0] = &c->kernel;
            params[1] = &c->bias;
        }
        for (const Tensor* t : params)
            if (t && !t->all_finite())
                throw Error("layer " + std::to_string(k) + ": non-finite parameter");
    }
}

namespace {

Tensor dense_forward(const Dense& d, const Tensor& x) {
    Tensor y = Tensor::zeros({d.out()});
    for (int j = 0; j < d.out(); ++j) {
        double acc = d.bias.at(j);
        for (int i = 0; i < d.in(); ++i) acc += static_cast<double>(d.weights.at(j, i)) * x.at(i);
        y.at(j) = static_cast<float>(acc);
    }
    return y;
}

Tensor conv2d_forward(const Conv2D& c, const Tensor& x) {
    const int oc = c.kernel.shape[0], ic = c.kernel.shape[1];
    const int kh = c.kernel.shape[2], kw = c.kernel.shape[3];
    const int oh = (x.shape[1] - kh) / c.stride_h + 1;
    const int ow = (x.shape[2] - kw) / c.stride_w + 1;
    Tensor y = Tensor::zeros({oc, oh, ow});
    for (int o = 0; o < oc; ++o)
        for (int oy = 0; oy < oh; ++oy)
            for (int ox = 0; ox < ow; ++ox) {
                double acc = c.bias.at(o);
                const int y0 = oy * c.stride_h, x0 = ox * c.stride_w;
                for (int i = 0; i < ic; ++i)
                    for (int dy = 0; dy < kh; ++dy)
                        for (int dx = 0; dx < kw; ++dx)
                            acc += static_cast<double>(
                                       c.kernel.data[((static_cast<std::size_t>(o) * ic + i) * kh +
                                                      dy) * kw + dx]) *
                                   x.at(i, y0 + dy, x0 + dx);
                y.at(o, oy, ox) = static_cast<float>(acc);
            }
    return y;
}

Tensor maxpool_forward(const MaxPool2D& p, const Tensor& x) {
    const int ch = x.shape[0];
    const int oh = (x.shape[1] - p.win_h) / p.stride_h + 1;
    const int ow = (x.shape[2] - p.win_w) / p.stride_w + 1;
    Tensor y = Tensor::zeros({ch, oh, ow});
    for (int c = 0; c < ch; ++c)
        for (int oy = 0; oy < oh; ++oy)
            for (int ox = 0; ox < ow; ++ox) {
                const int y0 = oy * p.stride_h, x0 = ox * p.stride_w;
                float best = x.at(c, y0, x0);
                for (int dy = 0; dy < p.win_h; ++dy)
                    for (int dx = 0; dx < p.win_w; ++dx)
                        best = std::max(best, x.at(c, y0 + dy, x0 + dx));
                y.at(c, oy, ox) = best;
            }
    return y;
}

}  // namespace

ForwardTrace forward(const Network& net, const Tensor& x) {
    if (x.shape != net.input_shape)
        throw Error("forward: input shape does not match network input_shape");
    x.ensure_finite("forward input");
    ForwardTrace trace;
    Tensor cur = x;
    for (std::size_t k = 0; k < net.layers.size(); ++k) {
        trace.inputs.push_back(cur);
        Tensor out = std::visit(
            Overload{[&](const Dense& d) { return dense_forward(d, cur); },
                     [&](const Conv2D& c) { return conv2d_forward(c, cur); },
                     [&](const ReLU&) {
                         Tensor y = cur;
                         for (auto& v : y.data) v = std::max(v, 0.0f);
                         return y;
                     },
                     [&](const MaxPool2D& p) { return maxpool_forward(p, cur); },
                     [&](const Flatten&) {
                         return cur.reshaped({static_cast<int>(cur.numel())});
                     }},
            net.layers[k]);
        if (!out.all_finite())
            throw Error("forward: non-finite activation at layer " + std::to_string(k));
        trace.outputs.push_back(out);
        cur = std::move(out);
    }
    return trace;
}

}  // namespace relaudit::net
