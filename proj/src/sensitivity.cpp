#include "relaudit/sensitivity.hpp"

#include <cmath>

#include "relaudit/error.hpp"

namespace relaudit::lrp {

Tensor input_gradient(const net::Network& network, const Tensor& x, int output_index) {
    if (output_index < 0 || output_index >= network.output_size)
        throw Error("input_gradient: output_index out of range");
    auto trace = net::forward(network, x);
    std::vector<double> grad(static_cast<std::size_t>(network.output_size), 0.0);
    grad[output_index] = 1.0;

    for (int k = static_cast<int>(network.layers.size()) - 1; k >= 0; --k) {
        const Tensor& in = trace.inputs[k];
        const Tensor& out = trace.outputs[k];
        if (const auto* d = std::get_if<net::Dense>(&network.layers[k])) {
            std::vector<double> gin(static_cast<std::size_t>(d->in()), 0.0);
            for (int j = 0; j < d->out(); ++j) {
                const double g = grad[j];
                if (g == 0.0) continue;
                for (int i = 0; i < d->in(); ++i)
                    gin[i] += static_cast<double>(d->weights.at(j, i)) * g;
            }
            grad = std::move(gin);
        } else if (const auto* c = std::get_if<net::Conv2D>(&network.layers[k])) {
            const int oc = c->kernel.shape[0], ic = c->kernel.shape[1];
            const int kh = c->kernel.shape[2], kw = c->kernel.shape[3];
            const int ih = in.shape[1], iw = in.shape[2];
            const int oh = out.shape[1], ow = out.shape[2];
            std::vector<double> gin(in.data.size(), 0.0);
            for (int o = 0; o < oc; ++o)
                for (int oy = 0; oy < oh; ++oy)
                    for (int ox = 0; ox < ow; ++ox) {
                        const double g = grad[(static_cast<std::size_t>(o) * oh + oy) * ow + ox];
                        if (g == 0.0) continue;
                        const int y0 = oy * c->stride_h, x0 = ox * c->stride_w;
                        for (int i = 0; i < ic; ++i)
                            for (int dy = 0; dy < kh; ++dy)
                                for (int dx = 0; dx < kw; ++dx)
                                    gin[(i * ih + y0 + dy) * iw + x0 + dx] +=
                                        g * c->kernel.data[((static_cast<std::size_t>(o) * ic +
                                                             i) * kh + dy) * kw + dx];
                    }
            grad = std::move(gin);
        } else if (const auto* p = std::get_if<net::MaxPool2D>(&network.layers[k])) {
            const int ch = in.shape[0], ih = in.shape[1], iw = in.shape[2];
            const int oh = out.shape[1], ow = out.shape[2];
            std::vector<double> gin(in.data.size(), 0.0);
            for (int c2 = 0; c2 < ch; ++c2)
                for (int oy = 0; oy < oh; ++oy)
                    for (int ox = 0; ox < ow; ++ox) {
                        const double g = grad[(static_cast<std::size_t>(c2) * oh + oy) * ow + ox];
                        if (g == 0.0) continue;
                        const int y0 = oy * p->stride_h, x0 = ox * p->stride_w;
                        int best = (c2 * ih + y0) * iw + x0;
                        for (int dy = 0; dy < p->win_h; ++dy)
                            for (int dx = 0; dx < p->win_w; ++dx) {
                                const int i = (c2 * ih + y0 + dy) * iw + x0 + dx;
                                if (in.data[i] > in.data[best]) best = i;
                            }
                        gin[best] += g;
                    }
            grad = std::move(gin);
        } else if (std::holds_alternative<net::ReLU>(network.layers[k])) {
            for (std::size_t i = 0; i < grad.size(); ++i)
                if (in.data[i] <= 0.0f) grad[i] = 0.0;
        }
        // Flatten: flat gradient passes through.
    }

    Tensor g = Tensor::zeros(network.input_shape);
    for (std::size_t i = 0; i < grad.size(); ++i) g.data[i] = static_cast<float>(grad[i]);
    g.ensure_finite("input gradient");
    return g;
}

RelevanceMap sensitivity_map(const net::Network& network, const Tensor& x, int output_index) {
    Tensor g = input_gradient(network, x, output_index);
    RelevanceMap map;
    map.output_index = output_index;
    map.score = net::forward(network, x).scores().at(output_index);
    map.residual = 0.0;  // conservation does not apply to gradient maps
    if (g.rank() == 3) {
        const int c = g.shape[0], h = g.shape[1], w = g.shape[2];
        Tensor out = Tensor::zeros({h, w});
        for (int y = 0; y < h; ++y)
            for (int xw = 0; xw < w; ++xw) {
                double acc = 0.0;
                for (int i = 0; i < c; ++i) {
                    const double v = g.at(i, y, xw);
                    acc += v * v;
                }
                out.at(y, xw) = static_cast<float>(std::sqrt(acc));
            }
        map.values = std::move(out);
    } else {
        Tensor out = g;
        for (auto& v : out.data) v = std::abs(v);
        map.values = std::move(out);
    }
    return map;
}

}  // namespace relaudit::lrp
