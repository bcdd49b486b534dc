#include "relaudit/lrp.hpp"

#include <algorithm>
#include <cmath>

#include "relaudit/error.hpp"

namespace relaudit::lrp {
namespace {

double sign_or_one(double t) { return t < 0.0 ? -1.0 : 1.0; }

/// Core redistribution for one neuron. z are the input contributions,
/// w the corresponding weights, bias the virtual contribution whose share
/// is dropped. Messages are delivered through acc(local_index, value).
template <typename Acc>
void redistribute(const RuleConfig& rule, std::span<const double> z, std::span<const double> w,
                  double bias, double rj, Acc&& acc) {
    const int n = static_cast<int>(z.size());
    switch (rule.kind) {
        case RuleKind::AlphaBeta: {
            double pos = std::max(bias, 0.0), neg = std::min(bias, 0.0);
            for (double v : z) {
                pos += std::max(v, 0.0);
                neg += std::min(v, 0.0);
            }
            for (int i = 0; i < n; ++i) {
                double m = 0.0;
                if (z[i] > 0.0 && pos > 0.0) m += rule.alpha * z[i] / pos;
                if (z[i] < 0.0 && neg < 0.0) m += rule.beta * z[i] / neg;
                if (m != 0.0) acc(i, m * rj);
            }
            break;
        }
        case RuleKind::Epsilon: {
            double s = bias;
            for (double v : z) s += v;
            const double denom = s + rule.epsilon * sign_or_one(s);
            for (int i = 0; i < n; ++i)
                if (z[i] != 0.0) acc(i, z[i] / denom * rj);
            break;
        }
        case RuleKind::WSquare: {
            double den = bias * bias;
            for (double v : w) den += v * v;
            if (den == 0.0) {
                for (int i = 0; i < n; ++i) acc(i, rj / n);  // flat fallback
            } else {
                for (int i = 0; i < n; ++i)
                    if (w[i] != 0.0) acc(i, w[i] * w[i] / den * rj);
            }
            break;
        }
        case RuleKind::Flat: {
            for (int i = 0; i < n; ++i) acc(i, rj / n);
            break;
        }
    }
}

std::vector<double> dense_backward(const net::Dense& d, const Tensor& in,
                                   std::span<const double> rel_out, const RuleConfig& rule) {
    std::vector<double> rel_in(static_cast<std::size_t>(d.in()), 0.0);
    std::vector<double> z(static_cast<std::size_t>(d.in()));
    std::vector<double> w(static_cast<std::size_t>(d.in()));
    for (int j = 0; j < d.out(); ++j) {
        const double rj = rel_out[j];
        if (rj == 0.0) continue;
        for (int i = 0; i < d.in(); ++i) {
            w[i] = d.weights.at(j, i);
            z[i] = w[i] * static_cast<double>(in.at(i));
        }
        redistribute(rule, z, w, d.bias.at(j), rj,
                     [&](int i, double m) { rel_in[i] += m; });
    }
    return rel_in;
}

std::vector<double> conv_backward(const net::Conv2D& c, const Tensor& in,
                                  const Tensor& out_shape_ref, std::span<const double> rel_out,
                                  const RuleConfig& rule) {
    const int oc = c.kernel.shape[0], ic = c.kernel.shape[1];
    const int kh = c.kernel.shape[2], kw = c.kernel.shape[3];
    const int ih = in.shape[1], iw = in.shape[2];
    const int oh = out_shape_ref.shape[1], ow = out_shape_ref.shape[2];
    std::vector<double> rel_in(in.data.size(), 0.0);
    const int field = ic * kh * kw;
    std::vector<double> z(field), w(field);
    std::vector<int> idx(field);
    for (int o = 0; o < oc; ++o)
        for (int oy = 0; oy < oh; ++oy)
            for (int ox = 0; ox < ow; ++ox) {
                const double rj = rel_out[(static_cast<std::size_t>(o) * oh + oy) * ow + ox];
                if (rj == 0.0) continue;
                const int y0 = oy * c.stride_h, x0 = ox * c.stride_w;
                int t = 0;
                for (int i = 0; i < ic; ++i)
                    for (int dy = 0; dy < kh; ++dy)
                        for (int dx = 0; dx < kw; ++dx, ++t) {
                            w[t] = c.kernel.data[((static_cast<std::size_t>(o) * ic + i) * kh +
                                                  dy) * kw + dx];
                            idx[t] = (i * ih + y0 + dy) * iw + x0 + dx;
                            z[t] = w[t] * static_cast<double>(in.data[idx[t]]);
                        }
                redistribute(rule, z, w, c.bias.at(o), rj,
                             [&](int i, double m) { rel_in[idx[i]] += m; });
            }
    return rel_in;
}

std::vector<double> maxpool_backward(const net::MaxPool2D& p, const Tensor& in,
                                     const Tensor& out_shape_ref,
                                     std::span<const double> rel_out) {
    const int ch = in.shape[0], ih = in.shape[1], iw = in.shape[2];
    const int oh = out_shape_ref.shape[1], ow = out_shape_ref.shape[2];
    std::vector<double> rel_in(in.data.size(), 0.0);
    for (int c = 0; c < ch; ++c)
        for (int oy = 0; oy < oh; ++oy)
            for (int ox = 0; ox < ow; ++ox) {
                const double rj = rel_out[(static_cast<std::size_t>(c) * oh + oy) * ow + ox];
                if (rj == 0.0) continue;
                const int y0 = oy * p.stride_h, x0 = ox * p.stride_w;
                int best = (c * ih + y0) * iw + x0;
                for (int dy = 0; dy < p.win_h; ++dy)
                    for (int dx = 0; dx < p.win_w; ++dx) {
                        const int i = (c * ih + y0 + dy) * iw + x0 + dx;
                        if (in.data[i] > in.data[best]) best = i;
                    }
                rel_in[best] += rj;
            }
    return rel_in;
}

}  // namespace

RuleConfig RuleConfig::alpha_beta(double alpha, double beta) {
    if (std::abs(alpha + beta - 1.0) > 1e-12)
        throw Error("AlphaBeta rule requires alpha + beta == 1");
    RuleConfig r;
    r.kind = RuleKind::AlphaBeta;
    r.alpha = alpha;
    r.beta = beta;
    return r;
}

RuleConfig RuleConfig::epsilon_rule(double eps) {
    if (!(eps > 0.0)) throw Error("Epsilon rule requires epsilon > 0");
    RuleConfig r;
    r.kind = RuleKind::Epsilon;
    r.epsilon = eps;
    return r;
}

RuleConfig RuleConfig::w_square() {
    RuleConfig r;
    r.kind = RuleKind::WSquare;
    return r;
}

RuleConfig RuleConfig::flat() {
    RuleConfig r;
    r.kind = RuleKind::Flat;
    return r;
}

RuleConfig RuleConfig::preset(const std::string& name) {
    if (name == "ab1") return alpha_beta(1.0, 0.0);
    if (name == "ab2") return alpha_beta(2.0, -1.0);
    if (name == "eps") return epsilon_rule(0.01);
    if (name == "w2") return w_square();
    if (name == "flat") return flat();
    throw Error("unknown rule preset \"" + name + "\" (expected ab1|ab2|eps|w2|flat)");
}

std::string RuleConfig::describe() const {
    switch (kind) {
        case RuleKind::AlphaBeta:
            return "alpha_beta(" + std::to_string(alpha) + "," + std::to_string(beta) + ")";
        case RuleKind::Epsilon:
            return "epsilon(" + std::to_string(epsilon) + ")";
        case RuleKind::WSquare:
            return "w_square";
        case RuleKind::Flat:
            return "flat";
    }
    return "?";
}

void RuleAssignment::validate(const net::Network& network) const {
    for (const auto& [k, rule] : overrides) {
        if (k < 0 || k >= static_cast<int>(network.layers.size()))
            throw Error("rule override for nonexistent layer " + std::to_string(k));
        const auto& layer = network.layers[k];
        if (!std::holds_alternative<net::Dense>(layer) &&
            !std::holds_alternative<net::Conv2D>(layer))
            throw Error("rule " + rule.describe() + " not applicable to layer " +
                        std::to_string(k) + " (" + net::layer_kind(layer) + ")");
    }
}

RuleAssignment RuleAssignment::with_bottom_rule(const net::Network& network,
                                                RuleConfig default_rule, RuleConfig bottom) {
    RuleAssignment a;
    a.default_rule = default_rule;
    for (std::size_t k = 0; k < network.layers.size(); ++k)
        if (std::holds_alternative<net::Dense>(network.layers[k]) ||
            std::holds_alternative<net::Conv2D>(network.layers[k])) {
            a.overrides[static_cast<int>(k)] = bottom;
            break;
        }
    return a;
}

RelevanceMap lrp_explain(const net::Network& network, const net::ForwardTrace& trace,
                         int output_index, const RuleAssignment& rules) {
    rules.validate(network);
    if (trace.inputs.size() != network.layers.size())
        throw Error("lrp_explain: trace does not match network depth");
    if (output_index < 0 || output_index >= network.output_size)
        throw Error("lrp_explain: output_index out of range");

    const double score = trace.scores().at(output_index);
    std::vector<double> rel(static_cast<std::size_t>(network.output_size), 0.0);
    rel[output_index] = score;

    for (int k = static_cast<int>(network.layers.size()) - 1; k >= 0; --k) {
        const Tensor& in = trace.inputs[k];
        const Tensor& out = trace.outputs[k];
        auto it = rules.overrides.find(k);
        const RuleConfig& rule = it != rules.overrides.end() ? it->second : rules.default_rule;
        if (const auto* d = std::get_if<net::Dense>(&network.layers[k])) {
            rel = dense_backward(*d, in, rel, rule);
        } else if (const auto* c = std::get_if<net::Conv2D>(&network.layers[k])) {
            rel = conv_backward(*c, in, out, rel, rule);
        } else if (const auto* p = std::get_if<net::MaxPool2D>(&network.layers[k])) {
            rel = maxpool_backward(*p, in, out, rel);
        }
        // ReLU and Flatten are transparent: the nonlinearity is folded into
        // the neuron definition, so relevance passes through unchanged.
    }

    RelevanceMap map;
    map.output_index = output_index;
    map.score = score;
    double total = 0.0;
    for (double v : rel) total += v;
    map.residual = std::abs(total - score);
    map.values = Tensor::zeros(network.input_shape);
    for (std::size_t i = 0; i < rel.size(); ++i)
        map.values.data[i] = static_cast<float>(rel[i]);
    map.values.ensure_finite("relevance map");
    return map;
}

std::vector<double> alpha_beta_messages(std::span<const double> inputs,
                                        std::span<const double> weights, double relevance,
                                        double alpha, double beta) {
    if (std::abs(alpha + beta - 1.0) > 1e-12)
        throw Error("alpha_beta_messages: alpha + beta must equal 1");
    if (inputs.size() != weights.size())
        throw Error("alpha_beta_messages: inputs/weights size mismatch");
    std::vector<double> z(inputs.size());
    for (std::size_t i = 0; i < inputs.size(); ++i) z[i] = inputs[i] * weights[i];
    std::vector<double> out(inputs.size(), 0.0);
    RuleConfig rule = RuleConfig::alpha_beta(alpha, beta);
    redistribute(rule, z, weights, 0.0, relevance, [&](int i, double m) { out[i] = m; });
    return out;
}

std::vector<double> epsilon_messages(std::span<const double> inputs,
                                     std::span<const double> weights, double relevance,
                                     double epsilon) {
    if (inputs.size() != weights.size())
        throw Error("epsilon_messages: inputs/weights size mismatch");
    std::vector<double> z(inputs.size());
    for (std::size_t i = 0; i < inputs.size(); ++i) z[i] = inputs[i] * weights[i];
    std::vector<double> out(inputs.size(), 0.0);
    RuleConfig rule = RuleConfig::epsilon_rule(epsilon);
    redistribute(rule, z, weights, 0.0, relevance, [&](int i, double m) { out[i] = m; });
    return out;
}

std::vector<double> w_square_messages(std::span<const double> weights, double relevance) {
    std::vector<double> z(weights.size(), 0.0);
    std::vector<double> out(weights.size(), 0.0);
    RuleConfig rule = RuleConfig::w_square();
    redistribute(rule, z, weights, 0.0, relevance, [&](int i, double m) { out[i] = m; });
    return out;
}

std::vector<double> flat_messages(int fan_in, double relevance) {
    if (fan_in < 1) throw Error("flat_messages: fan_in must be >= 1");
    return std::vector<double>(static_cast<std::size_t>(fan_in), relevance / fan_in);
}

std::vector<double> maxpool_redistribute(std::span<const double> pool_inputs, double relevance) {
    if (pool_inputs.empty()) throw Error("maxpool_redistribute: empty pool");
    std::size_t best = 0;
    for (std::size_t i = 1; i < pool_inputs.size(); ++i)
        if (pool_inputs[i] > pool_inputs[best]) best = i;
    std::vector<double> out(pool_inputs.size(), 0.0);
    out[best] = relevance;
    return out;
}

Tensor channel_pool(const Tensor& map) {
    if (map.rank() != 3) throw Error("channel_pool: expected a rank-3 (C,H,W) map");
    const int c = map.shape[0], h = map.shape[1], w = map.shape[2];
    Tensor out = Tensor::zeros({h, w});
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = 0; i < c; ++i) acc += map.at(i, y, x);
            out.at(y, x) = static_cast<float>(acc);
        }
    return out;
}

double region_relevance(const Tensor& map, std::span<const int> region) {
    double acc = 0.0;
    const int n = static_cast<int>(map.numel());
    for (int i : region) {
        if (i < 0 || i >= n)
            throw Error("region_relevance: index " + std::to_string(i) + " out of bounds");
        acc += map.data[i];
    }
    return acc;
}

Tensor normalize_heatmap(const Tensor& map) {
    map.ensure_finite("normalize_heatmap input");
    float max_abs = 0.0f;
    for (float v : map.data) max_abs = std::max(max_abs, std::abs(v));
    if (max_abs == 0.0f) return map;
    Tensor out = map;
    for (auto& v : out.data) v /= max_abs;
    return out;
}

}  // namespace relaudit::lrp
