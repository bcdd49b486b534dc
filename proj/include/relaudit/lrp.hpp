#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "relaudit/network.hpp"

namespace relaudit::lrp {

enum class RuleKind { AlphaBeta, Epsilon, WSquare, Flat };

/// One relevance-redistribution rule. AlphaBeta requires alpha + beta == 1;
/// the usual presets are (1, 0) and (2, -1).
struct RuleConfig {
    RuleKind kind = RuleKind::AlphaBeta;
    double alpha = 1.0;
    double beta = 0.0;
    double epsilon = 0.01;

    static RuleConfig alpha_beta(double alpha, double beta);
    static RuleConfig epsilon_rule(double eps);
    static RuleConfig w_square();
    static RuleConfig flat();
    /// Preset names: ab1, ab2, eps, flat, w2.
    static RuleConfig preset(const std::string& name);
    std::string describe() const;
};

/// Default rule plus per-layer overrides (override indices must point at
/// Dense or Conv2D layers). `bottom_rule(net, rule)` is a convenience that
/// overrides the first parameterized layer.
struct RuleAssignment {
    RuleConfig default_rule;
    std::map<int, RuleConfig> overrides;

    void validate(const net::Network& net) const;
    static RuleAssignment with_bottom_rule(const net::Network& net, RuleConfig default_rule,
                                           RuleConfig bottom);
};

/// Per-input-element relevance for one sample/output pair. `residual` is
/// |sum(values) - score| computed in double precision before the map is
/// narrowed to 32-bit floats.
struct RelevanceMap {
    Tensor values;
    int output_index = 0;
    std::string sample_id;
    double score = 0.0;
    double residual = 0.0;
};

/// Backward relevance propagation over a recorded forward trace.
RelevanceMap lrp_explain(const net::Network& net, const net::ForwardTrace& trace,
                         int output_index, const RuleAssignment& rules);

// --- Rule primitives (bias-free; layer propagation adds the bias as a
// --- virtual input whose share is dropped). z_i = inputs[i] * weights[i].
std::vector<double> alpha_beta_messages(std::span<const double> inputs,
                                        std::span<const double> weights, double relevance,
                                        double alpha, double beta);
std::vector<double> epsilon_messages(std::span<const double> inputs,
                                     std::span<const double> weights, double relevance,
                                     double epsilon);
std::vector<double> w_square_messages(std::span<const double> weights, double relevance);
std::vector<double> flat_messages(int fan_in, double relevance);
/// Winner-take-all; ties go to the lowest flat index.
std::vector<double> maxpool_redistribute(std::span<const double> pool_inputs, double relevance);

/// Sum relevance across channels: (C, H, W) -> (H, W). Preserves totals.
Tensor channel_pool(const Tensor& map);

/// Sum over a region given as flat pixel indices; throws on out-of-bounds.
double region_relevance(const Tensor& map, std::span<const int> region);

/// Rescale into [-1, 1] by the maximum absolute value; all-zero maps are
/// returned unchanged.
Tensor normalize_heatmap(const Tensor& map);

}  // namespace relaudit::lrp
