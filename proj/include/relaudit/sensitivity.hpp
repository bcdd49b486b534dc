#pragma once

#include "relaudit/lrp.hpp"
#include "relaudit/network.hpp"

namespace relaudit::lrp {

/// Gradient of scores[output_index] w.r.t. the input, same shape as x.
/// ReLU uses subgradient 0 at the kink.
Tensor input_gradient(const net::Network& net, const Tensor& x, int output_index);

/// Sensitivity analysis: l2-norm of the input gradient over channels.
/// Rank-3 inputs (C,H,W) give an (H,W) map; lower ranks give |gradient|.
RelevanceMap sensitivity_map(const net::Network& net, const Tensor& x, int output_index);

}  // namespace relaudit::lrp
