#include "relaudit/tensor.hpp"

#include <cmath>
#include <string>

#include "relaudit/error.hpp"

namespace relaudit {

std::int64_t shape_numel(const std::vector<int>& shape) {
    std::int64_t n = 1;
    for (int e : shape) {
        if (e <= 0) throw Error("tensor shape extents must be positive");
        n *= e;
    }
    return n;
}

Tensor::Tensor(std::vector<int> shape_, std::vector<float> data_)
    : shape(std::move(shape_)), data(std::move(data_)) {
    if (shape_numel(shape) != static_cast<std::int64_t>(data.size()))
        throw Error("tensor data length does not match shape");
}

Tensor Tensor::zeros(std::vector<int> shape) {
    auto n = shape_numel(shape);
    Tensor t;
    t.shape = std::move(shape);
    t.data.assign(static_cast<std::size_t>(n), 0.0f);
    return t;
}

Tensor Tensor::full(std::vector<int> shape, float value) {
    Tensor t = zeros(std::move(shape));
    for (auto& v : t.data) v = value;
    return t;
}

std::int64_t Tensor::numel() const { return static_cast<std::int64_t>(data.size()); }

Tensor Tensor::reshaped(std::vector<int> new_shape) const {
    if (shape_numel(new_shape) != numel())
        throw Error("reshape: element count mismatch");
    Tensor t;
    t.shape = std::move(new_shape);
    t.data = data;
    return t;
}

bool Tensor::all_finite() const {
    for (float v : data)
        if (!std::isfinite(v)) return false;
    return true;
}

void Tensor::ensure_finite(const char* what) const {
    if (!all_finite()) throw Error(std::string(what) + ": non-finite value");
}

bool same_shape(const Tensor& a, const Tensor& b) { return a.shape == b.shape; }

}  // namespace relaudit
