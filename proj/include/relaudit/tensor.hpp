#pragma once

#include <cstdint>
#include <vector>

namespace relaudit {

/// Dense n-dimensional array of 32-bit floats, row-major.
struct Tensor {
    std::vector<int> shape;
    std::vector<float> data;

    Tensor() = default;
    Tensor(std::vector<int> shape_, std::vector<float> data_);

    static Tensor zeros(std::vector<int> shape);
    static Tensor full(std::vector<int> shape, float value);

    std::int64_t numel() const;
    int rank() const { return static_cast<int>(shape.size()); }

    float& at(int i) { return data[static_cast<std::size_t>(i)]; }
    float at(int i) const { return data[static_cast<std::size_t>(i)]; }
    float& at(int i, int j) { return data[static_cast<std::size_t>(i) * shape[1] + j]; }
    float at(int i, int j) const { return data[static_cast<std::size_t>(i) * shape[1] + j]; }
    float& at(int i, int j, int k) {
        return data[(static_cast<std::size_t>(i) * shape[1] + j) * shape[2] + k];
    }
    float at(int i, int j, int k) const {
        return data[(static_cast<std::size_t>(i) * shape[1] + j) * shape[2] + k];
    }

    /// Same data, new shape; element counts must agree.
    Tensor reshaped(std::vector<int> new_shape) const;

    bool all_finite() const;
    /// Throws Error("<what>: non-finite value") if any element is NaN/Inf.
    void ensure_finite(const char* what) const;
};

/// Element count for a shape; throws on non-positive extents.
std::int64_t shape_numel(const std::vector<int>& shape);

bool same_shape(const Tensor& a, const Tensor& b);

}  // namespace relaudit
