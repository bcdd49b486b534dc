#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "relaudit/lrp.hpp"

namespace relaudit::lrp {

/// Dataset of relevance maps: `heatmaps.json` manifest + `heatmaps.bin`
/// blob of N x H x W little-endian 32-bit floats. Rank-3 maps are channel
/// pooled before storage so every entry is a single H x W grid.
struct HeatmapStore {
    int height = 0;
    int width = 0;
    std::string rule;  // describe() of the rule configuration used
    std::vector<std::string> ids;
    std::vector<int> output_index;
    std::vector<double> score;
    std::vector<double> residual;
    std::vector<float> blob;

    int count() const { return static_cast<int>(ids.size()); }
    void add(const RelevanceMap& map);
    Tensor map(int i) const;

    void save(const std::filesystem::path& dir) const;
    static HeatmapStore load(const std::filesystem::path& dir);
};

/// Signed heatmap to 8-bit PGM: 128 encodes zero relevance; values scale
/// linearly by the map's maximum absolute value.
void render_heatmap_pgm(const Tensor& map, const std::filesystem::path& path);

}  // namespace relaudit::lrp
