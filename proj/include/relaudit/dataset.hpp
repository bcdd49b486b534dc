#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "relaudit/tensor.hpp"

namespace relaudit::net {

/// One labeled sample; x holds pixel values scaled to [0, 1].
struct Sample {
    std::string id;
    Tensor x;
    int label = 0;
    bool artifact = false;
    std::string split;
};

/// 8-bit grayscale PGM (P5), maxval 255. Values outside [0,1] are clamped.
void write_pgm(const std::filesystem::path& path, const Tensor& img);
Tensor read_pgm(const std::filesystem::path& path);

struct IndexRow {
    std::string path;
    int label = 0;
    bool artifact = false;
    std::string split;
};

/// `index.csv` with header `path,label[,artifact[,split]]`.
void write_index(const std::filesystem::path& path, const std::vector<IndexRow>& rows);
std::vector<IndexRow> read_index(const std::filesystem::path& path);

/// Loads a dataset directory (index.csv + PGM files). When split_filter is
/// given, only rows with that split value are returned.
std::vector<Sample> load_dataset(const std::filesystem::path& dir,
                                 const std::optional<std::string>& split_filter = std::nullopt);

}  // namespace relaudit::net
