#include "relaudit/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "relaudit/error.hpp"

namespace relaudit::net {

void write_pgm(const std::filesystem::path& path, const Tensor& img) {
    if (img.rank() != 2) throw Error("write_pgm: expected a rank-2 tensor");
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write " + path.string());
    f << "P5\n" << img.shape[1] << " " << img.shape[0] << "\n255\n";
    std::vector<unsigned char> row(img.data.size());
    for (std::size_t i = 0; i < img.data.size(); ++i) {
        const float v = std::clamp(img.data[i], 0.0f, 1.0f);
        row[i] = static_cast<unsigned char>(std::lround(v * 255.0f));
    }
    f.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
}

Tensor read_pgm(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot read " + path.string());
    std::string magic;
    f >> magic;
    if (magic != "P5") throw Error(path.string() + ": not a P5 PGM");
    // Header tokens may be separated by whitespace and '#' comments.
    auto next_int = [&]() -> int {
        for (;;) {
            int c = f.peek();
            if (c == '#') {
                std::string line;
                std::getline(f, line);
            } else if (std::isspace(c)) {
                f.get();
            } else {
                break;
            }
        }
        int v;
        if (!(f >> v)) throw Error(path.string() + ": truncated PGM header");
        return v;
    };
    const int w = next_int();
    const int h = next_int();
    const int maxval = next_int();
    if (maxval != 255) throw Error(path.string() + ": only maxval 255 supported");
    f.get();  // single whitespace after maxval
    std::vector<unsigned char> raw(static_cast<std::size_t>(w) * h);
    f.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (f.gcount() != static_cast<std::streamsize>(raw.size()))
        throw Error(path.string() + ": truncated PGM data");
    Tensor img = Tensor::zeros({h, w});
    for (std::size_t i = 0; i < raw.size(); ++i) img.data[i] = raw[i] / 255.0f;
    return img;
}

void write_index(const std::filesystem::path& path, const std::vector<IndexRow>& rows) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write " + path.string());
    f << "path,label,artifact,split\n";
    for (const auto& r : rows)
        f << r.path << "," << r.label << "," << (r.artifact ? 1 : 0) << "," << r.split << "\n";
}

std::vector<IndexRow> read_index(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot read dataset index " + path.string());
    std::string line;
    if (!std::getline(f, line)) throw Error(path.string() + ": empty index");
    auto split_line = [](const std::string& s) {
        std::vector<std::string> cells;
        std::stringstream ss(s);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        return cells;
    };
    auto header = split_line(line);
    auto col = [&](const std::string& name) -> int {
        auto it = std::find(header.begin(), header.end(), name);
        return it == header.end() ? -1 : static_cast<int>(it - header.begin());
    };
    const int c_path = col("path"), c_label = col("label");
    const int c_artifact = col("artifact"), c_split = col("split");
    if (c_path < 0 || c_label < 0)
        throw Error(path.string() + ": index needs `path` and `label` columns");
    std::vector<IndexRow> rows;
    std::size_t lineno = 1;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto cells = split_line(line);
        if (static_cast<int>(cells.size()) <= std::max(c_path, c_label))
            throw Error(path.string() + ":" + std::to_string(lineno) + ": short row");
        IndexRow r;
        r.path = cells[c_path];
        try {
            r.label = std::stoi(cells[c_label]);
        } catch (...) {
            throw Error(path.string() + ":" + std::to_string(lineno) + ": bad label");
        }
        if (c_artifact >= 0 && c_artifact < static_cast<int>(cells.size()))
            r.artifact = cells[c_artifact] == "1" || cells[c_artifact] == "true";
        if (c_split >= 0 && c_split < static_cast<int>(cells.size())) r.split = cells[c_split];
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<Sample> load_dataset(const std::filesystem::path& dir,
                                 const std::optional<std::string>& split_filter) {
    auto rows = read_index(dir / "index.csv");
    std::vector<Sample> samples;
    for (const auto& r : rows) {
        if (split_filter && r.split != *split_filter) continue;
        Sample s;
        s.id = r.path;
        s.x = read_pgm(dir / r.path);
        s.label = r.label;
        s.artifact = r.artifact;
        s.split = r.split;
        samples.push_back(std::move(s));
    }
    return samples;
}

}  // namespace relaudit::net
