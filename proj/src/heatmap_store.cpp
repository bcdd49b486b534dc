#include "relaudit/heatmap_store.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "relaudit/error.hpp"

namespace relaudit::lrp {

using nlohmann::json;

void HeatmapStore::add(const RelevanceMap& m) {
    Tensor grid = m.values.rank() == 3 ? channel_pool(m.values) : m.values;
    if (grid.rank() == 1) throw Error("heatmap store: cannot infer a grid from a rank-1 map");
    if (count() == 0) {
        height = grid.shape[0];
        width = grid.shape[1];
    } else if (grid.shape[0] != height || grid.shape[1] != width) {
        throw Error("heatmap store: map shape differs from store grid");
    }
    ids.push_back(m.sample_id);
    output_index.push_back(m.output_index);
    score.push_back(m.score);
    residual.push_back(m.residual);
    blob.insert(blob.end(), grid.data.begin(), grid.data.end());
}

Tensor HeatmapStore::map(int i) const {
    if (i < 0 || i >= count()) throw Error("heatmap store: index out of range");
    Tensor t = Tensor::zeros({height, width});
    const std::size_t n = static_cast<std::size_t>(height) * width;
    std::copy(blob.begin() + i * n, blob.begin() + (i + 1) * n, t.data.begin());
    return t;
}

void HeatmapStore::save(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    json samples = json::array();
    for (int i = 0; i < count(); ++i)
        samples.push_back({{"id", ids[i]},
                           {"output_index", output_index[i]},
                           {"score", score[i]},
                           {"residual", residual[i]}});
    json doc = {{"format_version", 1},
                {"height", height},
                {"width", width},
                {"rule", rule},
                {"samples", samples}};
    {
        std::ofstream f(dir / "heatmaps.json", std::ios::binary);
        if (!f) throw Error("cannot write " + (dir / "heatmaps.json").string());
        f << doc.dump(2) << "\n";
    }
    {
        std::ofstream f(dir / "heatmaps.bin", std::ios::binary);
        if (!f) throw Error("cannot write " + (dir / "heatmaps.bin").string());
        f.write(reinterpret_cast<const char*>(blob.data()),
                static_cast<std::streamsize>(blob.size() * 4));
    }
}

HeatmapStore HeatmapStore::load(const std::filesystem::path& dir) {
    std::ifstream mf(dir / "heatmaps.json", std::ios::binary);
    if (!mf) throw Error("cannot read " + (dir / "heatmaps.json").string());
    json doc;
    try {
        mf >> doc;
    } catch (const json::exception& e) {
        throw Error(std::string("malformed heatmap manifest: ") + e.what());
    }
    if (doc.value("format_version", -1) != 1)
        throw Error("heatmap store: unsupported format_version");
    HeatmapStore store;
    store.height = doc.at("height").get<int>();
    store.width = doc.at("width").get<int>();
    store.rule = doc.value("rule", "");
    for (const auto& s : doc.at("samples")) {
        store.ids.push_back(s.at("id").get<std::string>());
        store.output_index.push_back(s.at("output_index").get<int>());
        store.score.push_back(s.at("score").get<double>());
        store.residual.push_back(s.at("residual").get<double>());
    }
    std::ifstream bf(dir / "heatmaps.bin", std::ios::binary);
    if (!bf) throw Error("cannot read " + (dir / "heatmaps.bin").string());
    std::string raw((std::istreambuf_iterator<char>(bf)), std::istreambuf_iterator<char>());
    const std::size_t expected =
        static_cast<std::size_t>(store.count()) * store.height * store.width * 4;
    if (raw.size() != expected)
        throw Error("heatmap blob truncated: expected " + std::to_string(expected) +
                    " bytes, got " + std::to_string(raw.size()));
    store.blob.resize(raw.size() / 4);
    std::memcpy(store.blob.data(), raw.data(), raw.size());
    return store;
}

void render_heatmap_pgm(const Tensor& map, const std::filesystem::path& path) {
    if (map.rank() != 2) throw Error("render_heatmap_pgm: expected a rank-2 map");
    float max_abs = 0.0f;
    for (float v : map.data) max_abs = std::max(max_abs, std::abs(v));
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write " + path.string());
    f << "P5\n" << map.shape[1] << " " << map.shape[0] << "\n255\n";
    std::vector<unsigned char> bytes(map.data.size(), 128);
    if (max_abs > 0.0f)
        for (std::size_t i = 0; i < map.data.size(); ++i)
            bytes[i] = static_cast<unsigned char>(
                std::clamp(128L + std::lround(127.0f * map.data[i] / max_abs), 0L, 255L));
    f.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

}  // namespace relaudit::lrp
