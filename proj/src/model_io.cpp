#include "relaudit/model_io.hpp"

#include <cstring>
#include <fstream>
#include <map>

#include <json.hpp>

#include "relaudit/error.hpp"

namespace relaudit::net {
namespace {

using nlohmann::json;

constexpr int kFormatVersion = 1;

struct TensorEntry {
    std::vector<int> shape;
    std::int64_t offset = 0;
};

Tensor read_tensor(const std::map<std::string, TensorEntry>& table, const std::string& name,
                   std::span<const std::byte> blob) {
    auto it = table.find(name);
    if (it == table.end()) throw Error("manifest references missing tensor \"" + name + "\"");
    const auto& entry = it->second;
    const std::int64_t n = shape_numel(entry.shape);
    const std::int64_t end_byte = (entry.offset + n) * 4;
    if (entry.offset < 0 || end_byte > static_cast<std::int64_t>(blob.size()))
        throw Error("tensor \"" + name + "\" extends past end of blob");
    Tensor t = Tensor::zeros(entry.shape);
    // Little-endian f32; this code assumes a little-endian host.
    std::memcpy(t.data.data(), blob.data() + entry.offset * 4, static_cast<std::size_t>(n) * 4);
    if (!t.all_finite()) throw Error("tensor \"" + name + "\" contains non-finite values");
    return t;
}

std::vector<int> int_list(const json& j, const char* what) {
    if (!j.is_array()) throw Error(std::string(what) + ": expected an array");
    std::vector<int> out;
    for (const auto& v : j) out.push_back(v.get<int>());
    return out;
}

}  // namespace

Network parse_network_spec(const std::string& manifest_json, std::span<const std::byte> blob) {
    json doc;
    try {
        doc = json::parse(manifest_json);
    } catch (const json::exception& e) {
        throw Error(std::string("malformed manifest: ") + e.what());
    }
    if (!doc.is_object()) throw Error("malformed manifest: not an object");
    if (doc.value("format_version", -1) != kFormatVersion)
        throw Error("unsupported format_version (expected " + std::to_string(kFormatVersion) + ")");
    if (!doc.contains("layers") || !doc["layers"].is_array())
        throw Error("malformed manifest: missing layers array");
    if (doc["layers"].empty()) throw Error("no layers");

    std::map<std::string, TensorEntry> table;
    std::int64_t total_floats = 0;
    if (doc.contains("tensors")) {
        for (const auto& t : doc["tensors"]) {
            TensorEntry entry;
            entry.shape = int_list(t.at("shape"), "tensor shape");
            entry.offset = t.at("offset").get<std::int64_t>();
            table[t.at("name").get<std::string>()] = entry;
            total_floats += shape_numel(entry.shape);
        }
        if (total_floats * 4 != static_cast<std::int64_t>(blob.size()))
            throw Error("blob truncated or oversized: expected " + std::to_string(total_floats * 4) +
                        " bytes, got " + std::to_string(blob.size()));
    }

    auto param_name = [](const json& layer, const char* key) -> std::string {
        return layer.at("params").at(key).get<std::string>();
    };

    Network net;
    net.input_shape = int_list(doc.at("input_shape"), "input_shape");
    net.output_size = doc.at("output_size").get<int>();

    for (std::size_t k = 0; k < doc["layers"].size(); ++k) {
        const json& layer = doc["layers"][k];
        const std::string kind = layer.at("kind").get<std::string>();
        try {
            if (kind == "Dense") {
                const int in = layer.at("in").get<int>();
                const int out = layer.at("out").get<int>();
                Dense d;
                if (layer.contains("params")) {
                    d.weights = read_tensor(table, param_name(layer, "weights"), blob);
                    d.bias = read_tensor(table, param_name(layer, "bias"), blob);
                } else {
                    d.weights = Tensor::zeros({out, in});
                    d.bias = Tensor::zeros({out});
                }
                if (d.weights.shape != std::vector<int>{out, in})
                    throw Error("Dense weights shape does not match declared in/out");
                net.layers.emplace_back(std::move(d));
            } else if (kind == "Conv2D") {
                const int ic = layer.at("in_channels").get<int>();
                const int oc = layer.at("out_channels").get<int>();
                auto ksize = int_list(layer.at("kernel"), "kernel");
                auto stride = int_list(layer.at("stride"), "stride");
                if (ksize.size() != 2 || stride.size() != 2)
                    throw Error("Conv2D kernel/stride must have two entries");
                Conv2D c;
                c.stride_h = stride[0];
                c.stride_w = stride[1];
                if (layer.contains("params")) {
                    c.kernel = read_tensor(table, param_name(layer, "kernel"), blob);
                    c.bias = read_tensor(table, param_name(layer, "bias"), blob);
                } else {
                    c.kernel = Tensor::zeros({oc, ic, ksize[0], ksize[1]});
                    c.bias = Tensor::zeros({oc});
                }
                if (c.kernel.shape != std::vector<int>{oc, ic, ksize[0], ksize[1]})
                    throw Error("Conv2D kernel shape does not match declared geometry");
                net.layers.emplace_back(std::move(c));
            } else if (kind == "ReLU") {
                net.layers.emplace_back(ReLU{});
            } else if (kind == "MaxPool2D") {
                auto window = int_list(layer.at("window"), "window");
                auto stride = int_list(layer.at("stride"), "stride");
                if (window.size() != 2 || stride.size() != 2)
                    throw Error("MaxPool2D window/stride must have two entries");
                net.layers.emplace_back(MaxPool2D{window[0], window[1], stride[0], stride[1]});
            } else if (kind == "Flatten") {
                net.layers.emplace_back(Flatten{});
            } else {
                throw Error("unknown layer kind \"" + kind + "\"");
            }
        } catch (const json::exception& e) {
            throw Error("layer " + std::to_string(k) + ": malformed entry: " + e.what());
        } catch (const Error& e) {
            throw Error("layer " + std::to_string(k) + ": " + e.what());
        }
    }

    net.validate();
    return net;
}

std::string network_manifest(const Network& net) {
    json layers = json::array();
    json tensors = json::array();
    std::int64_t offset = 0;
    auto add_tensor = [&](const std::string& name, const Tensor& t) {
        tensors.push_back({{"name", name}, {"shape", t.shape}, {"offset", offset}});
        offset += t.numel();
        return name;
    };
    for (std::size_t k = 0; k < net.layers.size(); ++k) {
        const std::string prefix = "l" + std::to_string(k) + ".";
        if (const auto* d = std::get_if<Dense>(&net.layers[k])) {
            layers.push_back({{"kind", "Dense"},
                              {"in", d->in()},
                              {"out", d->out()},
                              {"params",
                               {{"weights", add_tensor(prefix + "weights", d->weights)},
                                {"bias", add_tensor(prefix + "bias", d->bias)}}}});
        } else if (const auto* c = std::get_if<Conv2D>(&net.layers[k])) {
            layers.push_back({{"kind", "Conv2D"},
                              {"in_channels", c->kernel.shape[1]},
                              {"out_channels", c->kernel.shape[0]},
                              {"kernel", {c->kernel.shape[2], c->kernel.shape[3]}},
                              {"stride", {c->stride_h, c->stride_w}},
                              {"params",
                               {{"kernel", add_tensor(prefix + "kernel", c->kernel)},
                                {"bias", add_tensor(prefix + "bias", c->bias)}}}});
        } else if (std::holds_alternative<ReLU>(net.layers[k])) {
            layers.push_back({{"kind", "ReLU"}});
        } else if (const auto* p = std::get_if<MaxPool2D>(&net.layers[k])) {
            layers.push_back({{"kind", "MaxPool2D"},
                              {"window", {p->win_h, p->win_w}},
                              {"stride", {p->stride_h, p->stride_w}}});
        } else {
            layers.push_back({{"kind", "Flatten"}});
        }
    }
    json doc = {{"format_version", kFormatVersion},
                {"input_shape", net.input_shape},
                {"output_size", net.output_size},
                {"layers", layers},
                {"tensors", tensors}};
    return doc.dump(2) + "\n";
}

std::vector<std::byte> network_blob(const Network& net) {
    std::vector<std::byte> blob;
    auto append = [&](const Tensor& t) {
        const std::size_t pos = blob.size();
        blob.resize(pos + t.data.size() * 4);
        std::memcpy(blob.data() + pos, t.data.data(), t.data.size() * 4);
    };
    for (const auto& layer : net.layers) {
        if (const auto* d = std::get_if<Dense>(&layer)) {
            append(d->weights);
            append(d->bias);
        } else if (const auto* c = std::get_if<Conv2D>(&layer)) {
            append(c->kernel);
            append(c->bias);
        }
    }
    return blob;
}

void save_network(const Network& net, const std::filesystem::path& dir) {
    net.validate();
    std::filesystem::create_directories(dir);
    {
        std::ofstream f(dir / "model.json", std::ios::binary);
        if (!f) throw Error("cannot write " + (dir / "model.json").string());
        f << network_manifest(net);
    }
    {
        auto blob = network_blob(net);
        std::ofstream f(dir / "model.bin", std::ios::binary);
        if (!f) throw Error("cannot write " + (dir / "model.bin").string());
        f.write(reinterpret_cast<const char*>(blob.data()),
                static_cast<std::streamsize>(blob.size()));
    }
}

namespace {

std::string read_file(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    if (!f) throw Error("cannot read " + p.string());
    return std::string(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
}

}  // namespace

Network load_network(const std::filesystem::path& dir) {
    const std::string manifest = read_file(dir / "model.json");
    std::vector<std::byte> blob;
    if (std::filesystem::exists(dir / "model.bin")) {
        const std::string raw = read_file(dir / "model.bin");
        blob.resize(raw.size());
        std::memcpy(blob.data(), raw.data(), raw.size());
    }
    return parse_network_spec(manifest, blob);
}

}  // namespace relaudit::net
