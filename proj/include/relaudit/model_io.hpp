#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>

#include "relaudit/network.hpp"

namespace relaudit::net {

/// Weight container: `model.json` manifest + `model.bin` sidecar blob of
/// little-endian 32-bit floats, concatenated in manifest tensor order.
///
/// Manifest schema (format_version 1):
///   {
///     "format_version": 1,
///     "input_shape": [...], "output_size": C,
///     "layers": [
///       {"kind": "Dense", "in": I, "out": O,
///        "params": {"weights": "l0.weights", "bias": "l0.bias"}},
///       {"kind": "Conv2D", "in_channels": I, "out_channels": O,
///        "kernel": [KH, KW], "stride": [SH, SW], "params": {...}},
///       {"kind": "ReLU"},
///       {"kind": "MaxPool2D", "window": [KH, KW], "stride": [SH, SW]},
///       {"kind": "Flatten"}
///     ],
///     "tensors": [{"name": "...", "shape": [...], "offset": <floats>}, ...]
///   }
///
/// Layers without "params" get zero-initialized parameters (architecture
/// templates). "offset" counts floats from the start of the blob.

/// Parses a manifest document (plus its blob, which may be empty when no
/// layer references parameters) into a validated Network.
Network parse_network_spec(const std::string& manifest_json,
                           std::span<const std::byte> blob = {});

std::string network_manifest(const Network& net);
std::vector<std::byte> network_blob(const Network& net);

/// Writes `model.json` + `model.bin` under dir.
void save_network(const Network& net, const std::filesystem::path& dir);
Network load_network(const std::filesystem::path& dir);

}  // namespace relaudit::net
