#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "polyfilter/layers.hpp"

namespace polyfilter {

std::string base64_encode(std::span<const std::uint8_t> bytes);
/// Throws std::invalid_argument on malformed input.
std::vector<std::uint8_t> base64_decode(std::string_view text);

/// JSON checkpoint: model shape metadata, parameters keyed "layer{i}.{param}" as
/// base64 little-endian float64 arrays, and the effective shape parameters in
/// plain numbers.
std::string checkpoint_to_json(NodeClassifier& model);
NodeClassifier checkpoint_from_json(std::string_view text);

void save_checkpoint(NodeClassifier& model, const std::filesystem::path& file);
NodeClassifier load_checkpoint(const std::filesystem::path& file);

/// One "layer{i} {name} {value}" line per effective shape parameter.
std::string learned_params_text(const NodeClassifier& model);

}  // namespace polyfilter
