#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "valp/core.hpp"

namespace valp {

struct SynthesisConfig;

nlohmann::json graph_to_json(const ModelGraph& graph);
ModelGraph graph_from_json(const nlohmann::json& doc);

nlohmann::json synthesis_config_to_json(const SynthesisConfig& cfg);
/// Reads the `synthesis` key of a graph-family document; absent fields keep
/// their defaults.
SynthesisConfig synthesis_config_from_json(const nlohmann::json& doc);

/// Two-space indented JSON text with a trailing newline.
std::string dump_graph(const ModelGraph& graph);
ModelGraph parse_graph(const std::string& text);

void save_graph(const ModelGraph& graph, const std::filesystem::path& path);
ModelGraph load_graph(const std::filesystem::path& path);

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace valp
