#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace fdpburst::cli {

/// Lower-case hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view bytes);

struct ManifestInput {
  std::string command;
  std::vector<std::string> argv;
  std::string config_json;  // empty if the command has no config
  std::uint64_t seed = 0;
  bool has_seed = false;
  std::vector<std::string> files;  // names relative to the output directory
};

/// Writes <dir>/manifest.json: tool version, arguments, config echo, seed,
/// a UTC timestamp, and size plus SHA-256 for every listed file.
void write_manifest(const std::filesystem::path& dir, const ManifestInput& in);

}  // namespace fdpburst::cli
