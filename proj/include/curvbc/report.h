#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace curvbc {

/// Tool version recorded in every output header.
std::string_view version();

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);

/// "curvbc <version> config_hash=<16 hex digits> seed=<n>" (without the comment marker).
std::string provenance_line(std::uint64_t config_hash, std::uint64_t seed);

///
/// Writes `body` to `path` after the comment line "# " + provenance. Parent directories are
/// created. Throws IoError on failure.
///
void write_output_file(const std::filesystem::path& path, const std::string& provenance, const std::string& body);

/// Directory for outputs: $CURVBC_OUT if set, else the current directory.
std::filesystem::path default_output_dir();

} // namespace curvbc
