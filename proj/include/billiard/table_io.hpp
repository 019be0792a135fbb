#pragma once

#include <string>

#include "billiard/geometry.hpp"

namespace billiard {

struct TableConfig {
  std::vector<ScattererSpec> scatterers;
  HorizonScanParams horizon_scan;
};

/// Reads a table config:
/// { "scatterers": [{"center": [x, y], "radius": r}, ...],
///   "horizon_scan": {"angular_step": a, "offset_step": o, "lift_radius": l} }
TableConfig load_table_config(const std::string& path);
TableConfig parse_table_config(const std::string& json_text);

/// Stable hash of the geometric content (used to key trie caches and reports).
std::uint64_t table_config_hash(const TableConfig& config);

/// FNV-1a over arbitrary bytes; the project-wide content hash.
std::uint64_t fnv1a(const void* data, std::size_t size,
                    std::uint64_t seed = 1469598103934665603ull);

}  // namespace billiard
