#include "billiard/table_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace billiard {

TableConfig parse_table_config(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw BadConfig(std::string("table config: ") + e.what());
  }
  TableConfig cfg;
  if (!j.contains("scatterers") || !j["scatterers"].is_array())
    throw BadConfig("table config: missing scatterers array");
  for (const auto& s : j["scatterers"]) {
    ScattererSpec spec;
    spec.center = {s.at("center").at(0).get<double>(),
                   s.at("center").at(1).get<double>()};
    spec.radius = s.at("radius").get<double>();
    cfg.scatterers.push_back(spec);
  }
  if (j.contains("horizon_scan")) {
    const auto& h = j["horizon_scan"];
    if (h.contains("angular_step"))
      cfg.horizon_scan.angular_step = h["angular_step"].get<double>();
    if (h.contains("offset_step"))
      cfg.horizon_scan.offset_step = h["offset_step"].get<double>();
    if (h.contains("lift_radius"))
      cfg.horizon_scan.lift_radius = h["lift_radius"].get<double>();
  }
  return cfg;
}

TableConfig load_table_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw BadConfig("table config: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_table_config(buf.str());
}

std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t seed) {
  std::uint64_t h = seed;
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t table_config_hash(const TableConfig& config) {
  std::uint64_t h = 1469598103934665603ull;
  for (const ScattererSpec& s : config.scatterers) {
    h = fnv1a(&s.center.x, sizeof(double), h);
    h = fnv1a(&s.center.y, sizeof(double), h);
    h = fnv1a(&s.radius, sizeof(double), h);
  }
  h = fnv1a(&config.horizon_scan.angular_step, sizeof(double), h);
  h = fnv1a(&config.horizon_scan.offset_step, sizeof(double), h);
  h = fnv1a(&config.horizon_scan.lift_radius, sizeof(double), h);
  return h;
}

}  // namespace billiard
