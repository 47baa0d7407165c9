#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "hug/data.hpp"
#include "hug/inference.hpp"
#include "hug/model.hpp"
#include "hug/sampler.hpp"

namespace hug {

/// Invalid or inconsistent configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses the TOML subset used by run configs (tables, dotted table headers,
/// strings, numbers, booleans, possibly nested arrays) into a JSON object.
nlohmann::json parse_toml(std::string_view text);
nlohmann::json load_toml(const std::filesystem::path& path);
std::string to_toml(const nlohmann::json& config);

enum class Preset { Paper, Desk };

struct ClusterConfig {
  std::vector<std::size_t> k_per_plane;  // empty: skip sequential k-means
  std::size_t k_global = 4;
  std::size_t k_min = 5;
  std::size_t k_max = 9;
  std::size_t top = 4;
  PlaneOrder plane_order = PlaneOrder::Random;
  std::uint64_t seed = 1;
};

/// Everything a run needs; a config file plus flags fully determines it.
struct RunConfig {
  std::optional<std::filesystem::path> data_path;
  std::optional<SyntheticSpec> synthetic;
  std::optional<std::vector<double>> margins;
  ModelParams model;  // only r is used; the weights come from the prior
  ThetaPrior prior;
  SamplerConfig sampler;
  AnnealingSchedule schedule = AnnealingSchedule::paper();
  Preset preset = Preset::Paper;
  double cell_length = 0.02;
  double level = 0.5;
  std::uint64_t seed = 1;
  std::size_t chains = 1;
  ClusterConfig cluster;

  static RunConfig defaults(Preset preset);
  /// Applies the keys present in `doc` on top of the preset it names (or `fallback`).
  static RunConfig from_json(const nlohmann::json& doc, Preset fallback = Preset::Paper);
  nlohmann::json to_json() const;
  void validate() const;
};

Preset parse_preset(std::string_view name);
std::string_view preset_name(Preset p);

}  // namespace hug
