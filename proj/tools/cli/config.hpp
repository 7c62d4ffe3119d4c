#pragma once

// Scenario configuration files (YAML). Unknown keys are rejected and every
// diagnostic names the offending field and line.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "mobius_mono/monotonicity.hpp"

namespace mobius_mono::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct WordEntry {
  std::string type;  // sphere | plane | named_sigma_a | named_phi_a
  VecN center;
  double radius = 0.0;
  VecN normal;
  double offset = 0.0;
  VecN a;
};

struct SurfaceConfig {
  std::string kind;
  // flat_disk
  VecN point;
  std::vector<VecN> frame;
  double extent = 1.0;
  // catenoid / helicoid / round_sphere
  double scale = 1.0;
  double pitch = 1.0;
  double radius = 1.0;
  std::optional<ParamBox> domain;
  std::vector<Hyperplane> mirrors;
};

struct Checks {
  bool volume_identity = true;
  bool weighted_identity = true;
  bool flux = false;
  bool coarea = false;
  bool gradient = false;
  bool divW = false;
  bool prescribed_point = false;
};

struct Config {
  std::string source;
  int n = 0;
  std::vector<WordEntry> word;
  std::optional<SurfaceConfig> surface;
  std::vector<double> radii;
  std::optional<double> r_max;
  QuadratureSettings quadrature;
  Checks checks;
  YAML::Node document;
};

/// Parses and validates a configuration file. Throws ConfigError.
Config load_config(const std::string& path);
Config parse_config(const std::string& text, const std::string& source = "<string>");

/// Reflection word described by the config (named maps expanded).
std::vector<Reflection> build_word(const Config& cfg);
MobiusMap build_map(const Config& cfg);
ParametricPatch build_patch(const Config& cfg);

/// Scenario for the configured map, patch and radius range. A single sphere
/// word gives a reflection scenario. Throws ConfigError for radii beyond
/// 0.99|b| and mobius_mono::Error for violated mathematical preconditions.
Scenario build_scenario(const Config& cfg);

}  // namespace mobius_mono::cli
