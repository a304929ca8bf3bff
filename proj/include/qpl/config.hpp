#ifndef QPL_CONFIG_HPP
#define QPL_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "qpl/geometry.hpp"
#include "qpl/potential.hpp"

namespace qpl {

/// Invalid run configuration; the message names the offending field.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& msg) : std::invalid_argument(msg) {}
};

struct AngleSpec {
  enum class Kind { radians, magic, w };
  Kind kind = Kind::w;
  double radians = 0.0;
  int m = 2;
  int n = 1;
  int sign = 1;
  /// w in (0, 1); "golden" in config files means (sqrt(5) - 1) / 2, the default.
  double w = 0.61803398874989484820;
};

struct LayerSpec {
  /// "three_cosine", "orbits" (explicit spec) or "random".
  std::string kind = "three_cosine";
  PotentialSpec spec;
  std::uint64_t seed = 1;
  int random_orbits = 3;
};

struct RunConfig {
  LayerSpec layer;
  AngleSpec angle;
  Vec2 shift;
  Superposition superposition = Superposition::linear;
  double lambda = 0.0;

  std::size_t torus_resolution = 512;
  std::vector<double> half_widths{32.0, 64.0, 128.0};
  std::size_t window_resolution = 4096;
  Vec2 center;

  /// Render levels; empty means "the measured critical level".
  std::vector<double> levels;
  /// Scaling schedule |c - c0| = r0 * ratio^j.
  double schedule_r0 = 1.0;
  double schedule_ratio = 0.5;
  int schedule_count = 7;
  bool both_sides = true;
  std::optional<double> c0;
  double epsilon = 0.2;

  std::optional<double> tolerance;
  int depth = 3;
  int trials = 20;
  int shift_grid = 5;
  int max_m = 5;
  std::uint64_t seed = 20240601;
  std::string output_dir = ".";
};

/// Validates every field; throws ConfigError with the field path on the first problem.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);
nlohmann::json config_to_json(const RunConfig& c);
void validate(const RunConfig& c);

double resolve_alpha(const AngleSpec& a, double period);
/// Exact magic angle when the spec names one.
std::optional<MagicAngle> resolve_magic(const AngleSpec& a, double period);

SymmetricPotential build_layer(const LayerSpec& spec);
BilayerPotential build_bilayer(const RunConfig& c);

}  // namespace qpl

#endif  // QPL_CONFIG_HPP
