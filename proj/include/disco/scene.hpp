#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "disco/types.hpp"

namespace disco {

enum class ConfigType { Random, Living, Meeting };

std::string to_string(ConfigType type);
ConfigType parse_config_type(const std::string& text);

inline constexpr std::size_t kNodes = 4;
inline constexpr std::size_t kMicsPerNode = 4;
inline constexpr double kMicRadius = 0.05;

/// Meeting-room table; `center[2]` is the table height.
struct Table {
  Vec3 center{};
  double radius = 0.0;

  friend bool operator==(const Table&, const Table&) = default;
};

/// Geometry and acoustics of one simulated trial. The seed regenerates
/// everything derived from it (noise offset and the sampled geometry).
struct SceneDescriptor {
  std::string scene_id;
  ConfigType config_type = ConfigType::Random;
  Vec3 room_dims{};
  double rt60 = 0.0;
  std::vector<Vec3> node_centers;
  std::vector<std::vector<Vec3>> mic_positions;  // [node][mic]
  Vec3 target_position{};
  Vec3 noise_position{};
  double noise_gain_db = 0.0;
  std::uint64_t rng_seed = 0;
  std::string speech_path;
  std::string noise_path;
  std::optional<Table> table;  // meeting config only

  friend bool operator==(const SceneDescriptor&, const SceneDescriptor&) = default;
};

/// Every violated constraint, as short human-readable strings that start
/// with a stable keyword ("node count", "wall distance", ...). Empty if valid.
std::vector<std::string> scene_violations(const SceneDescriptor& scene);

/// Throws Validation listing every violated constraint.
void validate_scene(const SceneDescriptor& scene);

/// Horizontal distance from `p` to the nearest of the four walls.
double wall_distance(const Vec3& p, const Vec3& room_dims);

std::string scene_to_json(const SceneDescriptor& scene);
SceneDescriptor scene_from_json(const std::string& text);

void write_scene(const SceneDescriptor& scene, const std::filesystem::path& path);
/// Parses and re-validates.
SceneDescriptor read_scene(const std::filesystem::path& path);

}  // namespace disco
