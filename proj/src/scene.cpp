#include "disco/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "disco/error.hpp"
#include "file_util.hpp"

namespace disco {
namespace {

using nlohmann::json;

constexpr double kEps = 1e-9;

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(4);
  ss << v;
  return ss.str();
}

bool in_range(double v, double lo, double hi) { return v >= lo - kEps && v <= hi + kEps; }

bool strictly_inside(const Vec3& p, const Vec3& dims) {
  for (int i = 0; i < 3; ++i)
    if (!(p[i] > 0.0 && p[i] < dims[i])) return false;
  return true;
}

double horizontal_distance(const Vec3& a, const Vec3& b) { return std::hypot(a[0] - b[0], a[1] - b[1]); }

struct Checker {
  std::vector<std::string> out;
  void require(bool ok, const std::string& message) {
    if (!ok) out.push_back(message);
  }
};

void check_common(const SceneDescriptor& s, Checker& c) {
  c.require(in_range(s.room_dims[0], 3.0, 8.0), "room dims: length " + fmt(s.room_dims[0]) + " m outside [3,8]");
  c.require(in_range(s.room_dims[1], 3.0, 5.0), "room dims: width " + fmt(s.room_dims[1]) + " m outside [3,5]");
  c.require(in_range(s.room_dims[2], 2.5, 3.0), "room dims: height " + fmt(s.room_dims[2]) + " m outside [2.5,3]");
  c.require(in_range(s.rt60, 0.3, 0.6), "rt60: " + fmt(s.rt60) + " s outside [0.3,0.6]");
  c.require(in_range(s.noise_gain_db, -6.0, 0.0), "noise gain: " + fmt(s.noise_gain_db) + " dB outside [-6,0]");
  c.require(strictly_inside(s.target_position, s.room_dims), "inside room: target source outside the room");
  c.require(strictly_inside(s.noise_position, s.room_dims), "inside room: noise source outside the room");
  for (std::size_t k = 0; k < s.mic_positions.size(); ++k) {
    const auto& mics = s.mic_positions[k];
    c.require(mics.size() == kMicsPerNode, "mic count: node " + std::to_string(k + 1) + " has " +
                                               std::to_string(mics.size()) + " mics, expected 4");
    for (std::size_t m = 0; m < mics.size(); ++m) {
      const std::string who = "node " + std::to_string(k + 1) + " mic " + std::to_string(m + 1);
      c.require(strictly_inside(mics[m], s.room_dims), "inside room: " + who + " outside the room");
      if (k < s.node_centers.size()) {
        const auto& center = s.node_centers[k];
        c.require(std::abs(distance(mics[m], center) - kMicRadius) < 1e-6 && std::abs(mics[m][2] - center[2]) < 1e-6,
                  "mic radius: " + who + " is not on the 5 cm horizontal circle");
      }
    }
  }
}

void check_random(const SceneDescriptor& s, Checker& c) {
  std::vector<std::pair<std::string, Vec3>> all;
  for (std::size_t k = 0; k < s.node_centers.size(); ++k) {
    const auto& p = s.node_centers[k];
    c.require(in_range(p[2], 0.7, 2.0), "node height: node " + std::to_string(k + 1) + " at " + fmt(p[2]) + " m outside [0.7,2]");
    all.emplace_back("node " + std::to_string(k + 1), p);
  }
  for (const auto& [name, p] : {std::pair{"target", s.target_position}, std::pair{"noise", s.noise_position}}) {
    c.require(in_range(p[2], 1.2, 2.0), std::string("source height: ") + name + " at " + fmt(p[2]) + " m outside [1.2,2]");
    all.emplace_back(std::string(name) + " source", p);
  }
  for (const auto& [name, p] : all)
    c.require(wall_distance(p, s.room_dims) >= 0.5 - kEps,
              "wall distance: " + name + " is " + fmt(wall_distance(p, s.room_dims)) + " m from the walls, minimum 0.5");
  for (std::size_t i = 0; i < all.size(); ++i)
    for (std::size_t j = i + 1; j < all.size(); ++j)
      c.require(distance(all[i].second, all[j].second) >= 0.5 - kEps,
                "separation: " + all[i].first + " and " + all[j].first + " are " +
                    fmt(distance(all[i].second, all[j].second)) + " m apart, minimum 0.5");
}

void check_living(const SceneDescriptor& s, Checker& c) {
  const auto& nodes = s.node_centers;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const std::string who = "node " + std::to_string(k + 1);
    c.require(in_range(nodes[k][2], 0.7, 0.95), "node height: " + who + " at " + fmt(nodes[k][2]) + " m outside [0.7,0.95]");
    const double wd = wall_distance(nodes[k], s.room_dims);
    if (k + 1 < kNodes) {
      c.require(wd <= 0.5 + kEps, "wall distance: " + who + " is " + fmt(wd) + " m from the walls, must be within 0.5");
    } else {
      c.require(wd >= 0.5 - kEps, "wall distance: " + who + " is " + fmt(wd) + " m from the walls, minimum 0.5");
      for (std::size_t j = 0; j < k; ++j)
        c.require(distance(nodes[k], nodes[j]) >= 0.5 - kEps,
                  "separation: " + who + " is " + fmt(distance(nodes[k], nodes[j])) + " m from node " +
                      std::to_string(j + 1) + ", minimum 0.5");
    }
    for (std::size_t j = 0; j < k; ++j)
      c.require(distance(nodes[k], nodes[j]) >= 2 * kMicRadius - kEps,
                "node overlap: " + who + " overlaps node " + std::to_string(j + 1));
  }
  for (const auto& [name, p] : {std::pair{"target", s.target_position}, std::pair{"noise", s.noise_position}}) {
    c.require(in_range(p[2], 1.2, 2.0), std::string("source height: ") + name + " at " + fmt(p[2]) + " m outside [1.2,2]");
    c.require(wall_distance(p, s.room_dims) >= 0.5 - kEps,
              std::string("wall distance: ") + name + " source is " + fmt(wall_distance(p, s.room_dims)) +
                  " m from the walls, minimum 0.5");
    for (std::size_t k = 0; k < nodes.size(); ++k)
      c.require(distance(p, nodes[k]) >= 0.5 - kEps, std::string("separation: ") + name + " source is " +
                                                          fmt(distance(p, nodes[k])) + " m from node " +
                                                          std::to_string(k + 1) + ", minimum 0.5");
  }
}

void check_meeting(const SceneDescriptor& s, Checker& c) {
  if (!s.table) {
    c.require(false, "table: meeting scene without a table");
    return;
  }
  const auto& t = *s.table;
  const double r = t.radius;
  c.require(in_range(r, 0.5, 1.0), "table: radius " + fmt(r) + " m outside [0.5,1]");
  c.require(in_range(t.center[2], 0.7, 0.8), "table: height " + fmt(t.center[2]) + " m outside [0.7,0.8]");
  c.require(t.center[0] - r >= -kEps && t.center[0] + r <= s.room_dims[0] + kEps && t.center[1] - r >= -kEps &&
                t.center[1] + r <= s.room_dims[1] + kEps,
            "table: does not fit in the room");
  double first_angle = 0.0;
  for (std::size_t k = 0; k < s.node_centers.size(); ++k) {
    const auto& p = s.node_centers[k];
    const std::string who = "node " + std::to_string(k + 1);
    c.require(std::abs(p[2] - t.center[2]) < 1e-6, "node height: " + who + " is not at table height");
    const double rho = horizontal_distance(p, t.center);
    c.require(in_range(rho, r - 0.20, r - 0.05),
              "node placement: " + who + " is " + fmt(r - rho) + " m inside the table edge, expected [0.05,0.2]");
    const double angle = std::atan2(p[1] - t.center[1], p[0] - t.center[0]);
    if (k == 0) first_angle = angle;
    double diff = std::remainder(angle - first_angle - static_cast<double>(k) * std::numbers::pi / 2, 2 * std::numbers::pi);
    c.require(std::abs(diff) < 1e-6, "node placement: " + who + " is not on the 90 degree layout");
  }
  for (const auto& [name, p] : {std::pair{"target", s.target_position}, std::pair{"noise", s.noise_position}}) {
    c.require(in_range(p[2], 1.15, 1.3), std::string("source height: ") + name + " at " + fmt(p[2]) + " m outside [1.15,1.3]");
    const double rho = horizontal_distance(p, t.center);
    c.require(in_range(rho, r, r + 0.5), std::string("source placement: ") + name + " source is " + fmt(rho - r) +
                                             " m from the table edge, expected within 0.5 outside");
    c.require(wall_distance(p, s.room_dims) >= 0.15 - kEps,
              std::string("wall distance: ") + name + " source is " + fmt(wall_distance(p, s.room_dims)) +
                  " m from the walls, minimum 0.15");
  }
}

json vec(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }

Vec3 to_vec(const json& j) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorKind::Format, "expected a 3-element position array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

std::string to_string(ConfigType type) {
  switch (type) {
    case ConfigType::Random: return "random";
    case ConfigType::Living: return "living";
    case ConfigType::Meeting: return "meeting";
  }
  return "random";
}

ConfigType parse_config_type(const std::string& text) {
  if (text == "random") return ConfigType::Random;
  if (text == "living") return ConfigType::Living;
  if (text == "meeting") return ConfigType::Meeting;
  throw Error(ErrorKind::Config, "unknown scene config '" + text + "'");
}

double wall_distance(const Vec3& p, const Vec3& room_dims) {
  return std::min({p[0], room_dims[0] - p[0], p[1], room_dims[1] - p[1]});
}

std::vector<std::string> scene_violations(const SceneDescriptor& s) {
  Checker c;
  c.require(s.node_centers.size() == kNodes && s.mic_positions.size() == kNodes,
            "node count: " + std::to_string(s.node_centers.size()) + " nodes, expected 4");
  check_common(s, c);
  switch (s.config_type) {
    case ConfigType::Random: check_random(s, c); break;
    case ConfigType::Living: check_living(s, c); break;
    case ConfigType::Meeting: check_meeting(s, c); break;
  }
  return c.out;
}

void validate_scene(const SceneDescriptor& scene) {
  const auto violations = scene_violations(scene);
  if (violations.empty()) return;
  std::string msg = "scene " + scene.scene_id + " (" + to_string(scene.config_type) + "):";
  for (const auto& v : violations) msg += "\n  " + v;
  throw Error(ErrorKind::Validation, msg);
}

std::string scene_to_json(const SceneDescriptor& s) {
  json j;
  j["format"] = "disco-scene/1";
  j["scene_id"] = s.scene_id;
  j["config_type"] = to_string(s.config_type);
  j["room_dims"] = vec(s.room_dims);
  j["rt60"] = s.rt60;
  j["node_centers"] = json::array();
  for (const auto& c : s.node_centers) j["node_centers"].push_back(vec(c));
  j["mic_positions"] = json::array();
  for (const auto& node : s.mic_positions) {
    json mics = json::array();
    for (const auto& m : node) mics.push_back(vec(m));
    j["mic_positions"].push_back(mics);
  }
  j["source_positions"] = {{"target", vec(s.target_position)}, {"noise", vec(s.noise_position)}};
  j["noise_gain_db"] = s.noise_gain_db;
  j["rng_seed"] = s.rng_seed;
  j["speech_path"] = s.speech_path;
  j["noise_path"] = s.noise_path;
  if (s.table) j["table"] = {{"center", vec(s.table->center)}, {"radius", s.table->radius}};
  return j.dump(2) + "\n";
}

SceneDescriptor scene_from_json(const std::string& text) {
  SceneDescriptor s;
  try {
    const json j = json::parse(text);
    s.scene_id = j.at("scene_id").get<std::string>();
    s.config_type = parse_config_type(j.at("config_type").get<std::string>());
    s.room_dims = to_vec(j.at("room_dims"));
    s.rt60 = j.at("rt60").get<double>();
    for (const auto& c : j.at("node_centers")) s.node_centers.push_back(to_vec(c));
    for (const auto& node : j.at("mic_positions")) {
      std::vector<Vec3> mics;
      for (const auto& m : node) mics.push_back(to_vec(m));
      s.mic_positions.push_back(std::move(mics));
    }
    s.target_position = to_vec(j.at("source_positions").at("target"));
    s.noise_position = to_vec(j.at("source_positions").at("noise"));
    s.noise_gain_db = j.at("noise_gain_db").get<double>();
    s.rng_seed = j.at("rng_seed").get<std::uint64_t>();
    s.speech_path = j.at("speech_path").get<std::string>();
    s.noise_path = j.at("noise_path").get<std::string>();
    if (j.contains("table"))
      s.table = Table{to_vec(j["table"].at("center")), j["table"].at("radius").get<double>()};
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Format, std::string("scene JSON: ") + e.what());
  }
  return s;
}

void write_scene(const SceneDescriptor& scene, const std::filesystem::path& path) {
  detail::write_file_atomic(path, scene_to_json(scene));
}

SceneDescriptor read_scene(const std::filesystem::path& path) {
  SceneDescriptor s = scene_from_json(detail::read_file(path));
  validate_scene(s);
  return s;
}

}  // namespace disco
