// Copyright 2026 The nfmppi Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "nfmppi/scenario.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "nfmppi/error.hpp"

namespace nfmppi {

namespace {

using nlohmann::json;

constexpr double kRoadLength = 420.0;
constexpr int kFormatVersion = 1;

// Curvature of the synthetic road as a function of arc length.
double road_curvature(double s) {
  constexpr double kRadius = 120.0;
  if (s >= 30.0 && s < 100.0) return 1.0 / kRadius;
  if (s >= 140.0 && s < 210.0) return -1.0 / kRadius;
  return 0.0;
}

void check_variant(int variant) {
  if (variant < 1 || variant > 3) {
    throw InvalidArgument("scenario variant must be 1, 2 or 3");
  }
}

template <typename T>
T required(const json& j, const char* key, const char* where) {
  if (!j.is_object() || !j.contains(key)) {
    throw FormatError(std::string("scenario: missing field '") + key + "' in " +
                      where);
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("scenario: bad field '") + key + "' in " +
                      where + ": " + e.what());
  }
}

}  // namespace

void Scenario::validate() const {
  if (!(t_end > 0.0)) throw InvalidArgument("scenario: t_end must be > 0");
  if (!(v_des >= 0.0)) throw InvalidArgument("scenario: v_des must be >= 0");
  if (path.waypoints().size() < 2) {
    throw InvalidArgument("scenario: path needs at least two waypoints");
  }
  if (path.length() < total_distance) {
    throw InvalidArgument("scenario: path shorter than total_distance");
  }
  if (!x0.is_finite()) throw InvalidArgument("scenario: non-finite x0");
  for (const auto& v : traffic) {
    if (!(v.speed >= 0.0)) {
      throw InvalidArgument("scenario: traffic speed must be >= 0");
    }
  }
}

LocalPath lane_of(const TrafficVehicle& vehicle, const LocalPath& road) {
  if (vehicle.lateral_offset == 0.0) return road;
  return road.offset_by(vehicle.lateral_offset);
}

TrafficPose traffic_pose(const TrafficVehicle& vehicle, const LocalPath& lane,
                         double t) {
  const double s = vehicle.station + vehicle.speed * t;
  const Eigen::Vector2d p = lane.point_at(s);
  return {p.x(), p.y(), lane.heading_at(s)};
}

TrafficPrediction traffic_trajectory(const TrafficVehicle& vehicle,
                                     const LocalPath& lane, double t0,
                                     int count, double dt) {
  TrafficPrediction out;
  out.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int i = 1; i <= count; ++i) {
    out.push_back(traffic_pose(vehicle, lane, t0 + i * dt));
  }
  return out;
}

LocalPath make_road(double length, double spacing) {
  if (!(length > 0.0) || !(spacing > 0.0)) {
    throw InvalidArgument("make_road: length and spacing must be positive");
  }
  const auto n = static_cast<int>(std::ceil(length / spacing));
  std::vector<Eigen::Vector2d> pts;
  pts.reserve(static_cast<std::size_t>(n) + 1);
  Eigen::Vector2d p = Eigen::Vector2d::Zero();
  double heading = 0.0;
  pts.push_back(p);
  // Midpoint heading integration keeps segment lengths exactly `spacing`.
  for (int i = 0; i < n; ++i) {
    const double s = i * spacing;
    const double mid_heading = heading + 0.5 * spacing * road_curvature(s);
    p += spacing * Eigen::Vector2d(std::cos(mid_heading), std::sin(mid_heading));
    heading += spacing * road_curvature(s);
    pts.push_back(p);
  }
  return LocalPath(std::move(pts));
}

Scenario build_static_scenario(int variant) {
  check_variant(variant);
  constexpr std::array<double, 3> kVDes = {6.0, 8.0, 10.0};
  constexpr std::array<double, 3> kTEnd = {45.0, 35.0, 28.0};
  Scenario s;
  s.id = "static:" + std::to_string(variant);
  s.path = make_road(kRoadLength);
  s.total_distance = 250.0;
  s.v_des = kVDes[static_cast<std::size_t>(variant - 1)];
  s.t_end = kTEnd[static_cast<std::size_t>(variant - 1)];
  s.x0 = VehicleState{};
  // Parked vehicles alternately left and right of the lane centre.
  s.traffic = {
      {45.0, 1.5, 0.0},
      {95.0, -1.5, 0.0},
      {145.0, 1.5, 0.0},
      {195.0, -1.5, 0.0},
  };
  return s;
}

Scenario build_dynamic_scenario(int variant) {
  check_variant(variant);
  constexpr std::array<double, 3> kVDes = {8.0, 10.0, 10.0};
  constexpr std::array<double, 3> kTEnd = {30.0, 18.0, 18.0};
  constexpr std::array<std::array<double, 2>, 3> kTrafficSpeed = {
      {{4.0, 5.0}, {4.0, 5.0}, {5.0, 6.0}}};
  const auto i = static_cast<std::size_t>(variant - 1);
  Scenario s;
  s.id = "dynamic:" + std::to_string(variant);
  s.path = make_road(kRoadLength);
  s.total_distance = 130.0;
  s.v_des = kVDes[i];
  s.t_end = kTEnd[i];
  s.x0 = VehicleState{};
  s.traffic = {
      {20.0, -1.0, kTrafficSpeed[i][0]},
      {45.0, 1.0, kTrafficSpeed[i][1]},
  };
  return s;
}

Scenario builtin_scenario(std::string_view id) {
  const auto colon = id.find(':');
  if (colon == std::string_view::npos || colon + 1 >= id.size()) {
    throw InvalidArgument("builtin scenario id must look like static:1");
  }
  const std::string_view family = id.substr(0, colon);
  const std::string_view rest = id.substr(colon + 1);
  if (rest.size() != 1 || rest[0] < '1' || rest[0] > '3') {
    throw InvalidArgument("builtin scenario variant must be 1, 2 or 3");
  }
  const int variant = rest[0] - '0';
  if (family == "static") return build_static_scenario(variant);
  if (family == "dynamic") return build_dynamic_scenario(variant);
  throw InvalidArgument("unknown scenario family '" + std::string(family) + "'");
}

std::string scenario_to_json(const Scenario& s) {
  json j;
  j["format"] = "nfmppi-scenario";
  j["version"] = kFormatVersion;
  j["id"] = s.id;
  j["total_distance"] = s.total_distance;
  j["v_des"] = s.v_des;
  j["t_end"] = s.t_end;
  j["x0"] = {{"s_x", s.x0.s_x}, {"s_y", s.x0.s_y}, {"delta", s.x0.delta},
             {"v", s.x0.v}, {"psi", s.x0.psi}};
  json traffic = json::array();
  for (const auto& v : s.traffic) {
    traffic.push_back({{"station", v.station},
                       {"lateral_offset", v.lateral_offset},
                       {"speed", v.speed}});
  }
  j["traffic"] = std::move(traffic);
  json path = json::array();
  for (const auto& p : s.path.waypoints()) path.push_back({p.x(), p.y()});
  j["path"] = std::move(path);
  return j.dump(2) + "\n";
}

Scenario scenario_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("scenario: invalid JSON: ") + e.what());
  }
  if (required<std::string>(j, "format", "root") != "nfmppi-scenario") {
    throw FormatError("scenario: unexpected format tag");
  }
  if (required<int>(j, "version", "root") != kFormatVersion) {
    throw FormatError("scenario: unsupported version");
  }
  Scenario s;
  s.id = required<std::string>(j, "id", "root");
  s.total_distance = required<double>(j, "total_distance", "root");
  s.v_des = required<double>(j, "v_des", "root");
  s.t_end = required<double>(j, "t_end", "root");
  const json x0 = required<json>(j, "x0", "root");
  s.x0.s_x = required<double>(x0, "s_x", "x0");
  s.x0.s_y = required<double>(x0, "s_y", "x0");
  s.x0.delta = required<double>(x0, "delta", "x0");
  s.x0.v = required<double>(x0, "v", "x0");
  s.x0.psi = required<double>(x0, "psi", "x0");
  for (const json& v : required<json>(j, "traffic", "root")) {
    s.traffic.push_back({required<double>(v, "station", "traffic"),
                         required<double>(v, "lateral_offset", "traffic"),
                         required<double>(v, "speed", "traffic")});
  }
  std::vector<Eigen::Vector2d> pts;
  for (const json& p : required<json>(j, "path", "root")) {
    if (!p.is_array() || p.size() != 2) {
      throw FormatError("scenario: path entries must be [x, y] pairs");
    }
    pts.emplace_back(p[0].get<double>(), p[1].get<double>());
  }
  try {
    s.path = LocalPath(std::move(pts));
    s.validate();
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("scenario: ") + e.what());
  }
  return s;
}

void save_scenario(const Scenario& s, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << scenario_to_json(s);
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open scenario " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return scenario_from_json(buf.str());
}

}  // namespace nfmppi
