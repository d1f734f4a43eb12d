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

#ifndef NFMPPI_SCENARIO_HPP_
#define NFMPPI_SCENARIO_HPP_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "nfmppi/costs.hpp"
#include "nfmppi/dynamics.hpp"
#include "nfmppi/path.hpp"

namespace nfmppi {

// Traffic participant driving along its lane (the road path displaced by
// `lateral_offset`) at constant speed.
struct TrafficVehicle {
  double station = 0.0;         // arc length along the lane at t = 0 [m]
  double lateral_offset = 0.0;  // lane offset from the road path, left positive [m]
  double speed = 0.0;           // [m/s], 0 for parked vehicles

  friend bool operator==(const TrafficVehicle&, const TrafficVehicle&) = default;
};

struct Scenario {
  std::string id;
  LocalPath path;               // local reference path (lane centre)
  double total_distance = 0.0;  // driving distance of interest [m]
  std::vector<TrafficVehicle> traffic;
  double v_des = 0.0;           // [m/s]
  double t_end = 0.0;           // [s]
  VehicleState x0;

  void validate() const;
};

// Pose of a vehicle at time t on a precomputed lane polyline.
TrafficPose traffic_pose(const TrafficVehicle& vehicle, const LocalPath& lane,
                         double t);

// Poses at t0 + dt, ..., t0 + count * dt, aligned with rollout states.
TrafficPrediction traffic_trajectory(const TrafficVehicle& vehicle,
                                     const LocalPath& lane, double t0,
                                     int count, double dt);

// Lane polyline of `vehicle` derived from the road path.
LocalPath lane_of(const TrafficVehicle& vehicle, const LocalPath& road);

// Synthetic road: straight start, a left and a right curve, straight end;
// sampled every `spacing` metres.
LocalPath make_road(double length, double spacing = 1.0);

// Built-in replicas. Variant in {1, 2, 3}.
Scenario build_static_scenario(int variant);
Scenario build_dynamic_scenario(int variant);

// "static:<v>" or "dynamic:<v>".
Scenario builtin_scenario(std::string_view id);

// JSON scenario files (comments allowed on load).
std::string scenario_to_json(const Scenario& s);
Scenario scenario_from_json(std::string_view text);
void save_scenario(const Scenario& s, const std::filesystem::path& path);
Scenario load_scenario(const std::filesystem::path& path);

}  // namespace nfmppi

#endif  // NFMPPI_SCENARIO_HPP_
