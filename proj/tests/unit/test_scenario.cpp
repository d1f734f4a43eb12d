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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include <unistd.h>

#include "nfmppi/error.hpp"
#include "nfmppi/scenario.hpp"

namespace nfmppi {
namespace {

// Centre line of the built-in road by fine integration of its curvature
// profile: left arc of radius 120 m on [30, 100), right arc on [140, 210).
Eigen::Vector3d road_oracle(double station) {
  const double ds = 1e-3;
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
  auto kappa = [](double s) {
    if (s >= 30.0 && s < 100.0) return 1.0 / 120.0;
    if (s >= 140.0 && s < 210.0) return -1.0 / 120.0;
    return 0.0;
  };
  const auto steps = static_cast<long>(std::llround(station / ds));
  for (long i = 0; i < steps; ++i) {
    const double s = i * ds;
    const double mid = heading + 0.5 * ds * kappa(s);
    x += ds * std::cos(mid);
    y += ds * std::sin(mid);
    heading += ds * kappa(s);
  }
  return {x, y, heading};
}

TEST(TrafficPose, ParkedVehicleDoesNotMove) {
  const LocalPath road = make_road(420.0);
  const TrafficVehicle v{45.0, 1.5, 0.0};
  const TrafficPrediction p = traffic_trajectory(v, lane_of(v, road), 2.0, 80, 0.1);
  ASSERT_EQ(p.size(), 80u);
  for (const auto& q : p) {
    EXPECT_EQ(q.s_x, p.front().s_x);
    EXPECT_EQ(q.s_y, p.front().s_y);
    EXPECT_EQ(q.psi, p.front().psi);
  }
}

TEST(TrafficPose, StraightLaneAdvancesBySpeedTimesDt) {
  const LocalPath lane({{0.0, 0.0}, {100.0, 0.0}});
  const TrafficVehicle v{10.0, 0.0, 4.0};
  const TrafficPrediction p = traffic_trajectory(v, lane, 0.0, 50, 0.1);
  for (int i = 0; i < 50; ++i) {
    EXPECT_NEAR(p[static_cast<std::size_t>(i)].s_x, 10.0 + 0.4 * (i + 1), 1e-12);
    EXPECT_EQ(p[static_cast<std::size_t>(i)].s_y, 0.0);
    EXPECT_EQ(p[static_cast<std::size_t>(i)].psi, 0.0);
  }
}

TEST(TrafficPose, CurvedLaneMatchesArcLengthOracle) {
  const LocalPath road = make_road(420.0);
  const TrafficVehicle v{20.0, 0.0, 5.0};
  for (double t : {0.0, 3.3, 8.0, 16.1, 25.0, 37.7}) {
    const TrafficPose q = traffic_pose(v, road, t);
    const Eigen::Vector3d o = road_oracle(20.0 + 5.0 * t);
    EXPECT_NEAR(q.s_x, o.x(), 5e-3) << "t " << t;
    EXPECT_NEAR(q.s_y, o.y(), 5e-3) << "t " << t;
    // Segment headings lag the continuous heading by at most one segment.
    EXPECT_NEAR(q.psi, o.z(), 1.0 / 120.0 + 1e-9) << "t " << t;
  }
}

TEST(Builtins, StaticVariants) {
  const Scenario s1 = build_static_scenario(1);
  EXPECT_EQ(s1.v_des, 6.0);
  EXPECT_EQ(s1.t_end, 45.0);
  EXPECT_EQ(s1.traffic.size(), 4u);
  for (const auto& v : s1.traffic) EXPECT_EQ(v.speed, 0.0);
  const Scenario s3 = build_static_scenario(3);
  EXPECT_EQ(s3.v_des, 10.0);
  EXPECT_EQ(s3.t_end, 28.0);
  EXPECT_EQ(builtin_scenario("static:1").id, "static:1");
  EXPECT_NO_THROW(s1.validate());
}

TEST(Builtins, DynamicVariants) {
  const Scenario d1 = build_dynamic_scenario(1);
  EXPECT_EQ(d1.traffic.size(), 2u);
  const Scenario d2 = build_dynamic_scenario(2);
  EXPECT_EQ(d2.traffic[0].speed, 4.0);
  EXPECT_EQ(d2.traffic[1].speed, 5.0);
  EXPECT_EQ(d2.t_end, 18.0);
  const Scenario d3 = build_dynamic_scenario(3);
  EXPECT_EQ(d3.traffic[0].speed, 5.0);
  EXPECT_EQ(d3.traffic[1].speed, 6.0);
}

TEST(Builtins, RejectsUnknownIds) {
  EXPECT_THROW(builtin_scenario("static:4"), InvalidArgument);
  EXPECT_THROW(builtin_scenario("highway:1"), InvalidArgument);
  EXPECT_THROW(builtin_scenario("static"), InvalidArgument);
  EXPECT_THROW(build_dynamic_scenario(0), InvalidArgument);
}

TEST(ScenarioJson, RoundTripAndExport) {
  for (const char* id : {"static:1", "static:2", "dynamic:1", "dynamic:3"}) {
    const Scenario s = builtin_scenario(id);
    const std::string text = scenario_to_json(s);
    const Scenario back = scenario_from_json(text);
    EXPECT_EQ(back.id, s.id);
    EXPECT_EQ(back.traffic, s.traffic);
    EXPECT_EQ(back.x0, s.x0);
    EXPECT_EQ(back.v_des, s.v_des);
    EXPECT_EQ(back.t_end, s.t_end);
    EXPECT_EQ(back.path.waypoints(), s.path.waypoints());
    EXPECT_EQ(scenario_to_json(back), text);
  }
}

TEST(ScenarioJson, MissingFieldIsTypedError) {
  std::string text = scenario_to_json(build_static_scenario(1));
  const auto pos = text.find("\"v_des\"");
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, 7, "\"v_xxx\"");
  try {
    scenario_from_json(text);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("v_des"), std::string::npos);
  }
  EXPECT_THROW(scenario_from_json("{"), FormatError);
  EXPECT_THROW(scenario_from_json(R"({"format":"other","version":1})"), FormatError);
}

TEST(ScenarioJson, CommentsAndFiles) {
  const std::string text = R"(// short test road
{
  "format": "nfmppi-scenario", "version": 1, "id": "tiny",
  "total_distance": 50, "v_des": 5, "t_end": 3,
  "x0": {"s_x": 0, "s_y": 0, "delta": 0, "v": 0, "psi": 0},
  /* one parked car */
  "traffic": [{"station": 20, "lateral_offset": 1.0, "speed": 0}],
  "path": [[0, 0], [60, 0]]
})";
  const Scenario s = scenario_from_json(text);
  EXPECT_EQ(s.id, "tiny");
  EXPECT_EQ(s.path.length(), 60.0);
  const auto path = std::filesystem::temp_directory_path() /
                    ("nfmppi_scenario_" + std::to_string(::getpid()) + ".json");
  save_scenario(s, path);
  EXPECT_EQ(load_scenario(path).traffic, s.traffic);
  std::filesystem::remove(path);
  EXPECT_THROW(load_scenario(path), Error);
}

TEST(ScenarioJson, InvalidContentIsRejected) {
  Scenario s = build_static_scenario(1);
  s.total_distance = 1e6;
  EXPECT_THROW(scenario_from_json(scenario_to_json(s)), FormatError);
}

}  // namespace
}  // namespace nfmppi
