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

#ifndef NFMPPI_COSTS_HPP_
#define NFMPPI_COSTS_HPP_

#include <array>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "nfmppi/dynamics.hpp"
#include "nfmppi/path.hpp"

namespace nfmppi {

inline constexpr int kNumCostTerms = 5;

struct CostWeights {
  // Scaling of c1 (speed), c2 (terminal), c3 (input smoothness), c4 (path),
  // c5 (traffic).
  std::array<double, kNumCostTerms> alpha{0.5, 10.0, 0.06, 1.0, 4.5};

  void validate() const;
};

struct EllipseParams {
  double a_e = 6.0;       // longitudinal semi-axis [m]
  double b_e = 2.0;       // lateral semi-axis [m]
  double d_floor = 1e-3;  // lower bound on the scaled distance

  void validate() const;
};

struct TrafficPose {
  double s_x = 0.0;
  double s_y = 0.0;
  double psi = 0.0;
};

// Predicted poses of one traffic vehicle, aligned with rollout states
// x_1 .. x_N.
using TrafficPrediction = std::vector<TrafficPose>;

// c1 = sum_i (v_i - v_des)^2
double velocity_cost(std::span<const VehicleState> states, double v_des);

// c2 = || p_N - goal ||
double terminal_cost(std::span<const VehicleState> states,
                     const Eigen::Vector2d& goal);

// c3 = sum_i (v_delta_{i+1} - v_delta_i)^2 + (a_{i+1} - a_i)^2
double smoothness_cost(const InputTrajectory& inputs);

// Signed lateral offset of `point` to the path (positive left).
double project_to_path(const Eigen::Vector2d& point, const LocalPath& path);

// c4 = sum_i tau_i^2. The first state is projected exactly (or locally
// around `hint` when hint >= 0); later states use hinted local projection.
double path_cost(std::span<const VehicleState> states, const LocalPath& path,
                 int hint = -1);

// World-frame difference ego - traffic rotated into the traffic frame.
Eigen::Vector2d traffic_frame_offset(const Eigen::Vector2d& ego,
                                     const TrafficPose& traffic);

// d_e = (dx / a_e)^2 + (dy / b_e)^2 in the traffic frame.
double scaled_distance(const Eigen::Vector2d& ego, const TrafficPose& traffic,
                       const EllipseParams& e);

// c5 = sum_i sum_vehicles 1 / max(d_e, d_floor)^2
double traffic_cost(std::span<const VehicleState> states,
                    std::span<const TrafficPrediction> traffic,
                    const EllipseParams& e);

struct CostContext {
  const LocalPath* path = nullptr;
  int path_hint = -1;  // segment near the ego vehicle, -1 if unknown
  Eigen::Vector2d goal = Eigen::Vector2d::Zero();
  double v_des = 0.0;
  std::vector<TrafficPrediction> traffic;
  CostWeights weights;
  EllipseParams ellipse;
};

struct CostBreakdown {
  std::array<double, kNumCostTerms> terms{};  // unweighted c1..c5
  double total = 0.0;                         // sum_i alpha_i c_i

  std::array<double, kNumCostTerms> weighted(const CostWeights& w) const;
};

CostBreakdown total_cost(std::span<const VehicleState> states,
                         const InputTrajectory& inputs, const CostContext& ctx);

}  // namespace nfmppi

#endif  // NFMPPI_COSTS_HPP_
