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

#include "nfmppi/costs.hpp"

#include <cmath>

#include "nfmppi/error.hpp"

namespace nfmppi {

void CostWeights::validate() const {
  for (double a : alpha) {
    if (!(a >= 0.0) || !std::isfinite(a)) {
      throw InvalidArgument("cost weights must be finite and non-negative");
    }
  }
}

void EllipseParams::validate() const {
  if (!(a_e > 0.0) || !(b_e > 0.0) || !(d_floor > 0.0)) {
    throw InvalidArgument("ellipse parameters must be positive");
  }
}

double velocity_cost(std::span<const VehicleState> states, double v_des) {
  double c = 0.0;
  for (const auto& x : states) {
    const double e = x.v - v_des;
    c += e * e;
  }
  return c;
}

double terminal_cost(std::span<const VehicleState> states,
                     const Eigen::Vector2d& goal) {
  if (states.empty()) throw InvalidArgument("terminal_cost: empty trajectory");
  const auto& last = states.back();
  return std::hypot(last.s_x - goal.x(), last.s_y - goal.y());
}

double smoothness_cost(const InputTrajectory& inputs) {
  if (inputs.rows() < 2) return 0.0;
  const auto n = inputs.rows();
  return (inputs.bottomRows(n - 1) - inputs.topRows(n - 1)).squaredNorm();
}

double project_to_path(const Eigen::Vector2d& point, const LocalPath& path) {
  return path.project(point).offset;
}

double path_cost(std::span<const VehicleState> states, const LocalPath& path,
                 int hint) {
  if (states.empty()) return 0.0;
  double c = 0.0;
  const Eigen::Vector2d first(states[0].s_x, states[0].s_y);
  PathProjection proj =
      hint < 0 ? path.project(first) : path.project_near(first, hint);
  c += proj.offset * proj.offset;
  for (std::size_t i = 1; i < states.size(); ++i) {
    proj = path.project_near({states[i].s_x, states[i].s_y}, proj.segment);
    c += proj.offset * proj.offset;
  }
  return c;
}

Eigen::Vector2d traffic_frame_offset(const Eigen::Vector2d& ego,
                                     const TrafficPose& traffic) {
  const double dx = ego.x() - traffic.s_x;
  const double dy = ego.y() - traffic.s_y;
  const double c = std::cos(traffic.psi);
  const double s = std::sin(traffic.psi);
  return {c * dx + s * dy, -s * dx + c * dy};
}

double scaled_distance(const Eigen::Vector2d& ego, const TrafficPose& traffic,
                       const EllipseParams& e) {
  const Eigen::Vector2d d = traffic_frame_offset(ego, traffic);
  const double lon = d.x() / e.a_e;
  const double lat = d.y() / e.b_e;
  return lon * lon + lat * lat;
}

double traffic_cost(std::span<const VehicleState> states,
                    std::span<const TrafficPrediction> traffic,
                    const EllipseParams& e) {
  double c = 0.0;
  for (const auto& vehicle : traffic) {
    if (vehicle.size() < states.size()) {
      throw InvalidArgument("traffic_cost: prediction shorter than trajectory");
    }
    for (std::size_t i = 0; i < states.size(); ++i) {
      const double d = std::max(
          scaled_distance({states[i].s_x, states[i].s_y}, vehicle[i], e),
          e.d_floor);
      c += 1.0 / (d * d);
    }
  }
  return c;
}

std::array<double, kNumCostTerms> CostBreakdown::weighted(
    const CostWeights& w) const {
  std::array<double, kNumCostTerms> out{};
  for (int i = 0; i < kNumCostTerms; ++i) {
    out[static_cast<std::size_t>(i)] =
        w.alpha[static_cast<std::size_t>(i)] * terms[static_cast<std::size_t>(i)];
  }
  return out;
}

CostBreakdown total_cost(std::span<const VehicleState> states,
                         const InputTrajectory& inputs, const CostContext& ctx) {
  if (ctx.path == nullptr) throw InvalidArgument("total_cost: missing path");
  CostBreakdown out;
  out.terms[0] = velocity_cost(states, ctx.v_des);
  out.terms[1] = terminal_cost(states, ctx.goal);
  out.terms[2] = smoothness_cost(inputs);
  out.terms[3] = path_cost(states, *ctx.path, ctx.path_hint);
  out.terms[4] = traffic_cost(states, ctx.traffic, ctx.ellipse);
  for (int i = 0; i < kNumCostTerms; ++i) {
    out.total += ctx.weights.alpha[static_cast<std::size_t>(i)] *
                 out.terms[static_cast<std::size_t>(i)];
  }
  return out;
}

}  // namespace nfmppi
