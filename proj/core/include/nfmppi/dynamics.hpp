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

#ifndef NFMPPI_DYNAMICS_HPP_
#define NFMPPI_DYNAMICS_HPP_

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace nfmppi {

// Kinematic single-track state.
struct VehicleState {
  double s_x = 0.0;    // position east [m]
  double s_y = 0.0;    // position north [m]
  double delta = 0.0;  // steering angle [rad]
  double v = 0.0;      // longitudinal speed [m/s]
  double psi = 0.0;    // heading [rad]

  bool is_finite() const noexcept;
  friend bool operator==(const VehicleState&, const VehicleState&) = default;
};

struct ControlInput {
  double v_delta = 0.0;  // steering rate [rad/s]
  double a = 0.0;        // longitudinal acceleration [m/s^2]
};

struct ModelParams {
  double wheelbase = 2.7;  // [m]
  double dt = 0.1;         // [s]
  // Symmetric steering-angle clamp [rad]; unbounded when empty.
  std::optional<double> delta_max;

  void validate() const;
};

// N x 2 input or noise trajectory: column 0 is the steering rate, column 1
// the acceleration. Row i is applied over [t_i, t_i + dt).
using InputTrajectory = Eigen::Matrix<double, Eigen::Dynamic, 2>;

// States x_1 .. x_N produced by a rollout (x_0 is not included).
using StateTrajectory = std::vector<VehicleState>;

// One explicit-Euler step. Throws InvalidArgument on non-finite input.
VehicleState step(const VehicleState& x, const ControlInput& u,
                  const ModelParams& p);

// Repeated step() over all rows of `inputs`.
StateTrajectory rollout(const VehicleState& x0, const InputTrajectory& inputs,
                        const ModelParams& p);

// Hot-path variant without validation; out.size() must equal inputs.rows().
void rollout_into(const VehicleState& x0, const InputTrajectory& inputs,
                  const ModelParams& p, std::span<VehicleState> out) noexcept;

}  // namespace nfmppi

#endif  // NFMPPI_DYNAMICS_HPP_
