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

#include "nfmppi/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nfmppi/error.hpp"

namespace nfmppi {

namespace {

inline VehicleState euler_step(const VehicleState& x, double v_delta, double a,
                               const ModelParams& p) noexcept {
  VehicleState next;
  next.s_x = x.s_x + x.v * std::cos(x.psi) * p.dt;
  next.s_y = x.s_y + x.v * std::sin(x.psi) * p.dt;
  next.delta = x.delta + v_delta * p.dt;
  next.v = x.v + a * p.dt;
  next.psi = x.psi + (x.v / p.wheelbase) * std::tan(x.delta) * p.dt;
  if (p.delta_max) {
    next.delta = std::clamp(next.delta, -*p.delta_max, *p.delta_max);
  }
  return next;
}

}  // namespace

bool VehicleState::is_finite() const noexcept {
  return std::isfinite(s_x) && std::isfinite(s_y) && std::isfinite(delta) &&
         std::isfinite(v) && std::isfinite(psi);
}

void ModelParams::validate() const {
  if (!(wheelbase > 0.0) || !std::isfinite(wheelbase)) {
    throw InvalidArgument("wheelbase must be positive and finite");
  }
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw InvalidArgument("dt must be positive and finite");
  }
  if (delta_max && !(*delta_max > 0.0)) {
    throw InvalidArgument("delta_max must be positive when set");
  }
}

VehicleState step(const VehicleState& x, const ControlInput& u,
                  const ModelParams& p) {
  p.validate();
  if (!x.is_finite() || !std::isfinite(u.v_delta) || !std::isfinite(u.a)) {
    std::ostringstream msg;
    msg << "step: non-finite input (state=[" << x.s_x << ", " << x.s_y << ", "
        << x.delta << ", " << x.v << ", " << x.psi << "], input=[" << u.v_delta
        << ", " << u.a << "])";
    throw InvalidArgument(msg.str());
  }
  return euler_step(x, u.v_delta, u.a, p);
}

StateTrajectory rollout(const VehicleState& x0, const InputTrajectory& inputs,
                        const ModelParams& p) {
  p.validate();
  if (!x0.is_finite()) {
    throw InvalidArgument("rollout: non-finite initial state");
  }
  if (!inputs.allFinite()) {
    throw InvalidArgument("rollout: non-finite input trajectory");
  }
  StateTrajectory out(static_cast<std::size_t>(inputs.rows()));
  rollout_into(x0, inputs, p, out);
  return out;
}

void rollout_into(const VehicleState& x0, const InputTrajectory& inputs,
                  const ModelParams& p, std::span<VehicleState> out) noexcept {
  VehicleState x = x0;
  for (Eigen::Index i = 0; i < inputs.rows(); ++i) {
    x = euler_step(x, inputs(i, 0), inputs(i, 1), p);
    out[static_cast<std::size_t>(i)] = x;
  }
}

}  // namespace nfmppi
