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

#ifndef NFMPPI_MPPI_HPP_
#define NFMPPI_MPPI_HPP_

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nfmppi/costs.hpp"
#include "nfmppi/dynamics.hpp"
#include "nfmppi/sampling.hpp"
#include "nfmppi/scenario.hpp"

namespace nfmppi {

struct PlannerConfig {
  int samples = 200;    // K
  int horizon = 80;     // N, T = horizon * model.dt
  double lambda = 5.0;  // inverse temperature
  ModelParams model;
  SamplerConfig sampler;
  CostWeights weights;
  EllipseParams ellipse;
  // Threads used for rollouts. Results do not depend on this value.
  int workers = 1;

  void validate() const;
};

struct PlanDiagnostics {
  std::vector<double> sample_costs;  // S^(k), size K
  // (sum_k w_k / max_k w_k) / K, in (0, 1].
  double ess = 0.0;
  double best_cost = 0.0;
  double mean_cost = 0.0;
  double worst_cost = 0.0;
  int best_sample = -1;
  // All weights vanished or were non-finite; the best sample was used.
  bool fallback = false;
  CostBreakdown chosen;  // cost of the returned plan
};

struct PlanResult {
  InputTrajectory inputs;  // U*
  StateTrajectory states;  // X*
  PlanDiagnostics diagnostics;
};

// Importance-weighted noise average:
//   w_k = exp(-(S_k - b) / lambda),  U* = U_bar + sum_k w_k V_k / sum_k w_k
// with b = min_k S_k when `subtract_baseline`, else b = 0. Non-finite costs get
// zero weight. `diag` (optional) receives ess, best/mean/worst and fallback.
InputTrajectory weighted_update(const InputTrajectory& nominal,
                                std::span<const NoiseTrajectory> noise,
                                std::span<const double> costs, double lambda,
                                bool subtract_baseline = true,
                                PlanDiagnostics* diag = nullptr);

// One sample / roll out / score / average iteration.
PlanResult plan_step(const VehicleState& x0, const InputTrajectory& nominal,
                     const PlannerConfig& cfg, const CostContext& ctx,
                     std::uint64_t key);

// Drop the first row, shift left, repeat the last row.
InputTrajectory shift_warm_start(const InputTrajectory& plan);

struct StepRecord {
  double t = 0.0;
  VehicleState state;     // state at t, before the input is applied
  ControlInput input;     // applied over [t, t + dt)
  CostBreakdown plan_cost;
  double ess = 0.0;
  bool fallback = false;
  double min_scaled_distance = 0.0;  // realized d_e to the nearest vehicle
};

struct RunLog {
  std::string scenario_id;
  std::string sampler;
  std::uint64_t seed = 0;
  double dt = 0.1;
  std::array<double, kNumCostTerms> alpha{};
  std::vector<StepRecord> steps;
  bool aborted = false;
  std::string abort_reason;

  // Per-term means of the planned-trajectory costs over all control steps.
  CostBreakdown mean_plan_cost() const;
  double min_scaled_distance() const;
};

// Closed loop from scenario.x0 with U_bar = 0 until t_end (default
// scenario.t_end). Non-finite states abort the run; the log records why.
RunLog run_receding_horizon(const Scenario& scenario, const PlannerConfig& cfg,
                            std::uint64_t seed,
                            std::optional<double> t_end = std::nullopt);

// JSON lines: a header record, one "step" record per control step and a
// closing "summary" record.
void write_run_log(const RunLog& log, std::ostream& out);
RunLog read_run_log(std::istream& in);

}  // namespace nfmppi

#endif  // NFMPPI_MPPI_HPP_
