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

#include "nfmppi/mppi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

#include "nfmppi/error.hpp"

namespace nfmppi {

void PlannerConfig::validate() const {
  if (samples < 1) throw InvalidArgument("planner: samples must be >= 1");
  if (horizon < 1) throw InvalidArgument("planner: horizon must be >= 1");
  if (!(lambda > 0.0)) throw InvalidArgument("planner: lambda must be > 0");
  if (workers < 1) throw InvalidArgument("planner: workers must be >= 1");
  model.validate();
  weights.validate();
  ellipse.validate();
  sampler.validate(horizon);
}

InputTrajectory weighted_update(const InputTrajectory& nominal,
                                std::span<const NoiseTrajectory> noise,
                                std::span<const double> costs, double lambda,
                                bool subtract_baseline, PlanDiagnostics* diag) {
  if (noise.size() != costs.size() || noise.empty()) {
    throw InvalidArgument("weighted_update: need one cost per noise sample");
  }
  if (!(lambda > 0.0)) throw InvalidArgument("weighted_update: lambda must be > 0");
  const std::size_t count = noise.size();

  double best = std::numeric_limits<double>::infinity();
  double worst = -std::numeric_limits<double>::infinity();
  double sum_cost = 0.0;
  std::size_t n_finite = 0;
  int best_k = -1;
  for (std::size_t k = 0; k < count; ++k) {
    if (noise[k].rows() != nominal.rows()) {
      throw InvalidArgument("weighted_update: noise length != horizon");
    }
    if (!std::isfinite(costs[k])) continue;
    if (costs[k] < best) {
      best = costs[k];
      best_k = static_cast<int>(k);
    }
    worst = std::max(worst, costs[k]);
    sum_cost += costs[k];
    ++n_finite;
  }

  const double baseline = subtract_baseline && n_finite > 0 ? best : 0.0;
  std::vector<double> w(count, 0.0);
  double sum_w = 0.0;
  double max_w = 0.0;
  for (std::size_t k = 0; k < count; ++k) {
    if (!std::isfinite(costs[k])) continue;
    w[k] = std::exp(-(costs[k] - baseline) / lambda);
    sum_w += w[k];
    max_w = std::max(max_w, w[k]);
  }

  InputTrajectory out = nominal;
  bool fallback = false;
  if (sum_w > 0.0 && std::isfinite(sum_w)) {
    InputTrajectory acc = InputTrajectory::Zero(nominal.rows(), 2);
    for (std::size_t k = 0; k < count; ++k) {
      if (w[k] != 0.0) acc += w[k] * noise[k];
    }
    out += acc / sum_w;
  } else {
    fallback = true;
    if (best_k >= 0) out += noise[static_cast<std::size_t>(best_k)];
  }

  if (diag != nullptr) {
    diag->sample_costs.assign(costs.begin(), costs.end());
    diag->ess = fallback || max_w == 0.0
                    ? 1.0 / static_cast<double>(count)
                    : (sum_w / max_w) / static_cast<double>(count);
    diag->best_cost = best;
    diag->worst_cost = worst;
    diag->mean_cost = n_finite > 0 ? sum_cost / static_cast<double>(n_finite)
                                   : std::numeric_limits<double>::quiet_NaN();
    diag->best_sample = best_k;
    diag->fallback = fallback;
  }
  return out;
}

PlanResult plan_step(const VehicleState& x0, const InputTrajectory& nominal,
                     const PlannerConfig& cfg, const CostContext& ctx,
                     std::uint64_t key) {
  cfg.validate();
  if (nominal.rows() != cfg.horizon) {
    throw InvalidArgument("plan_step: nominal length " +
                          std::to_string(nominal.rows()) + " != horizon " +
                          std::to_string(cfg.horizon));
  }
  if (!x0.is_finite()) throw InvalidArgument("plan_step: non-finite state");

  const std::vector<NoiseTrajectory> noise =
      sample_noise(cfg.sampler, cfg.horizon, cfg.samples, key);
  std::vector<double> costs(noise.size());

  auto evaluate_range = [&](std::size_t begin, std::size_t end) {
    StateTrajectory states(static_cast<std::size_t>(cfg.horizon));
    InputTrajectory inputs(cfg.horizon, 2);
    for (std::size_t k = begin; k < end; ++k) {
      inputs = nominal + noise[k];
      rollout_into(x0, inputs, cfg.model, states);
      costs[k] = total_cost(states, inputs, ctx).total;
    }
  };

  const auto workers = static_cast<std::size_t>(
      std::min<int>(cfg.workers, cfg.samples));
  if (workers <= 1) {
    evaluate_range(0, noise.size());
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (noise.size() + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(noise.size(), begin + chunk);
      if (begin < end) pool.emplace_back(evaluate_range, begin, end);
    }
  }

  PlanResult result;
  result.inputs = weighted_update(nominal, noise, costs, cfg.lambda, true,
                                  &result.diagnostics);
  result.states.resize(static_cast<std::size_t>(cfg.horizon));
  rollout_into(x0, result.inputs, cfg.model, result.states);
  result.diagnostics.chosen = total_cost(result.states, result.inputs, ctx);
  return result;
}

InputTrajectory shift_warm_start(const InputTrajectory& plan) {
  const auto n = plan.rows();
  if (n == 0) return plan;
  InputTrajectory out(n, 2);
  out.topRows(n - 1) = plan.bottomRows(n - 1);
  out.row(n - 1) = plan.row(n - 1);
  return out;
}

CostBreakdown RunLog::mean_plan_cost() const {
  CostBreakdown mean;
  if (steps.empty()) return mean;
  for (const auto& s : steps) {
    for (int i = 0; i < kNumCostTerms; ++i) {
      mean.terms[static_cast<std::size_t>(i)] +=
          s.plan_cost.terms[static_cast<std::size_t>(i)];
    }
  }
  const double n = static_cast<double>(steps.size());
  for (int i = 0; i < kNumCostTerms; ++i) {
    mean.terms[static_cast<std::size_t>(i)] /= n;
    mean.total += alpha[static_cast<std::size_t>(i)] *
                  mean.terms[static_cast<std::size_t>(i)];
  }
  return mean;
}

double RunLog::min_scaled_distance() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& s : steps) m = std::min(m, s.min_scaled_distance);
  return m;
}

RunLog run_receding_horizon(const Scenario& scenario, const PlannerConfig& cfg,
                            std::uint64_t seed, std::optional<double> t_end) {
  scenario.validate();
  cfg.validate();
  const double horizon_end = t_end.value_or(scenario.t_end);
  if (!(horizon_end > 0.0)) throw InvalidArgument("run: t_end must be > 0");
  const double dt = cfg.model.dt;
  const auto n_steps =
      static_cast<int>(std::ceil(horizon_end / dt - 1e-9));

  RunLog log;
  log.scenario_id = scenario.id;
  log.sampler = std::string(to_string(cfg.sampler.kind));
  log.seed = seed;
  log.dt = dt;
  log.alpha = cfg.weights.alpha;

  std::vector<LocalPath> lanes;
  lanes.reserve(scenario.traffic.size());
  for (const auto& v : scenario.traffic) lanes.push_back(lane_of(v, scenario.path));

  CostContext ctx;
  ctx.path = &scenario.path;
  ctx.v_des = scenario.v_des;
  ctx.weights = cfg.weights;
  ctx.ellipse = cfg.ellipse;
  ctx.traffic.resize(scenario.traffic.size());

  const double lookahead = scenario.v_des * cfg.horizon * dt;
  VehicleState x = scenario.x0;
  InputTrajectory nominal = InputTrajectory::Zero(cfg.horizon, 2);
  int hint = -1;
  for (int k = 0; k < n_steps; ++k) {
    const double t = k * dt;
    const Eigen::Vector2d ego(x.s_x, x.s_y);
    const PathProjection proj =
        hint < 0 ? scenario.path.project(ego) : scenario.path.project_near(ego, hint);
    hint = proj.segment;
    ctx.path_hint = hint;
    ctx.goal = scenario.path.point_at(proj.station + lookahead);

    double min_de = std::numeric_limits<double>::infinity();
    for (std::size_t v = 0; v < scenario.traffic.size(); ++v) {
      ctx.traffic[v] =
          traffic_trajectory(scenario.traffic[v], lanes[v], t, cfg.horizon, dt);
      const TrafficPose now = traffic_pose(scenario.traffic[v], lanes[v], t);
      min_de = std::min(min_de, scaled_distance(ego, now, cfg.ellipse));
    }

    const PlanResult plan = plan_step(x, nominal, cfg, ctx, derive_key(seed, static_cast<std::uint64_t>(k)));

    StepRecord rec;
    rec.t = t;
    rec.state = x;
    rec.input = {plan.inputs(0, 0), plan.inputs(0, 1)};
    rec.plan_cost = plan.diagnostics.chosen;
    rec.ess = plan.diagnostics.ess;
    rec.fallback = plan.diagnostics.fallback;
    rec.min_scaled_distance = min_de;
    log.steps.push_back(rec);

    if (!std::isfinite(rec.input.v_delta) || !std::isfinite(rec.input.a)) {
      log.aborted = true;
      log.abort_reason = "non-finite input at t=" + std::to_string(t);
      break;
    }
    x = step(x, rec.input, cfg.model);
    if (!x.is_finite()) {
      log.aborted = true;
      log.abort_reason = "non-finite state at t=" + std::to_string(t + dt);
      break;
    }
    nominal = shift_warm_start(plan.inputs);
  }
  return log;
}

}  // namespace nfmppi
