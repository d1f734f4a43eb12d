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

// Micro-benchmarks for the hot paths: flow sampling, noise generation, one
// planning step and path projection.

#include <benchmark/benchmark.h>

#include <memory>
#include <vector>

#include "nfmppi/flow.hpp"
#include "nfmppi/harness.hpp"
#include "nfmppi/mppi.hpp"
#include "nfmppi/path.hpp"
#include "nfmppi/rng.hpp"
#include "nfmppi/sampling.hpp"
#include "nfmppi/scenario.hpp"

namespace {

using namespace nfmppi;

std::shared_ptr<const FlowModel> perturbed_flow(int dim, int layers, int hidden) {
  FlowModel model(dim, layers, hidden, 7);
  std::vector<double> p = model.parameters();
  Rng rng(derive_key(7, 1));
  for (double& x : p) x += 0.1 * rng.normal();
  model.set_parameters(p);
  return std::make_shared<const FlowModel>(std::move(model));
}

void BM_FlowSample(benchmark::State& state) {
  const int layers = static_cast<int>(state.range(0));
  const auto flow = perturbed_flow(80, layers, 128);
  for (auto _ : state) {
    Rng rng(42);
    benchmark::DoNotOptimize(flow->sample(200, rng));
  }
  state.SetItemsProcessed(state.iterations() * 200);
}
BENCHMARK(BM_FlowSample)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_FlowLogProb(benchmark::State& state) {
  const auto flow = perturbed_flow(80, 16, 128);
  Rng rng(3);
  const Eigen::MatrixXd x = flow->sample(256, rng);
  for (auto _ : state) benchmark::DoNotOptimize(flow->log_prob(x));
  state.SetItemsProcessed(state.iterations() * 256);
}
BENCHMARK(BM_FlowLogProb)->Unit(benchmark::kMillisecond);

SamplerConfig sampler_for(SamplerKind kind) {
  SamplerConfig cfg;
  cfg.kind = kind;
  if (kind == SamplerKind::kFlowA2df || kind == SamplerKind::kFlowAil) {
    cfg.flows = {perturbed_flow(80, 16, 128), perturbed_flow(80, 16, 128)};
  }
  return cfg;
}

void BM_SampleNoise(benchmark::State& state) {
  const auto kind = static_cast<SamplerKind>(state.range(0));
  const SamplerConfig cfg = sampler_for(kind);
  std::uint64_t key = 0;
  for (auto _ : state) benchmark::DoNotOptimize(sample_noise(cfg, 80, 200, key++));
  state.SetLabel(std::string(to_string(kind)));
}
BENCHMARK(BM_SampleNoise)
    ->DenseRange(0, 4)
    ->Unit(benchmark::kMillisecond);

void BM_PlanStep(benchmark::State& state) {
  HarnessConfig hc = default_config();
  PlannerConfig cfg = hc.planner;
  cfg.sampler = sampler_for(static_cast<SamplerKind>(state.range(0)));
  cfg.workers = static_cast<int>(state.range(1));
  const Scenario sc = builtin_scenario("dynamic:1");
  CostContext ctx;
  ctx.path = &sc.path;
  ctx.v_des = sc.v_des;
  ctx.goal = sc.path.point_at(40.0);
  ctx.weights = cfg.weights;
  ctx.ellipse = cfg.ellipse;
  for (const auto& v : sc.traffic) {
    ctx.traffic.push_back(
        traffic_trajectory(v, lane_of(v, sc.path), 0.0, cfg.horizon, cfg.model.dt));
  }
  const InputTrajectory nominal = InputTrajectory::Zero(cfg.horizon, 2);
  std::uint64_t key = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(plan_step(sc.x0, nominal, cfg, ctx, key++));
  }
  state.SetLabel(std::string(to_string(cfg.sampler.kind)));
}
BENCHMARK(BM_PlanStep)
    ->ArgsProduct({{0, 1, 2, 3, 4}, {1, 4}})
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();

void BM_PathProject(benchmark::State& state) {
  const Scenario sc = builtin_scenario("static:1");
  const bool windowed = state.range(0) != 0;
  Rng rng(9);
  std::vector<Eigen::Vector2d> pts;
  for (int i = 0; i < 1024; ++i) {
    const double s = sc.path.length() * rng.uniform();
    pts.push_back(sc.path.point_at(s) + Eigen::Vector2d(rng.normal(), rng.normal()));
  }
  std::size_t i = 0;
  int hint = 0;
  for (auto _ : state) {
    const auto& p = pts[i++ & 1023];
    if (windowed) {
      const auto proj = sc.path.project_near(p, hint);
      hint = proj.segment;
      benchmark::DoNotOptimize(proj);
    } else {
      benchmark::DoNotOptimize(sc.path.project(p));
    }
  }
  state.SetLabel(windowed ? "near" : "exact");
}
BENCHMARK(BM_PathProject)->Arg(0)->Arg(1);

}  // namespace

BENCHMARK_MAIN();
