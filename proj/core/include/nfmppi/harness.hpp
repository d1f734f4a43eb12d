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

#ifndef NFMPPI_HARNESS_HPP_
#define NFMPPI_HARNESS_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nfmppi/flow.hpp"
#include "nfmppi/mppi.hpp"
#include "nfmppi/sampling.hpp"
#include "nfmppi/scenario.hpp"
#include "nfmppi/training_data.hpp"

namespace nfmppi {

// Runs whose closest realized approach falls to this scaled distance count
// as collisions.
inline constexpr double kCollisionScaledDistance = 0.25;

struct FlowTrainingSettings {
  int rows = 400;  // B
  Eigen::Vector2d a2df_eps_draw{0.03, 0.9};
  double a2df_eps_switch = 220.0;
  Eigen::Vector2d ail_eps_draw{0.045, 1.1};
  double ail_eps_switch = 350.0;
  TrainConfig train;
};

struct HarnessConfig {
  // samples, horizon, lambda, model, weights, ellipse, workers.
  PlannerConfig planner;
  Eigen::Vector2d sigma_bg{0.1, 2.0};
  Eigen::Vector2d sigma_il{0.045, 1.1};
  Eigen::Vector2d sigma_2df_derivative{0.03, 0.075};
  Eigen::Vector2d sigma_2df_additive{0.045, 0.09};
  // Model files per flow sampler, channel 1 then channel 2.
  std::map<SamplerKind, std::array<std::filesystem::path, 2>> flow_models;
  FlowTrainingSettings flow_training;
  int runs = 10;
};

HarnessConfig default_config();
std::string config_to_json(const HarnessConfig& cfg);
// Relative model paths are resolved against `base_dir`.
HarnessConfig config_from_json(std::string_view text,
                               const std::filesystem::path& base_dir = {});
HarnessConfig load_config(const std::filesystem::path& path);
std::uint64_t config_hash(const HarnessConfig& cfg);

// Planner settings for one sampler; flow samplers load their model files.
PlannerConfig planner_for(const HarnessConfig& cfg, SamplerKind kind);

// Built-in id ("static:1") or a scenario file path.
Scenario resolve_scenario(std::string_view id_or_path);

struct FlowTrainingOutput {
  TrainingBatch batch;
  Eigen::MatrixXd train_rows;  // split of batch.rows used for fitting
  Eigen::MatrixXd test_rows;   // held-out split used for early stopping
  TrainResult result;
};

// Generates the dataset for (kind, channel in {1, 2}) and trains a model.
FlowTrainingOutput train_flow_model(Provenance kind, int channel,
                                    const FlowTrainingSettings& settings,
                                    int horizon, double dt, std::uint64_t seed);

std::uint64_t run_seed(std::uint64_t master, std::string_view scenario_id,
                       SamplerKind sampler, int run);

struct SamplerSummary {
  SamplerKind sampler = SamplerKind::kBasicGaussian;
  int runs_ok = 0;
  int runs_aborted = 0;
  std::array<double, kNumCostTerms> mean_terms{};  // unweighted
  double mean_total = 0.0;                         // alpha . mean_terms
  std::optional<double> reduction_vs_bg;           // (S_BG - S) / S_BG
  double min_scaled_distance = 0.0;
  int collisions = 0;
  std::vector<double> run_totals;                  // per run, NaN if aborted
  std::vector<std::string> abort_reasons;
};

struct ScenarioSummary {
  std::string scenario_id;
  std::vector<SamplerSummary> samplers;

  const SamplerSummary* find(SamplerKind kind) const;
};

struct BenchmarkReport {
  std::uint64_t master_seed = 0;
  int runs = 0;
  std::uint64_t config_hash = 0;
  std::array<double, kNumCostTerms> alpha{};
  std::vector<ScenarioSummary> scenarios;
};

using ProgressFn = std::function<void(const std::string&)>;

BenchmarkReport run_benchmark(const HarnessConfig& cfg,
                              const std::vector<Scenario>& scenarios,
                              const std::vector<SamplerKind>& samplers,
                              int runs, std::uint64_t master_seed,
                              const ProgressFn& progress = {});

std::string report_to_csv(const BenchmarkReport& report);
std::string report_to_json(const BenchmarkReport& report);

// t, s_x, s_y, v, psi per control step.
std::string export_spatial_csv(const RunLog& log);

}  // namespace nfmppi

#endif  // NFMPPI_HARNESS_HPP_
