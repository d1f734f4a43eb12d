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

// nfmppi command line: train-flow, run, benchmark, export.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nfmppi/error.hpp"
#include "nfmppi/flow.hpp"
#include "nfmppi/harness.hpp"
#include "nfmppi/mppi.hpp"
#include "nfmppi/scenario.hpp"
#include "nfmppi/training_data.hpp"

namespace fs = std::filesystem;
using namespace nfmppi;

namespace {

constexpr int kExitError = 1;
constexpr int kExitUsage = 2;
constexpr int kExitAborted = 3;

std::vector<std::string> sampler_names() {
  std::vector<std::string> names;
  for (SamplerKind k : kAllSamplers) names.emplace_back(to_string(k));
  return names;
}

// Model file name used by --flows DIR.
std::string flow_file_name(SamplerKind kind, int channel) {
  return std::string(kind == SamplerKind::kFlowA2df ? "a2df" : "ail") + "_u" +
         std::to_string(channel) + ".nfm";
}

HarnessConfig make_config(const std::string& config_path,
                          const std::string& flow_dir) {
  HarnessConfig cfg =
      config_path.empty() ? default_config() : load_config(config_path);
  if (!flow_dir.empty()) {
    for (SamplerKind kind : {SamplerKind::kFlowA2df, SamplerKind::kFlowAil}) {
      cfg.flow_models[kind] = {fs::path(flow_dir) / flow_file_name(kind, 1),
                               fs::path(flow_dir) / flow_file_name(kind, 2)};
    }
  }
  return cfg;
}

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

std::ofstream open_out(const fs::path& p) {
  ensure_parent(p);
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write " + p.string());
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sampling-based MPC with normalizing-flow noise samplers"};
  app.require_subcommand(1);

  std::string config_path;
  std::string flow_dir;
  std::uint64_t seed = 0;
  std::string out;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON configuration file")
        ->check(CLI::ExistingFile);
    cmd->add_option("--seed", seed, "Seed (master seed for benchmark)");
  };
  const auto samplers = sampler_names();

  // train-flow
  auto* train_cmd = app.add_subcommand("train-flow", "Generate data and train one flow model");
  std::string kind_name = "a2df";
  int channel = 1;
  std::string loss_csv;
  std::string data_csv;
  add_common(train_cmd);
  train_cmd->add_option("--kind", kind_name, "Training data recipe")
      ->check(CLI::IsMember({"a2df", "ail"}));
  train_cmd->add_option("--channel", channel, "Input channel (1 = steering rate, 2 = acceleration)")
      ->check(CLI::IsMember({1, 2}));
  train_cmd->add_option("--out", out, "Model file")->required();
  train_cmd->add_option("--loss-csv", loss_csv, "Loss curve CSV (default: <out>.loss.csv)");
  train_cmd->add_option("--data-csv", data_csv, "Also write the generated training batch");

  // run
  auto* run_cmd = app.add_subcommand("run", "Execute one receding-horizon run");
  std::string scenario_spec = "static:1";
  std::string sampler_name = "bg";
  std::optional<double> t_end;
  add_common(run_cmd);
  run_cmd->add_option("--scenario", scenario_spec, "Built-in id (static:1..3, dynamic:1..3) or scenario file");
  run_cmd->add_option("--sampler", sampler_name, "Noise sampler")
      ->check(CLI::IsMember(samplers));
  run_cmd->add_option("--flows", flow_dir, "Directory holding {a2df,ail}_u{1,2}.nfm");
  run_cmd->add_option("--t-end", t_end, "Override the scenario duration [s]");
  run_cmd->add_option("--out", out, "Run log (JSON lines)")->required();

  // benchmark
  auto* bench_cmd = app.add_subcommand("benchmark", "Monte-Carlo comparison of samplers");
  std::vector<std::string> scenario_specs;
  std::vector<std::string> sampler_list;
  std::optional<int> runs;
  bool quiet = false;
  add_common(bench_cmd);
  bench_cmd->add_option("--scenario", scenario_specs, "Scenario ids or files (repeatable)")->required();
  bench_cmd->add_option("--sampler", sampler_list, "Samplers (repeatable; default all)")
      ->check(CLI::IsMember(samplers));
  bench_cmd->add_option("--runs", runs, "Runs per (scenario, sampler) cell")
      ->check(CLI::PositiveNumber);
  bench_cmd->add_option("--flows", flow_dir, "Directory holding {a2df,ail}_u{1,2}.nfm");
  bench_cmd->add_option("--out", out, "Output prefix; writes <out>.csv and <out>.json")->required();
  bench_cmd->add_flag("--quiet", quiet, "No per-run progress on stderr");

  // export
  auto* export_cmd = app.add_subcommand("export", "Spatial trajectory CSV from a run log");
  std::string in_path;
  export_cmd->add_option("--in", in_path, "Run log")->required()->check(CLI::ExistingFile);
  export_cmd->add_option("--out", out, "CSV file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*train_cmd) {
      const HarnessConfig cfg = make_config(config_path, "");
      const Provenance kind = kind_name == "a2df" ? Provenance::kA2df : Provenance::kAil;
      FlowTrainingOutput res = train_flow_model(kind, channel, cfg.flow_training,
                                                cfg.planner.horizon,
                                                cfg.planner.model.dt, seed);
      ensure_parent(out);
      save(res.result.model, out);
      write_loss_csv(res.result.curve, loss_csv.empty() ? out + ".loss.csv" : loss_csv);
      if (!data_csv.empty()) {
        ensure_parent(data_csv);
        write_csv(res.batch, data_csv);
      }
      std::cerr << "trained " << kind_name << " u" << channel << ": test NLL "
                << res.result.curve.initial_test_nll() << " -> "
                << res.result.curve.best_test_nll() << " (best step "
                << res.result.curve.best_step << ")\n";
      return 0;
    }
    if (*run_cmd) {
      const HarnessConfig cfg = make_config(config_path, flow_dir);
      const Scenario scenario = resolve_scenario(scenario_spec);
      const PlannerConfig planner = planner_for(cfg, parse_sampler_kind(sampler_name));
      const RunLog log = run_receding_horizon(scenario, planner, seed, t_end);
      std::ofstream f = open_out(out);
      write_run_log(log, f);
      if (log.aborted) {
        std::cerr << "run aborted: " << log.abort_reason << '\n';
        return kExitAborted;
      }
      return 0;
    }
    if (*bench_cmd) {
      const HarnessConfig cfg = make_config(config_path, flow_dir);
      std::vector<Scenario> scenarios;
      for (const auto& s : scenario_specs) scenarios.push_back(resolve_scenario(s));
      std::vector<SamplerKind> kinds;
      if (sampler_list.empty()) {
        kinds.assign(kAllSamplers.begin(), kAllSamplers.end());
      } else {
        for (const auto& s : sampler_list) kinds.push_back(parse_sampler_kind(s));
      }
      ProgressFn progress;
      if (!quiet) progress = [](const std::string& m) { std::cerr << m << '\n'; };
      const BenchmarkReport report = run_benchmark(
          cfg, scenarios, kinds, runs.value_or(cfg.runs), seed, progress);
      open_out(out + ".csv") << report_to_csv(report);
      open_out(out + ".json") << report_to_json(report);
      bool any_aborted = false;
      for (const auto& sc : report.scenarios) {
        for (const auto& s : sc.samplers) any_aborted |= s.runs_aborted > 0;
      }
      if (any_aborted) std::cerr << "warning: some runs aborted; see report\n";
      return 0;
    }
    if (*export_cmd) {
      std::ifstream in(in_path);
      const RunLog log = read_run_log(in);
      open_out(out) << export_spatial_csv(log);
      return 0;
    }
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitUsage;
}
