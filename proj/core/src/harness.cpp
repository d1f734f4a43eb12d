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

#include "nfmppi/harness.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "nfmppi/error.hpp"

namespace nfmppi {

namespace {

using nlohmann::json;

constexpr int kConfigVersion = 1;

json vec2(const Eigen::Vector2d& v) { return json::array({v.x(), v.y()}); }

Eigen::Vector2d vec2_from(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 2) {
    throw FormatError(std::string("config: '") + what + "' must be [a, b]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

// Overwrites `target` from j[key] when present.
template <typename T>
void read_opt(const json& j, const char* key, T& target) {
  if (j.is_object() && j.contains(key)) {
    try {
      target = j.at(key).get<T>();
    } catch (const json::exception& e) {
      throw FormatError(std::string("config: bad value for '") + key +
                        "': " + e.what());
    }
  }
}

json train_config_json(const TrainConfig& t) {
  return {{"max_steps", t.max_steps},       {"patience", t.patience},
          {"train_fraction", t.train_fraction}, {"batch_size", t.batch_size},
          {"learning_rate", t.learning_rate}, {"num_layers", t.num_layers},
          {"hidden", t.hidden}};
}

void read_sections(const json& j, const std::filesystem::path& base_dir,
                   HarnessConfig& cfg);

std::string format_double(double v) {
  if (!std::isfinite(v)) return "nan";
  std::ostringstream s;
  s << std::setprecision(10) << v;
  return s.str();
}

}  // namespace

HarnessConfig default_config() {
  HarnessConfig cfg;
  cfg.planner.sampler.sigma = cfg.sigma_bg;
  // Built-in benchmarks bound the steering angle; the bare model does not.
  cfg.planner.model.delta_max = 0.5;
  return cfg;
}

std::string config_to_json(const HarnessConfig& cfg) {
  const PlannerConfig& p = cfg.planner;
  json j;
  j["format"] = "nfmppi-config";
  j["version"] = kConfigVersion;
  j["planner"] = {{"samples", p.samples},
                  {"horizon", p.horizon},
                  {"lambda", p.lambda},
                  {"workers", p.workers}};
  j["model"] = {{"wheelbase", p.model.wheelbase},
                {"dt", p.model.dt},
                {"delta_max", p.model.delta_max ? json(*p.model.delta_max)
                                                : json(nullptr)}};
  j["costs"] = {{"alpha", p.weights.alpha},
                {"ellipse",
                 {{"a_e", p.ellipse.a_e},
                  {"b_e", p.ellipse.b_e},
                  {"d_floor", p.ellipse.d_floor}}}};
  json flows = json::object();
  for (const auto& [kind, paths] : cfg.flow_models) {
    flows[std::string(to_string(kind))] =
        json::array({paths[0].string(), paths[1].string()});
  }
  j["sampling"] = {{"bg", {{"sigma", vec2(cfg.sigma_bg)}}},
                   {"il", {{"sigma", vec2(cfg.sigma_il)}}},
                   {"2df",
                    {{"sigma_derivative", vec2(cfg.sigma_2df_derivative)},
                     {"sigma_additive", vec2(cfg.sigma_2df_additive)}}},
                   {"flows", flows}};
  const FlowTrainingSettings& f = cfg.flow_training;
  j["flow_training"] = {
      {"rows", f.rows},
      {"a2df", {{"eps_draw", vec2(f.a2df_eps_draw)}, {"eps_switch", f.a2df_eps_switch}}},
      {"ail", {{"eps_draw", vec2(f.ail_eps_draw)}, {"eps_switch", f.ail_eps_switch}}},
      {"train", train_config_json(f.train)}};
  j["benchmark"] = {{"runs", cfg.runs}};
  return j.dump(2) + "\n";
}

HarnessConfig config_from_json(std::string_view text,
                               const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw FormatError("config: root must be an object");
  if (j.value("format", std::string{}) != "nfmppi-config") {
    throw FormatError("config: missing or wrong 'format' tag");
  }
  if (j.value("version", 0) != kConfigVersion) {
    throw FormatError("config: unsupported version");
  }

  HarnessConfig cfg = default_config();
  try {
    read_sections(j, base_dir, cfg);
  } catch (const json::exception& e) {
    throw FormatError(std::string("config: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("config: ") + e.what());
  }

  cfg.planner.sampler.sigma = cfg.sigma_bg;
  cfg.planner.sampler.dt = cfg.planner.model.dt;
  const PlannerConfig& p = cfg.planner;
  if (p.samples < 1 || p.horizon < 1 || !(p.lambda > 0.0) || p.workers < 1) {
    throw FormatError(
        "config: planner needs samples, horizon, workers >= 1 and lambda > 0");
  }
  try {
    p.model.validate();
    p.weights.validate();
    p.ellipse.validate();
    cfg.flow_training.train.validate();
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("config: ") + e.what());
  }
  if (cfg.flow_training.rows < 2) {
    throw FormatError("config: flow_training.rows must be >= 2");
  }
  if (cfg.runs < 1) throw FormatError("config: benchmark.runs must be >= 1");
  return cfg;
}

namespace {

void read_sections(const json& j, const std::filesystem::path& base_dir,
                   HarnessConfig& cfg) {
  PlannerConfig& p = cfg.planner;
  if (j.contains("planner")) {
    const json& pj = j["planner"];
    read_opt(pj, "samples", p.samples);
    read_opt(pj, "horizon", p.horizon);
    read_opt(pj, "lambda", p.lambda);
    read_opt(pj, "workers", p.workers);
  }
  if (j.contains("model")) {
    const json& mj = j["model"];
    read_opt(mj, "wheelbase", p.model.wheelbase);
    read_opt(mj, "dt", p.model.dt);
    if (mj.contains("delta_max")) {
      if (mj["delta_max"].is_null()) {
        p.model.delta_max.reset();
      } else {
        read_opt(mj, "delta_max", p.model.delta_max.emplace());
      }
    }
  }
  if (j.contains("costs")) {
    const json& cj = j["costs"];
    read_opt(cj, "alpha", p.weights.alpha);
    if (cj.contains("ellipse")) {
      read_opt(cj["ellipse"], "a_e", p.ellipse.a_e);
      read_opt(cj["ellipse"], "b_e", p.ellipse.b_e);
      read_opt(cj["ellipse"], "d_floor", p.ellipse.d_floor);
    }
  }
  if (j.contains("sampling")) {
    const json& sj = j["sampling"];
    if (sj.contains("bg")) cfg.sigma_bg = vec2_from(sj["bg"].at("sigma"), "bg.sigma");
    if (sj.contains("il")) cfg.sigma_il = vec2_from(sj["il"].at("sigma"), "il.sigma");
    if (sj.contains("2df")) {
      cfg.sigma_2df_derivative =
          vec2_from(sj["2df"].at("sigma_derivative"), "2df.sigma_derivative");
      cfg.sigma_2df_additive =
          vec2_from(sj["2df"].at("sigma_additive"), "2df.sigma_additive");
    }
    if (sj.contains("flows")) {
      for (const auto& [name, paths] : sj["flows"].items()) {
        const SamplerKind kind = parse_sampler_kind(name);
        if (!is_flow_sampler(kind) || !paths.is_array() || paths.size() != 2) {
          throw FormatError("config: flows." + name +
                            " must list two model files");
        }
        std::array<std::filesystem::path, 2> resolved;
        for (std::size_t ch = 0; ch < 2; ++ch) {
          std::filesystem::path path = paths[ch].get<std::string>();
          resolved[ch] = path.is_relative() && !base_dir.empty()
                             ? base_dir / path
                             : path;
        }
        cfg.flow_models[kind] = resolved;
      }
    }
  }
  if (j.contains("flow_training")) {
    const json& fj = j["flow_training"];
    FlowTrainingSettings& f = cfg.flow_training;
    read_opt(fj, "rows", f.rows);
    if (fj.contains("a2df")) {
      f.a2df_eps_draw = vec2_from(fj["a2df"].at("eps_draw"), "a2df.eps_draw");
      read_opt(fj["a2df"], "eps_switch", f.a2df_eps_switch);
    }
    if (fj.contains("ail")) {
      f.ail_eps_draw = vec2_from(fj["ail"].at("eps_draw"), "ail.eps_draw");
      read_opt(fj["ail"], "eps_switch", f.ail_eps_switch);
    }
    if (fj.contains("train")) {
      const json& tj = fj["train"];
      read_opt(tj, "max_steps", f.train.max_steps);
      read_opt(tj, "patience", f.train.patience);
      read_opt(tj, "train_fraction", f.train.train_fraction);
      read_opt(tj, "batch_size", f.train.batch_size);
      read_opt(tj, "learning_rate", f.train.learning_rate);
      read_opt(tj, "num_layers", f.train.num_layers);
      read_opt(tj, "hidden", f.train.hidden);
    }
  }
  if (j.contains("benchmark")) read_opt(j["benchmark"], "runs", cfg.runs);
}

}  // namespace

HarnessConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return config_from_json(buf.str(), path.parent_path());
}

std::uint64_t config_hash(const HarnessConfig& cfg) {
  return hash_string(config_to_json(cfg));
}

PlannerConfig planner_for(const HarnessConfig& cfg, SamplerKind kind) {
  PlannerConfig p = cfg.planner;
  p.sampler = SamplerConfig{};
  p.sampler.kind = kind;
  p.sampler.dt = p.model.dt;
  switch (kind) {
    case SamplerKind::kBasicGaussian:
      p.sampler.sigma = cfg.sigma_bg;
      break;
    case SamplerKind::kInputLifting:
      p.sampler.sigma = cfg.sigma_il;
      break;
    case SamplerKind::kTwoDof:
      p.sampler.sigma_derivative = cfg.sigma_2df_derivative;
      p.sampler.sigma_additive = cfg.sigma_2df_additive;
      break;
    case SamplerKind::kFlowA2df:
    case SamplerKind::kFlowAil: {
      const auto it = cfg.flow_models.find(kind);
      if (it == cfg.flow_models.end()) {
        throw InvalidArgument("no flow model files configured for sampler " +
                              std::string(to_string(kind)));
      }
      for (std::size_t ch = 0; ch < 2; ++ch) {
        p.sampler.flows[ch] =
            std::make_shared<const FlowModel>(load(it->second[ch], p.horizon));
      }
      break;
    }
  }
  p.validate();
  return p;
}

Scenario resolve_scenario(std::string_view id_or_path) {
  if (id_or_path.starts_with("static:") || id_or_path.starts_with("dynamic:")) {
    return builtin_scenario(id_or_path);
  }
  return load_scenario(std::filesystem::path(id_or_path));
}

FlowTrainingOutput train_flow_model(Provenance kind, int channel,
                                    const FlowTrainingSettings& settings,
                                    int horizon, double dt, std::uint64_t seed) {
  if (channel != 1 && channel != 2) {
    throw InvalidArgument("train_flow_model: channel must be 1 or 2");
  }
  const auto ch = static_cast<Eigen::Index>(channel - 1);
  const std::uint64_t data_seed = derive_key(seed, 0xDA7A, static_cast<std::uint64_t>(channel));
  TrainingBatch batch;
  if (kind == Provenance::kA2df) {
    const double eps = settings.a2df_eps_draw(ch);
    batch = generate_a2df(settings.rows, horizon,
                          HeuristicParams{settings.a2df_eps_switch, eps, eps},
                          dt, data_seed);
  } else {
    batch = generate_ail(settings.rows, horizon, settings.ail_eps_draw(ch),
                         settings.ail_eps_switch, data_seed);
  }
  TrainConfig tc = settings.train;
  tc.seed = derive_key(seed, 0x7EA1, static_cast<std::uint64_t>(channel));
  auto [train_rows, test_rows] = split_rows(batch.rows, tc.train_fraction, tc.seed);
  TrainResult result = train(train_rows, test_rows, tc);

  const json details = {
      {"channel", channel},
      {"provenance", std::string(to_string(kind))},
      {"rows", settings.rows},
      {"horizon", horizon},
      {"dt", dt},
      {"eps_draw_1", batch.params.eps_draw_1},
      {"eps_draw_2", batch.params.eps_draw_2},
      {"eps_switch", batch.params.eps_switch},
      {"seed", seed},
      {"train", train_config_json(tc)},
      {"train_config_hash", hash_string(train_config_json(tc).dump())},
      {"best_step", result.curve.best_step},
      {"best_test_nll", result.curve.best_test_nll()}};
  result.model.set_metadata(
      FlowMetadata{channel, std::string(to_string(kind)), details.dump()});
  return {std::move(batch), std::move(train_rows), std::move(test_rows),
          std::move(result)};
}

std::uint64_t run_seed(std::uint64_t master, std::string_view scenario_id,
                       SamplerKind sampler, int run) {
  return derive_key(master, hash_string(scenario_id),
                    hash_string(to_string(sampler)),
                    static_cast<std::uint64_t>(run));
}

const SamplerSummary* ScenarioSummary::find(SamplerKind kind) const {
  for (const auto& s : samplers) {
    if (s.sampler == kind) return &s;
  }
  return nullptr;
}

BenchmarkReport run_benchmark(const HarnessConfig& cfg,
                              const std::vector<Scenario>& scenarios,
                              const std::vector<SamplerKind>& samplers,
                              int runs, std::uint64_t master_seed,
                              const ProgressFn& progress) {
  if (runs < 1) throw InvalidArgument("benchmark: runs must be >= 1");
  BenchmarkReport report;
  report.master_seed = master_seed;
  report.runs = runs;
  report.config_hash = config_hash(cfg);
  report.alpha = cfg.planner.weights.alpha;

  std::vector<PlannerConfig> planners;
  planners.reserve(samplers.size());
  for (SamplerKind kind : samplers) planners.push_back(planner_for(cfg, kind));

  for (const Scenario& scenario : scenarios) {
    ScenarioSummary summary;
    summary.scenario_id = scenario.id;
    for (std::size_t si = 0; si < samplers.size(); ++si) {
      SamplerSummary s;
      s.sampler = samplers[si];
      s.min_scaled_distance = std::numeric_limits<double>::infinity();
      std::array<double, kNumCostTerms> sums{};
      for (int r = 0; r < runs; ++r) {
        const std::uint64_t seed = run_seed(master_seed, scenario.id, s.sampler, r);
        const RunLog log = run_receding_horizon(scenario, planners[si], seed);
        if (log.aborted) {
          ++s.runs_aborted;
          s.abort_reasons.push_back("run " + std::to_string(r) + ": " + log.abort_reason);
          s.run_totals.push_back(std::numeric_limits<double>::quiet_NaN());
        } else {
          const CostBreakdown mean = log.mean_plan_cost();
          for (int i = 0; i < kNumCostTerms; ++i) {
            sums[static_cast<std::size_t>(i)] += mean.terms[static_cast<std::size_t>(i)];
          }
          s.run_totals.push_back(mean.total);
          ++s.runs_ok;
        }
        const double min_de = log.min_scaled_distance();
        s.min_scaled_distance = std::min(s.min_scaled_distance, min_de);
        if (min_de <= kCollisionScaledDistance) ++s.collisions;
        if (progress) {
          std::ostringstream msg;
          msg << scenario.id << ' ' << to_string(s.sampler) << " run " << r
              << ": S=" << format_double(s.run_totals.back())
              << " min_de=" << format_double(min_de);
          progress(msg.str());
        }
      }
      if (s.runs_ok > 0) {
        for (int i = 0; i < kNumCostTerms; ++i) {
          const auto ii = static_cast<std::size_t>(i);
          s.mean_terms[ii] = sums[ii] / s.runs_ok;
          s.mean_total += report.alpha[ii] * s.mean_terms[ii];
        }
      } else {
        s.mean_terms.fill(std::numeric_limits<double>::quiet_NaN());
        s.mean_total = std::numeric_limits<double>::quiet_NaN();
      }
      summary.samplers.push_back(std::move(s));
    }
    if (const SamplerSummary* bg = summary.find(SamplerKind::kBasicGaussian);
        bg != nullptr && bg->runs_ok > 0 && bg->mean_total > 0.0) {
      const double s_bg = bg->mean_total;
      for (auto& s : summary.samplers) {
        if (s.runs_ok > 0) s.reduction_vs_bg = (s_bg - s.mean_total) / s_bg;
      }
    }
    report.scenarios.push_back(std::move(summary));
  }
  return report;
}

std::string report_to_csv(const BenchmarkReport& report) {
  std::ostringstream out;
  out << "# cost terms: per-run mean over control steps of the planned "
         "trajectory costs, averaged over successful runs\n";
  out << "# master_seed=" << report.master_seed << " runs=" << report.runs
      << " config_hash=" << report.config_hash << '\n';
  out << "scenario,sampler,runs_ok,runs_aborted,c1,c2,c3,c4,c5,S,"
         "w_c1,w_c2,w_c3,w_c4,w_c5,reduction_vs_bg,min_de,collisions\n";
  for (const auto& sc : report.scenarios) {
    for (const auto& s : sc.samplers) {
      out << sc.scenario_id << ',' << to_string(s.sampler) << ',' << s.runs_ok
          << ',' << s.runs_aborted;
      for (double c : s.mean_terms) out << ',' << format_double(c);
      out << ',' << format_double(s.mean_total);
      for (std::size_t i = 0; i < s.mean_terms.size(); ++i) {
        out << ',' << format_double(report.alpha[i] * s.mean_terms[i]);
      }
      out << ','
          << (s.reduction_vs_bg ? format_double(*s.reduction_vs_bg) : std::string("nan"))
          << ',' << format_double(s.min_scaled_distance) << ',' << s.collisions
          << '\n';
    }
  }
  return out.str();
}

std::string report_to_json(const BenchmarkReport& report) {
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  json j;
  j["cost_semantics"] =
      "per-run mean over control steps of the planned trajectory costs, "
      "averaged over successful runs; terms unweighted, S weighted by alpha";
  j["master_seed"] = report.master_seed;
  j["runs"] = report.runs;
  j["config_hash"] = report.config_hash;
  j["alpha"] = report.alpha;
  json scenarios = json::array();
  for (const auto& sc : report.scenarios) {
    json rows = json::array();
    for (const auto& s : sc.samplers) {
      json terms = json::array();
      for (double c : s.mean_terms) terms.push_back(num(c));
      json totals = json::array();
      for (double t : s.run_totals) totals.push_back(num(t));
      rows.push_back({{"sampler", std::string(to_string(s.sampler))},
                      {"runs_ok", s.runs_ok},
                      {"runs_aborted", s.runs_aborted},
                      {"mean_terms", terms},
                      {"S", num(s.mean_total)},
                      {"reduction_vs_bg",
                       s.reduction_vs_bg ? num(*s.reduction_vs_bg) : json(nullptr)},
                      {"min_de", num(s.min_scaled_distance)},
                      {"collisions", s.collisions},
                      {"run_totals", totals},
                      {"abort_reasons", s.abort_reasons}});
    }
    scenarios.push_back({{"scenario", sc.scenario_id}, {"samplers", rows}});
  }
  j["scenarios"] = scenarios;
  return j.dump(2) + "\n";
}

std::string export_spatial_csv(const RunLog& log) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "t,s_x,s_y,v,psi\n";
  for (const auto& s : log.steps) {
    out << s.t << ',' << s.state.s_x << ',' << s.state.s_y << ',' << s.state.v
        << ',' << s.state.psi << '\n';
  }
  return out.str();
}

}  // namespace nfmppi
