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

// End-to-end acceptance run. Trains the four flow models, runs the sampler
// benchmarks on the built-in static and dynamic scenarios and checks the
// numerical properties of the flow, pairing and planner code. Prints one
// PASS/FAIL line per criterion and exits non-zero if any criterion fails.
//
//   nfmppi_acceptance --work-dir DIR [--cli PATH] [--runs R] [--seed S]

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "flow_checks.hpp"
#include "mppi_checks.hpp"
#include "nfmppi/harness.hpp"
#include "oracles.hpp"
#include "pairing_check.hpp"

namespace fs = std::filesystem;
using namespace nfmppi;

namespace {

struct Options {
  fs::path work_dir = "acceptance_work";
  std::string cli;
  int runs = 10;
  std::uint64_t seed = 0;
};

struct Verdict {
  int id;
  bool pass;
  std::string title;
  std::string detail;
};

std::vector<Verdict> g_verdicts;

void report(int id, bool pass, std::string title, std::string detail) {
  std::cout << (pass ? "PASS" : "FAIL") << " criterion " << id << ": " << title
            << " | " << detail << std::endl;
  g_verdicts.push_back({id, pass, std::move(title), std::move(detail)});
}

void note(const std::string& line) { std::cout << "  note: " << line << std::endl; }

std::string fmt(double v, int precision = 4) {
  std::ostringstream s;
  s << std::setprecision(precision) << v;
  return s.str();
}

std::string percent(double v) { return fmt(100.0 * v, 3) + "%"; }

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// --- criterion 4 -----------------------------------------------------------

void check_flow_correctness() {
  std::cerr << "[acceptance] flow correctness suite\n";
  const FlowModel big = testing::random_flow(80, 16, 128, 1, 0.05);
  const auto rt = testing::round_trip_error(big, 1000, 2);

  double worst_logdet = 0.0;
  for (int dim = 2; dim <= 6; ++dim) {
    const FlowModel m = testing::random_flow(dim, 4, 16, 10 + dim);
    const Eigen::MatrixXd z = testing::normal_rows(4, dim, 20 + dim);
    for (int r = 0; r < z.rows(); ++r) {
      worst_logdet = std::max(worst_logdet, testing::logdet_fd_error(m, z.row(r).transpose()));
    }
  }

  const FlowModel small = testing::random_flow(4, 2, 8, 3);
  const double grad_err =
      testing::gradient_fd_error(small, testing::normal_rows(32, 4, 4) * 1.5);

  const FlowModel two = testing::random_flow(2, 4, 8, 5);
  const double mass = testing::density_mass_2d(two, 14.0, 1400);

  const bool pass = rt.max_abs < 1e-6 && worst_logdet < 1e-4 && grad_err < 1e-4 &&
                    std::abs(mass - 1.0) < 0.01;
  report(4, pass, "flow correctness",
         "inverse(forward) max-abs " + fmt(rt.max_abs, 3) + " (< 1e-6), logdet vs FD Jacobian " +
             fmt(worst_logdet, 3) + " rel (< 1e-4), gradient vs central diff " +
             fmt(grad_err, 3) + " rel (< 1e-4), dim-2 quadrature mass " + fmt(mass, 6) +
             " (within 1%)");
  note("logdet(forward) + logdet(inverse) max-abs " + fmt(rt.max_logdet_sum, 3));
}

// --- criterion 5 -----------------------------------------------------------

struct TrainedFlows {
  std::map<std::string, FlowTrainingOutput> outputs;  // "a2df_u1", ...
  fs::path dir;
};

TrainedFlows train_flows(const HarnessConfig& cfg, const Options& opt) {
  TrainedFlows t;
  t.dir = opt.work_dir / "flows";
  fs::create_directories(t.dir);
  for (auto kind : {Provenance::kA2df, Provenance::kAil}) {
    for (int ch = 1; ch <= 2; ++ch) {
      const std::string name =
          std::string(kind == Provenance::kA2df ? "a2df" : "ail") + "_u" + std::to_string(ch);
      std::cerr << "[acceptance] training " << name << "\n";
      FlowTrainingOutput out = train_flow_model(kind, ch, cfg.flow_training, cfg.planner.horizon,
                                                cfg.planner.model.dt, opt.seed);
      save(out.result.model, t.dir / (name + ".nfm"));
      write_loss_csv(out.result.curve, t.dir / (name + ".loss.csv"));
      t.outputs.emplace(name, std::move(out));
    }
  }
  return t;
}

std::vector<double> row_sums(const Eigen::MatrixXd& m) {
  const Eigen::VectorXd s = m.rowwise().sum();
  return {s.data(), s.data() + s.size()};
}

void check_flow_learning(const TrainedFlows& flows, const HarnessConfig& cfg,
                         const Options& opt) {
  bool pass = true;
  std::string detail;
  for (const char* name : {"a2df_u1", "a2df_u2"}) {
    const FlowTrainingOutput& out = flows.outputs.at(name);
    const LossCurve& c = out.result.curve;
    Rng rng(derive_key(opt.seed, 0x5A3, hash_string(name)));
    const std::vector<double> model_sums = row_sums(out.result.model.sample(1000, rng));
    const std::vector<double> held_out = row_sums(out.test_rows);
    const double d = testing::ks_statistic(model_sums, held_out);
    const double p = testing::ks_p_value(d, model_sums.size(), held_out.size());
    const bool ok = c.best_test_nll() < c.initial_test_nll() && p >= 0.01;
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += std::string(name) + ": test NLL " + fmt(c.initial_test_nll(), 6) + " -> " +
              fmt(c.best_test_nll(), 6) + " (best step " + std::to_string(c.best_step) +
              "), KS D=" + fmt(d, 3) + " p=" + fmt(p, 3) + " vs " +
              std::to_string(held_out.size()) + " held-out rows";
  }
  report(5, pass, "flow learning on the A2DF dataset (B=" + std::to_string(cfg.flow_training.rows) +
                      ", 60/40 split)",
         detail);

  for (const char* name : {"ail_u1", "ail_u2"}) {
    const FlowTrainingOutput& out = flows.outputs.at(name);
    const LossCurve& c = out.result.curve;
    Rng rng(derive_key(opt.seed, 0x5A3, hash_string(name)));
    const std::vector<double> model_sums = row_sums(out.result.model.sample(1000, rng));
    const std::vector<double> held_out = row_sums(out.test_rows);
    const double d = testing::ks_statistic(model_sums, held_out);
    note(std::string(name) + ": test NLL " + fmt(c.initial_test_nll(), 6) + " -> " +
         fmt(c.best_test_nll(), 6) + ", KS vs held-out p=" +
         fmt(testing::ks_p_value(d, model_sums.size(), held_out.size()), 3));
  }
  // Same statistic against a fresh batch from the generator.
  for (int ch = 1; ch <= 2; ++ch) {
    const std::string name = "a2df_u" + std::to_string(ch);
    const double eps = cfg.flow_training.a2df_eps_draw(ch - 1);
    const TrainingBatch fresh = generate_a2df(1000, cfg.planner.horizon,
                                              {cfg.flow_training.a2df_eps_switch, eps, eps},
                                              cfg.planner.model.dt,
                                              derive_key(opt.seed, 0xF2E5, static_cast<std::uint64_t>(ch)));
    Rng rng(derive_key(opt.seed, 0x5A4, static_cast<std::uint64_t>(ch)));
    const std::vector<double> model_sums =
        row_sums(flows.outputs.at(name).result.model.sample(1000, rng));
    const std::vector<double> gen_sums = row_sums(fresh.rows);
    const double d = testing::ks_statistic(model_sums, gen_sums);
    note(name + ": KS vs 1000 fresh generator rows D=" + fmt(d, 3) +
         " p=" + fmt(testing::ks_p_value(d, 1000, 1000), 3));
  }
}

// --- criterion 6 -----------------------------------------------------------

void check_pairing(const Options& opt) {
  const double r = testing::pairing_correlation(400, 80, 220.0, 100000,
                                                derive_key(opt.seed, 0x9A1));
  report(6, r < -0.2, "heuristic pairing anti-correlation",
         "Pearson r = " + fmt(r, 4) + " over 1e5 pairings, B=400, eps_switch=220 (< -0.2)");
}

// --- criterion 7 -----------------------------------------------------------

void check_mppi_limits(const HarnessConfig& cfg, const Options& opt) {
  std::cerr << "[acceptance] planner limit cases\n";
  PlannerConfig p = planner_for(cfg, SamplerKind::kBasicGaussian);
  const double argmin = testing::argmin_limit_error(p, derive_key(opt.seed, 0x7A));
  const double uniform = testing::equal_cost_error(p, derive_key(opt.seed, 0x7B));
  const double nominal = testing::zero_noise_error(p, derive_key(opt.seed, 0x7C));
  report(7, argmin < 1e-6 && uniform == 0.0 && nominal == 0.0, "MPPI limit oracles",
         "lambda=1e-9 vs argmin sample " + fmt(argmin, 3) + " (< 1e-6), equal costs vs uniform "
         "average " + fmt(uniform, 3) + " (exact), K=1 zero noise vs U_bar " + fmt(nominal, 3) +
         " (exact)");
}

// --- criteria 1-3 ----------------------------------------------------------

std::string describe(const ScenarioSummary& sc) {
  std::string out;
  for (const auto& s : sc.samplers) {
    if (!out.empty()) out += ", ";
    out += std::string(to_string(s.sampler)) + " S=" + fmt(s.mean_total, 5);
    if (s.reduction_vs_bg && s.sampler != SamplerKind::kBasicGaussian) {
      out += " (" + percent(-*s.reduction_vs_bg) + ")";
    }
    if (s.runs_aborted > 0) out += " [" + std::to_string(s.runs_aborted) + " aborted]";
  }
  return out;
}

constexpr SamplerKind kNonBg[] = {SamplerKind::kInputLifting, SamplerKind::kTwoDof,
                                  SamplerKind::kFlowA2df, SamplerKind::kFlowAil};

void check_benchmarks(const HarnessConfig& cfg, const Options& opt) {
  const std::vector<SamplerKind> samplers(kAllSamplers.begin(), kAllSamplers.end());
  const std::vector<Scenario> scenarios = {build_static_scenario(1), build_dynamic_scenario(1)};
  const BenchmarkReport report_data = run_benchmark(
      cfg, scenarios, samplers, opt.runs, opt.seed,
      [](const std::string& line) { std::cerr << "[acceptance] " << line << "\n"; });
  {
    std::ofstream(opt.work_dir / "benchmark.csv") << report_to_csv(report_data);
    std::ofstream(opt.work_dir / "benchmark.json") << report_to_json(report_data);
  }
  const ScenarioSummary& st = report_data.scenarios[0];
  const ScenarioSummary& dy = report_data.scenarios[1];
  const SamplerSummary* bg = st.find(SamplerKind::kBasicGaussian);

  // 1: ranking on static:1.
  bool pass1 = bg->runs_ok == opt.runs;
  const SamplerSummary* best = nullptr;
  for (const auto& s : st.samplers) {
    pass1 = pass1 && s.runs_aborted == 0;
    if (best == nullptr || s.mean_total < best->mean_total) best = &s;
  }
  for (SamplerKind k : kNonBg) {
    const SamplerSummary* s = st.find(k);
    pass1 = pass1 && s->reduction_vs_bg && *s->reduction_vs_bg >= 0.15;
  }
  pass1 = pass1 && is_flow_sampler(best->sampler);
  report(1, pass1, "static:1 ranking, R=" + std::to_string(opt.runs),
         describe(st) + "; minimum: " + std::string(to_string(best->sampler)) +
             " (need each non-BG >= 15% below BG and an NF minimum)");

  // 2: smoothness collapse.
  const double c3_bg = bg->mean_terms[2];
  const double r_il = st.find(SamplerKind::kInputLifting)->mean_terms[2] / c3_bg;
  const double r_nf = st.find(SamplerKind::kFlowAil)->mean_terms[2] / c3_bg;
  report(2, r_il < 0.05 && r_nf < 0.05, "static:1 smoothness cost c3",
         "c3 bg " + fmt(c3_bg, 5) + ", il/bg " + percent(r_il) + ", nf-ail/bg " +
             percent(r_nf) + " (need < 5%)");

  // 3: dynamic scenario.
  bool pass3 = dy.find(SamplerKind::kBasicGaussian)->runs_ok == opt.runs;
  std::string collisions;
  for (const auto& s : dy.samplers) {
    collisions += (collisions.empty() ? "" : ", ") + std::string(to_string(s.sampler)) + " " +
                  std::to_string(s.collisions) + " (min d_e " + fmt(s.min_scaled_distance, 3) +
                  ")";
  }
  for (SamplerKind k : kNonBg) {
    const SamplerSummary* s = dy.find(k);
    pass3 = pass3 && s->runs_aborted == 0 && s->collisions == 0 && s->reduction_vs_bg &&
            *s->reduction_vs_bg >= 0.10;
  }
  report(3, pass3, "dynamic:1 cost reduction and collisions, R=" + std::to_string(opt.runs),
         describe(dy) + "; collisions: " + collisions +
             " (need each non-BG >= 10% below BG, no run with d_e <= 0.25)");
}

// --- criterion 8 -----------------------------------------------------------

void check_determinism(const TrainedFlows& flows, const Options& opt) {
  std::cerr << "[acceptance] determinism\n";
  Scenario sc = build_static_scenario(1);
  sc.id = "static-1-short";
  sc.t_end = 3.0;
  const fs::path scenario_file = opt.work_dir / "static-1-short.json";
  save_scenario(sc, scenario_file);

  std::string detail;
  bool pass = true;
  if (!opt.cli.empty()) {
    for (const char* tag : {"a", "b"}) {
      std::ostringstream cmd;
      cmd << '"' << opt.cli << "\" benchmark --scenario \"" << scenario_file.string()
          << "\" --runs 2 --seed 5 --flows \"" << flows.dir.string() << "\" --quiet --out \""
          << (opt.work_dir / (std::string("det_") + tag)).string() << '"';
      const int rc = std::system(cmd.str().c_str());
      if (rc != 0) {
        pass = false;
        detail = "benchmark command failed with status " + std::to_string(rc) + "; ";
      }
    }
    for (const char* ext : {".csv", ".json"}) {
      const std::string a = read_file(opt.work_dir / (std::string("det_a") + ext));
      const std::string b = read_file(opt.work_dir / (std::string("det_b") + ext));
      const bool same = !a.empty() && a == b;
      pass = pass && same;
      detail += std::string("report") + ext + " " + (same ? "identical" : "DIFFERS") + " (" +
                std::to_string(a.size()) + " bytes); ";
    }
    detail += "two CLI benchmark executions, all samplers, R=2, 3 s scenario";
  } else {
    HarnessConfig cfg = default_config();
    cfg.flow_models[SamplerKind::kFlowA2df] = {flows.dir / "a2df_u1.nfm", flows.dir / "a2df_u2.nfm"};
    cfg.flow_models[SamplerKind::kFlowAil] = {flows.dir / "ail_u1.nfm", flows.dir / "ail_u2.nfm"};
    const std::vector<SamplerKind> all(kAllSamplers.begin(), kAllSamplers.end());
    const auto a = run_benchmark(cfg, {sc}, all, 2, 5);
    const auto b = run_benchmark(cfg, {sc}, all, 2, 5);
    pass = report_to_csv(a) == report_to_csv(b) && report_to_json(a) == report_to_json(b);
    detail = std::string("in-process benchmark twice: reports ") +
             (pass ? "identical" : "DIFFER");
  }
  report(8, pass, "deterministic benchmark reports", detail);
}

Options parse(int argc, char** argv) {
  Options o;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    auto value = [&]() -> std::string {
      if (i + 1 >= argc) {
        std::cerr << "missing value for " << a << "\n";
        std::exit(2);
      }
      return argv[++i];
    };
    if (a == "--work-dir") {
      o.work_dir = value();
    } else if (a == "--cli") {
      o.cli = value();
    } else if (a == "--runs") {
      o.runs = std::stoi(value());
    } else if (a == "--seed") {
      o.seed = std::stoull(value());
    } else {
      std::cerr << "usage: nfmppi_acceptance --work-dir DIR [--cli PATH] [--runs R] [--seed S]\n";
      std::exit(2);
    }
  }
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const Options opt = parse(argc, argv);
  fs::create_directories(opt.work_dir);
  try {
    HarnessConfig cfg = default_config();
    std::cout << "acceptance: master seed " << opt.seed << ", runs " << opt.runs
              << ", config hash " << config_hash(cfg) << std::endl;

    check_flow_correctness();
    check_pairing(opt);
    check_mppi_limits(cfg, opt);

    const TrainedFlows flows = train_flows(cfg, opt);
    check_flow_learning(flows, cfg, opt);

    cfg.flow_models[SamplerKind::kFlowA2df] = {flows.dir / "a2df_u1.nfm",
                                               flows.dir / "a2df_u2.nfm"};
    cfg.flow_models[SamplerKind::kFlowAil] = {flows.dir / "ail_u1.nfm",
                                              flows.dir / "ail_u2.nfm"};
    check_benchmarks(cfg, opt);
    check_determinism(flows, opt);
  } catch (const std::exception& e) {
    std::cout << "acceptance aborted: " << e.what() << std::endl;
    return 1;
  }

  std::sort(g_verdicts.begin(), g_verdicts.end(),
            [](const Verdict& a, const Verdict& b) { return a.id < b.id; });
  std::cout << "\nsummary\n";
  int failed = 0;
  for (const auto& v : g_verdicts) {
    std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << v.id << ": " << v.title << "\n";
    failed += v.pass ? 0 : 1;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed")
            << std::endl;
  return failed == 0 ? 0 : 1;
}
