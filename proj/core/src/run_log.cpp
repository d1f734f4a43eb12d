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

#include <istream>
#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

#include "nfmppi/error.hpp"
#include "nfmppi/mppi.hpp"

namespace nfmppi {

namespace {

using nlohmann::json;

json costs_json(const CostBreakdown& c) {
  return {{"c1", c.terms[0]}, {"c2", c.terms[1]}, {"c3", c.terms[2]},
          {"c4", c.terms[3]}, {"c5", c.terms[4]}, {"S", c.total}};
}

CostBreakdown costs_from(const json& j) {
  CostBreakdown c;
  c.terms = {j.at("c1").get<double>(), j.at("c2").get<double>(),
             j.at("c3").get<double>(), j.at("c4").get<double>(),
             j.at("c5").get<double>()};
  c.total = j.at("S").get<double>();
  return c;
}

// JSON has no infinity; encode absent distances as null.
json maybe_number(double v) {
  return std::isfinite(v) ? json(v) : json(nullptr);
}

}  // namespace

void write_run_log(const RunLog& log, std::ostream& out) {
  const json header = {{"type", "header"},
                       {"scenario", log.scenario_id},
                       {"sampler", log.sampler},
                       {"seed", log.seed},
                       {"dt", log.dt},
                       {"alpha", log.alpha}};
  out << header.dump() << '\n';
  for (const auto& s : log.steps) {
    const json rec = {
        {"type", "step"},
        {"t", s.t},
        {"state",
         {{"s_x", s.state.s_x}, {"s_y", s.state.s_y}, {"delta", s.state.delta},
          {"v", s.state.v}, {"psi", s.state.psi}}},
        {"input", {{"v_delta", s.input.v_delta}, {"a", s.input.a}}},
        {"costs", costs_json(s.plan_cost)},
        {"ess", s.ess},
        {"fallback", s.fallback},
        {"min_de", maybe_number(s.min_scaled_distance)}};
    out << rec.dump() << '\n';
  }
  const json summary = {{"type", "summary"},
                        {"steps", log.steps.size()},
                        {"aborted", log.aborted},
                        {"abort_reason", log.abort_reason},
                        {"mean_costs", costs_json(log.mean_plan_cost())},
                        {"min_de", maybe_number(log.min_scaled_distance())}};
  out << summary.dump() << '\n';
}

RunLog read_run_log(std::istream& in) {
  RunLog log;
  std::string line;
  bool have_header = false;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      const std::string type = j.at("type").get<std::string>();
      if (type == "header") {
        log.scenario_id = j.at("scenario").get<std::string>();
        log.sampler = j.at("sampler").get<std::string>();
        log.seed = j.at("seed").get<std::uint64_t>();
        log.dt = j.at("dt").get<double>();
        log.alpha = j.at("alpha").get<std::array<double, kNumCostTerms>>();
        have_header = true;
      } else if (type == "step") {
        StepRecord s;
        s.t = j.at("t").get<double>();
        const json& st = j.at("state");
        s.state = {st.at("s_x").get<double>(), st.at("s_y").get<double>(),
                   st.at("delta").get<double>(), st.at("v").get<double>(),
                   st.at("psi").get<double>()};
        s.input = {j.at("input").at("v_delta").get<double>(),
                   j.at("input").at("a").get<double>()};
        s.plan_cost = costs_from(j.at("costs"));
        s.ess = j.at("ess").get<double>();
        s.fallback = j.at("fallback").get<bool>();
        s.min_scaled_distance =
            j.at("min_de").is_null() ? std::numeric_limits<double>::infinity()
                                     : j.at("min_de").get<double>();
        log.steps.push_back(s);
      } else if (type == "summary") {
        log.aborted = j.at("aborted").get<bool>();
        log.abort_reason = j.at("abort_reason").get<std::string>();
      } else {
        throw FormatError("unknown record type '" + type + "'");
      }
    } catch (const json::exception& e) {
      throw FormatError("run log line " + std::to_string(line_no) + ": " +
                        e.what());
    }
  }
  if (!have_header) throw FormatError("run log: missing header record");
  return log;
}

}  // namespace nfmppi
