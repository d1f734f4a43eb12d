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

#include "nfmppi/training_data.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <vector>

#include "nfmppi/error.hpp"

namespace nfmppi {

namespace {

Eigen::MatrixXd draw_gaussian(Rng& rng, int rows, int cols, double variance) {
  const double stddev = std::sqrt(variance);
  Eigen::MatrixXd m(rows, cols);
  for (int b = 0; b < rows; ++b) {
    for (int i = 0; i < cols; ++i) m(b, i) = stddev * rng.normal();
  }
  return m;
}

}  // namespace

std::string_view to_string(Provenance p) noexcept {
  return p == Provenance::kA2df ? "A2DF" : "AIL";
}

void HeuristicParams::validate() const {
  if (!(eps_switch >= 0.0) || !(eps_draw_1 >= 0.0) || !(eps_draw_2 >= 0.0)) {
    throw InvalidArgument("heuristic variances must be non-negative");
  }
}

Eigen::VectorXd trajectory_sums(const Eigen::MatrixXd& m) {
  return m.rowwise().sum();
}

Eigen::MatrixXd sort_by_measure(const Eigen::MatrixXd& m,
                                const Eigen::VectorXd& measure,
                                SortDirection direction) {
  if (measure.size() != m.rows()) {
    throw InvalidArgument("sort_by_measure: measure length != row count");
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(m.rows()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  if (direction == SortDirection::kAscending) {
    std::stable_sort(order.begin(), order.end(),
                     [&](auto a, auto b) { return measure(a) < measure(b); });
  } else {
    std::stable_sort(order.begin(), order.end(),
                     [&](auto a, auto b) { return measure(a) > measure(b); });
  }
  return m(order, Eigen::all);
}

std::pair<int, int> draw_via_heuristic(int rows, double eps_switch, Rng& rng) {
  if (rows < 1) throw InvalidArgument("draw_via_heuristic: need rows >= 1");
  if (!(eps_switch >= 0.0)) {
    throw InvalidArgument("draw_via_heuristic: eps_switch must be >= 0");
  }
  const auto b1 = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(rows))) + 1;
  const double b2_real = static_cast<double>(b1) + std::sqrt(eps_switch) * rng.normal();
  const double b2 = std::clamp(std::ceil(b2_real), 1.0, static_cast<double>(rows));
  return {b1 - 1, static_cast<int>(b2) - 1};
}

Eigen::MatrixXd join_trajectories(const Eigen::MatrixXd& first,
                                  const Eigen::MatrixXd& second,
                                  double eps_switch, Rng& rng) {
  if (first.rows() != second.rows()) {
    throw InvalidArgument("join_trajectories: row counts differ");
  }
  if (first.rows() < 1) throw InvalidArgument("join_trajectories: no rows");
  const Eigen::MatrixXd a = sort_by_measure(first, trajectory_sums(first),
                                            SortDirection::kAscending);
  const Eigen::MatrixXd c = sort_by_measure(second, trajectory_sums(second),
                                            SortDirection::kDescending);
  const auto rows = static_cast<int>(first.rows());
  Eigen::MatrixXd out(rows, first.cols() + second.cols());
  for (int b = 0; b < rows; ++b) {
    const auto [b1, b2] = draw_via_heuristic(rows, eps_switch, rng);
    out.row(b).head(first.cols()) = a.row(b1);
    out.row(b).tail(second.cols()) = c.row(b2);
  }
  return out;
}

TrainingBatch generate_a2df(int rows, int horizon, const HeuristicParams& h,
                            double dt, std::uint64_t seed) {
  if (rows < 1 || horizon < 1) {
    throw InvalidArgument("generate_a2df: rows and horizon must be >= 1");
  }
  if (!(dt > 0.0)) throw InvalidArgument("generate_a2df: dt must be > 0");
  h.validate();
  Rng rng(derive_key(seed, 0xA2DF));
  const Eigen::MatrixXd g1 = draw_gaussian(rng, rows, horizon, h.eps_draw_1);
  const Eigen::MatrixXd g2 = draw_gaussian(rng, rows, horizon, h.eps_draw_2);
  const Eigen::MatrixXd s1 =
      sort_by_measure(g1, trajectory_sums(g1), SortDirection::kAscending);
  const Eigen::MatrixXd s2 =
      sort_by_measure(g2, trajectory_sums(g2), SortDirection::kDescending);

  TrainingBatch batch{Eigen::MatrixXd(rows, horizon), Provenance::kA2df, seed,
                      h, dt};
  for (int b = 0; b < rows; ++b) {
    const auto [b1, b2] = draw_via_heuristic(rows, h.eps_switch, rng);
    // 2DF composition: integrate group 1 from zero, add group 2.
    double v = 0.0;
    for (int i = 0; i < horizon; ++i) {
      if (i > 0) v += s1(b1, i - 1) * dt;
      batch.rows(b, i) = v + s2(b2, i);
    }
  }
  return batch;
}

TrainingBatch generate_ail(int rows, int horizon, double eps_draw,
                           double eps_switch, std::uint64_t seed) {
  if (rows < 1 || horizon < 4) {
    throw InvalidArgument("generate_ail: need rows >= 1 and horizon >= 4");
  }
  if (horizon % 4 != 0) {
    throw InvalidArgument("generate_ail: horizon must be divisible by four");
  }
  HeuristicParams h{eps_switch, eps_draw, eps_draw};
  h.validate();
  Rng rng(derive_key(seed, 0xA11));
  const int segment = horizon / 4;
  std::array<Eigen::MatrixXd, 4> groups;
  for (auto& g : groups) g = draw_gaussian(rng, rows, segment, eps_draw);

  Eigen::MatrixXd joined = join_trajectories(groups[0], groups[1], eps_switch, rng);
  joined = join_trajectories(joined, groups[2], eps_switch, rng);
  joined = join_trajectories(joined, groups[3], eps_switch, rng);
  return TrainingBatch{std::move(joined), Provenance::kAil, seed, h, 0.0};
}

void write_csv(const TrainingBatch& batch, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << std::setprecision(17);
  for (Eigen::Index b = 0; b < batch.rows.rows(); ++b) {
    for (Eigen::Index i = 0; i < batch.rows.cols(); ++i) {
      if (i > 0) out << ',';
      out << batch.rows(b, i);
    }
    out << '\n';
  }
}

}  // namespace nfmppi
