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

#ifndef NFMPPI_TRAINING_DATA_HPP_
#define NFMPPI_TRAINING_DATA_HPP_

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <utility>

#include <Eigen/Core>

#include "nfmppi/rng.hpp"

namespace nfmppi {

enum class Provenance { kA2df, kAil };

std::string_view to_string(Provenance p) noexcept;

// Variances of the dataset generators. For A2DF both groups are drawn;
// eps_draw_1 feeds the integrated group and eps_draw_2 the additive group.
// AIL uses eps_draw_1 only.
struct HeuristicParams {
  double eps_switch = 220.0;
  double eps_draw_1 = 0.03;
  double eps_draw_2 = 0.03;

  void validate() const;
};

struct TrainingBatch {
  Eigen::MatrixXd rows;  // B x N, one input channel
  Provenance provenance = Provenance::kA2df;
  std::uint64_t seed = 0;
  HeuristicParams params;
  double dt = 0.1;
};

enum class SortDirection { kAscending, kDescending };

// rho_b = sum of row b.
Eigen::VectorXd trajectory_sums(const Eigen::MatrixXd& m);

// Rows reordered so that `measure` is monotone; ties keep original order.
Eigen::MatrixXd sort_by_measure(const Eigen::MatrixXd& m,
                                const Eigen::VectorXd& measure,
                                SortDirection direction);

// Pairing rule. Returns zero-based indices (b1, b2): b1 uniform over the B
// rows, b2 = clip(ceil(N(b1, eps_switch)), 1, B) in one-based terms.
std::pair<int, int> draw_via_heuristic(int rows, double eps_switch, Rng& rng);

// Sort `first` ascending and `second` descending by trajectory sums, then
// build each output row as [first_sorted(b1), second_sorted(b2)].
Eigen::MatrixXd join_trajectories(const Eigen::MatrixXd& first,
                                  const Eigen::MatrixXd& second,
                                  double eps_switch, Rng& rng);

// Adaptive two-degree-of-freedom dataset: an integrated derivative-level
// group joined with an additive group via the pairing rule.
TrainingBatch generate_a2df(int rows, int horizon, const HeuristicParams& h,
                            double dt, std::uint64_t seed);

// Adaptive input-lifting dataset: four segments of length horizon / 4 joined
// three times. Rows are derivative-level trajectories.
TrainingBatch generate_ail(int rows, int horizon, double eps_draw,
                           double eps_switch, std::uint64_t seed);

void write_csv(const TrainingBatch& batch, const std::filesystem::path& path);

}  // namespace nfmppi

#endif  // NFMPPI_TRAINING_DATA_HPP_
