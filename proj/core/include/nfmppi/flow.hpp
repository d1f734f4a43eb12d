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

#ifndef NFMPPI_FLOW_HPP_
#define NFMPPI_FLOW_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "nfmppi/rng.hpp"

namespace nfmppi {

// Which coordinates a coupling layer passes through unchanged (and feeds to
// its conditioner). The remaining coordinates are scaled and shifted.
enum class MaskKind : std::uint8_t {
  kEven = 0,       // even indices pass through
  kOdd = 1,        // odd indices pass through
  kLowerHalf = 2,  // first floor(dim/2) indices pass through
  kUpperHalf = 3,  // last ceil(dim/2) indices pass through
};

// Affine coupling transform
//
//   y_p = x_p
//   y_a = x_a * exp(s(x_p)) + t(x_p)
//
// with s bounded to (-max_log_scale, max_log_scale) by a scaled tanh. The
// conditioner is a two-hidden-layer tanh network producing [raw_s, t].
class CouplingLayer {
 public:
  CouplingLayer(int dim, MaskKind mask, int hidden);

  int dim() const noexcept { return dim_; }
  int hidden() const noexcept { return hidden_; }
  MaskKind mask() const noexcept { return mask_; }
  const std::vector<int>& passive() const noexcept { return passive_; }
  const std::vector<int>& active() const noexcept { return active_; }

  std::size_t num_params() const noexcept;

  // Weights are stored (out x in).
  Eigen::MatrixXd w1, w2, w3;
  Eigen::VectorXd b1, b2, b3;

 private:
  int dim_;
  int hidden_;
  MaskKind mask_;
  std::vector<int> passive_;
  std::vector<int> active_;
};

// Data-side affine transform x = shift + L y, where L is lower triangular
// with diagonal exp(log_diag). Only the strictly lower part of `lower` is
// read; its diagonal and upper triangle are kept at zero.
struct AffineLayer {
  explicit AffineLayer(int dim);

  Eigen::MatrixXd matrix() const;  // L
  std::size_t num_params() const noexcept;

  Eigen::VectorXd shift;
  Eigen::VectorXd log_diag;
  Eigen::MatrixXd lower;
};

struct FlowMetadata {
  int channel = 0;              // 1 = steering rate, 2 = acceleration
  std::string provenance;       // e.g. "A2DF", "AIL"
  std::string details = "{}";   // JSON blob: generation and training settings
};

// Batched transform result; rows are samples.
struct FlowBatch {
  Eigen::MatrixXd values;
  Eigen::VectorXd logdet;
};

/// Stack of affine coupling layers over R^dim with a standard-normal base,
/// followed by a triangular affine layer on the data side.
///
/// forward() maps base samples z to data space x and returns
/// log|det dx/dz|; inverse() maps x back to z and returns log|det dz/dx|.
/// A freshly constructed model is the identity map (output layers zeroed).
class FlowModel {
 public:
  static constexpr double kMaxLogScale = 2.0;

  FlowModel(int dim, int num_layers, int hidden, std::uint64_t init_seed = 0);
  // Assembles a model from explicit layers (used by the file loader).
  FlowModel(int dim, std::vector<CouplingLayer> layers, AffineLayer affine,
            FlowMetadata metadata);

  int dim() const noexcept { return dim_; }
  int num_layers() const noexcept { return static_cast<int>(layers_.size()); }
  int hidden() const noexcept;

  const std::vector<CouplingLayer>& layers() const noexcept { return layers_; }
  std::vector<CouplingLayer>& layers() noexcept { return layers_; }
  const AffineLayer& affine() const noexcept { return affine_; }
  AffineLayer& affine() noexcept { return affine_; }

  const FlowMetadata& metadata() const noexcept { return metadata_; }
  void set_metadata(FlowMetadata m) { metadata_ = std::move(m); }

  FlowBatch forward(const Eigen::MatrixXd& z) const;
  FlowBatch inverse(const Eigen::MatrixXd& x) const;
  Eigen::VectorXd log_prob(const Eigen::MatrixXd& x) const;

  // Single-vector conveniences.
  std::pair<Eigen::VectorXd, double> forward(const Eigen::VectorXd& z) const;
  std::pair<Eigen::VectorXd, double> inverse(const Eigen::VectorXd& x) const;
  double log_prob(const Eigen::VectorXd& x) const;

  // K forward-transformed base draws, consumed row by row from `rng`.
  Eigen::MatrixXd sample(int count, Rng& rng) const;

  // Flat parameter vector, coupling layer by layer: w1, b1, w2, b2, w3, b3
  // (column-major within each matrix); then the affine layer: shift,
  // log_diag, strictly lower entries of L in column-major order.
  std::size_t num_params() const noexcept;
  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> params);

  // Mean negative log-likelihood over the rows of `x`; when `grad` is
  // non-empty it receives d(mean NLL)/d(parameters).
  double nll_and_gradient(const Eigen::MatrixXd& x, std::span<double> grad) const;

 private:
  void check_dim(const Eigen::MatrixXd& m, const char* what) const;

  int dim_;
  std::vector<CouplingLayer> layers_;
  AffineLayer affine_;
  FlowMetadata metadata_;
};

// Log density of N(0, I) evaluated row-wise.
Eigen::VectorXd standard_normal_log_prob(const Eigen::MatrixXd& z);

struct TrainConfig {
  int max_steps = 2000;
  int patience = 50;            // steps without test improvement before stopping
  double train_fraction = 0.6;  // remaining rows form the test split
  int batch_size = 0;           // 0 selects full-batch descent
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  int num_layers = 16;
  int hidden = 128;
  // Start the affine layer at the per-coordinate mean and standard deviation
  // of the training rows.
  bool data_init = true;

  void validate() const;
};

struct LossCurve {
  // Entry i holds the losses of the parameters after step[i] updates.
  std::vector<int> step;
  std::vector<double> train_nll;
  std::vector<double> test_nll;
  int best_step = 0;
  bool early_stopped = false;

  double initial_test_nll() const { return test_nll.front(); }
  double best_test_nll() const;
};

struct TrainResult {
  FlowModel model;
  LossCurve curve;
};

// Deterministic shuffled split of rows into (train, test).
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> split_rows(const Eigen::MatrixXd& data,
                                                       double train_fraction,
                                                       std::uint64_t seed);

// Maximum-likelihood training with Adam and early stopping on test NLL.
// Returns the parameters with the lowest test NLL seen.
TrainResult train(const Eigen::MatrixXd& data, const TrainConfig& cfg);
TrainResult train(const Eigen::MatrixXd& train_rows,
                  const Eigen::MatrixXd& test_rows, const TrainConfig& cfg);

// Binary model file: magic, version, shape, metadata, raw parameters.
void save(const FlowModel& model, const std::filesystem::path& path);
FlowModel load(const std::filesystem::path& path,
               std::optional<int> expected_dim = std::nullopt);

void write_loss_csv(const LossCurve& curve, const std::filesystem::path& path);

}  // namespace nfmppi

#endif  // NFMPPI_FLOW_HPP_
