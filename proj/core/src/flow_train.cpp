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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

#include "nfmppi/error.hpp"
#include "nfmppi/flow.hpp"

namespace nfmppi {

void TrainConfig::validate() const {
  if (max_steps < 0) throw InvalidArgument("max_steps must be >= 0");
  if (patience < 1) throw InvalidArgument("patience must be >= 1");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw InvalidArgument("train_fraction must lie in (0, 1)");
  }
  if (batch_size < 0) throw InvalidArgument("batch_size must be >= 0");
  if (!(learning_rate > 0.0)) throw InvalidArgument("learning_rate must be > 0");
  if (num_layers < 1 || hidden < 1) {
    throw InvalidArgument("num_layers and hidden must be >= 1");
  }
}

double LossCurve::best_test_nll() const {
  return *std::min_element(test_nll.begin(), test_nll.end());
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> split_rows(
    const Eigen::MatrixXd& data, double train_fraction, std::uint64_t seed) {
  const auto rows = data.rows();
  if (rows < 2) throw InvalidArgument("split_rows: need at least two rows");
  std::vector<Eigen::Index> order(static_cast<std::size_t>(rows));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  Rng rng(derive_key(seed, 0x5B117));
  // Fisher-Yates.
  for (std::size_t i = order.size() - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_index(i + 1));
    std::swap(order[i], order[j]);
  }
  auto n_train = static_cast<Eigen::Index>(
      std::llround(train_fraction * static_cast<double>(rows)));
  n_train = std::clamp<Eigen::Index>(n_train, 1, rows - 1);
  std::vector<Eigen::Index> train_idx(order.begin(), order.begin() + n_train);
  std::vector<Eigen::Index> test_idx(order.begin() + n_train, order.end());
  return {data(train_idx, Eigen::all), data(test_idx, Eigen::all)};
}

TrainResult train(const Eigen::MatrixXd& data, const TrainConfig& cfg) {
  cfg.validate();
  if (data.rows() < 2) throw InvalidArgument("train: need at least two rows");
  auto [train_rows, test_rows] = split_rows(data, cfg.train_fraction, cfg.seed);
  return train(train_rows, test_rows, cfg);
}

TrainResult train(const Eigen::MatrixXd& train_rows,
                  const Eigen::MatrixXd& test_rows, const TrainConfig& cfg) {
  cfg.validate();
  if (train_rows.rows() < 1 || test_rows.rows() < 1) {
    throw InvalidArgument("train: both splits must be non-empty");
  }
  if (train_rows.cols() != test_rows.cols()) {
    throw InvalidArgument("train: split dimension mismatch");
  }
  if (!train_rows.allFinite() || !test_rows.allFinite()) {
    throw InvalidArgument("train: data contains non-finite values");
  }

  const int dim = static_cast<int>(train_rows.cols());
  FlowModel model(dim, cfg.num_layers, cfg.hidden, cfg.seed);
  if (cfg.data_init) {
    const Eigen::RowVectorXd mean = train_rows.colwise().mean();
    const Eigen::ArrayXd var =
        (train_rows.rowwise() - mean).array().square().colwise().mean();
    model.affine().shift = mean.transpose();
    model.affine().log_diag = (0.5 * var.max(1e-12).log()).matrix();
  }
  std::vector<double> params = model.parameters();
  std::vector<double> best_params = params;
  std::vector<double> grad(params.size());
  std::vector<double> m1(params.size(), 0.0);
  std::vector<double> m2(params.size(), 0.0);
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;

  const auto n_train = train_rows.rows();
  const bool full_batch = cfg.batch_size == 0 || cfg.batch_size >= n_train;
  Rng batch_rng(derive_key(cfg.seed, 0xBA7C4));
  Eigen::MatrixXd minibatch;

  LossCurve curve;
  double best_test = std::numeric_limits<double>::infinity();
  for (int step = 0;; ++step) {
    const Eigen::MatrixXd* batch = &train_rows;
    if (!full_batch) {
      std::vector<Eigen::Index> idx(static_cast<std::size_t>(cfg.batch_size));
      for (auto& i : idx) {
        i = static_cast<Eigen::Index>(
            batch_rng.uniform_index(static_cast<std::uint64_t>(n_train)));
      }
      minibatch = train_rows(idx, Eigen::all);
      batch = &minibatch;
    }
    const double train_nll = model.nll_and_gradient(*batch, grad);
    const double test_nll = model.nll_and_gradient(test_rows, {});
    if (!std::isfinite(train_nll) || !std::isfinite(test_nll)) {
      std::ostringstream msg;
      msg << "train: non-finite loss at step " << step
          << " (train=" << train_nll << ", test=" << test_nll << ")";
      throw NumericalError(msg.str());
    }
    curve.step.push_back(step);
    curve.train_nll.push_back(train_nll);
    curve.test_nll.push_back(test_nll);

    if (test_nll < best_test) {
      best_test = test_nll;
      curve.best_step = step;
      best_params = params;
    } else if (step - curve.best_step >= cfg.patience) {
      curve.early_stopped = true;
      break;
    }
    if (step == cfg.max_steps) break;

    const double t = static_cast<double>(step + 1);
    const double c1 = 1.0 - std::pow(kBeta1, t);
    const double c2 = 1.0 - std::pow(kBeta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
      m1[i] = kBeta1 * m1[i] + (1.0 - kBeta1) * grad[i];
      m2[i] = kBeta2 * m2[i] + (1.0 - kBeta2) * grad[i] * grad[i];
      params[i] -= cfg.learning_rate * (m1[i] / c1) /
                   (std::sqrt(m2[i] / c2) + kEps);
    }
    model.set_parameters(params);
  }

  model.set_parameters(best_params);
  return {std::move(model), std::move(curve)};
}

void write_loss_csv(const LossCurve& curve, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << "step,train_nll,test_nll\n";
  out << std::setprecision(17);
  for (std::size_t i = 0; i < curve.step.size(); ++i) {
    out << curve.step[i] << ',' << curve.train_nll[i] << ','
        << curve.test_nll[i] << '\n';
  }
}

}  // namespace nfmppi
