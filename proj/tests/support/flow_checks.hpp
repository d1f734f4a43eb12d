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

// Numerical checks of a FlowModel against finite differences and
// quadrature. Each returns the measured error so callers pick tolerances.

#ifndef NFMPPI_TESTS_FLOW_CHECKS_HPP_
#define NFMPPI_TESTS_FLOW_CHECKS_HPP_

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Core>

#include "nfmppi/flow.hpp"
#include "nfmppi/rng.hpp"
#include "oracles.hpp"

namespace nfmppi::testing {

// Model with every parameter perturbed away from the identity.
inline FlowModel random_flow(int dim, int layers, int hidden, std::uint64_t seed,
                             double scale = 0.3) {
  FlowModel model(dim, layers, hidden, seed);
  std::vector<double> p = model.parameters();
  Rng rng(derive_key(seed, 0xAB));
  for (double& x : p) x += scale * rng.normal();
  model.set_parameters(p);
  return model;
}

inline Eigen::MatrixXd normal_rows(int rows, int dim, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd z(rows, dim);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < dim; ++c) z(r, c) = rng.normal();
  }
  return z;
}

// max |inverse(forward(z)) - z| and max |logdet_f + logdet_i| over `count`
// base draws.
struct RoundTripError {
  double max_abs = 0.0;
  double max_logdet_sum = 0.0;
};

inline RoundTripError round_trip_error(const FlowModel& model, int count,
                                       std::uint64_t seed) {
  const Eigen::MatrixXd z = normal_rows(count, model.dim(), seed);
  const FlowBatch fwd = model.forward(z);
  const FlowBatch inv = model.inverse(fwd.values);
  return {(inv.values - z).cwiseAbs().maxCoeff(),
          (fwd.logdet + inv.logdet).cwiseAbs().maxCoeff()};
}

// |logdet - fd| / max(1, |fd|) where fd is log|det J| of the central
// difference Jacobian of forward() at z.
inline double logdet_fd_error(const FlowModel& model, const Eigen::VectorXd& z,
                              double h = 1e-5) {
  const int n = model.dim();
  std::vector<double> jac(static_cast<std::size_t>(n) * n);
  for (int c = 0; c < n; ++c) {
    Eigen::VectorXd zp = z;
    Eigen::VectorXd zm = z;
    zp(c) += h;
    zm(c) -= h;
    const Eigen::VectorXd d =
        (model.forward(zp).first - model.forward(zm).first) / (2.0 * h);
    for (int r = 0; r < n; ++r) jac[static_cast<std::size_t>(r * n + c)] = d(r);
  }
  const double fd = log_abs_det(jac, n);
  const double ld = model.forward(z).second;
  return std::abs(ld - fd) / std::max(1.0, std::abs(fd));
}

// max_i |g_i - fd_i| / max(|fd_i|, floor) for the mean-NLL gradient.
inline double gradient_fd_error(const FlowModel& model, const Eigen::MatrixXd& x,
                                double h = 1e-5, double floor = 1e-3) {
  std::vector<double> grad(model.num_params());
  model.nll_and_gradient(x, grad);
  FlowModel probe = model;
  std::vector<double> p = model.parameters();
  double worst = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double keep = p[i];
    p[i] = keep + h;
    probe.set_parameters(p);
    const double up = probe.nll_and_gradient(x, {});
    p[i] = keep - h;
    probe.set_parameters(p);
    const double down = probe.nll_and_gradient(x, {});
    p[i] = keep;
    const double fd = (up - down) / (2.0 * h);
    worst = std::max(worst, std::abs(grad[i] - fd) / std::max(std::abs(fd), floor));
  }
  return worst;
}

// Midpoint-rule integral of exp(log_prob) over [-half, half]^2.
inline double density_mass_2d(const FlowModel& model, double half, int cells) {
  const double h = 2.0 * half / cells;
  Eigen::MatrixXd grid(cells, 2);
  double mass = 0.0;
  for (int i = 0; i < cells; ++i) {
    for (int j = 0; j < cells; ++j) {
      grid(j, 0) = -half + (i + 0.5) * h;
      grid(j, 1) = -half + (j + 0.5) * h;
    }
    mass += model.log_prob(grid).array().exp().sum();
  }
  return mass * h * h;
}

}  // namespace nfmppi::testing

#endif  // NFMPPI_TESTS_FLOW_CHECKS_HPP_
