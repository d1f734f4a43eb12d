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

#ifndef NFMPPI_SAMPLING_HPP_
#define NFMPPI_SAMPLING_HPP_

#include <array>
#include <cstdint>
#include <memory>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "nfmppi/dynamics.hpp"
#include "nfmppi/flow.hpp"

namespace nfmppi {

// N x 2 input perturbation (steering rate [rad/s], acceleration [m/s^2]).
using NoiseTrajectory = InputTrajectory;

enum class SamplerKind {
  kBasicGaussian,   // "bg"
  kInputLifting,    // "il"
  kTwoDof,          // "2df"
  kFlowA2df,        // "nf-a2df"
  kFlowAil,         // "nf-ail"
};

std::string_view to_string(SamplerKind kind) noexcept;
// Accepts the short names above (case-insensitive). Throws InvalidArgument.
SamplerKind parse_sampler_kind(std::string_view name);
bool is_flow_sampler(SamplerKind kind) noexcept;

inline constexpr std::array<SamplerKind, 5> kAllSamplers = {
    SamplerKind::kBasicGaussian, SamplerKind::kInputLifting,
    SamplerKind::kTwoDof, SamplerKind::kFlowA2df, SamplerKind::kFlowAil};

struct SamplerConfig {
  SamplerKind kind = SamplerKind::kBasicGaussian;
  // Diagonal variances per channel. `sigma` drives BG and IL; the 2DF sampler
  // uses sigma_derivative (integrated group) and sigma_additive.
  Eigen::Vector2d sigma{0.1, 2.0};
  Eigen::Vector2d sigma_derivative{0.03, 0.075};
  Eigen::Vector2d sigma_additive{0.045, 0.09};
  // One model per channel; required for the flow kinds only.
  std::array<std::shared_ptr<const FlowModel>, 2> flows;
  double dt = 0.1;

  void validate(int horizon) const;
};

// Random stream tags. Derivative-level draws and direct additive draws use
// separate streams so that the 2DF sampler degenerates bit-exactly to IL or
// BG when one of its variances is zero.
enum class StreamTag : std::uint64_t { kDerivative = 0, kAdditive = 1 };

// Stream for (planning key, sample k, channel, tag).
Rng noise_stream(std::uint64_t key, int sample, int channel, StreamTag tag);

std::vector<NoiseTrajectory> sample_bg(const SamplerConfig& cfg, int horizon,
                                       int count, std::uint64_t key);
std::vector<NoiseTrajectory> sample_il(const SamplerConfig& cfg, int horizon,
                                       int count, std::uint64_t key);
std::vector<NoiseTrajectory> sample_2df(const SamplerConfig& cfg, int horizon,
                                        int count, std::uint64_t key);
std::vector<NoiseTrajectory> sample_flow(const SamplerConfig& cfg, int horizon,
                                         int count, std::uint64_t key);

// Dispatches on cfg.kind.
std::vector<NoiseTrajectory> sample_noise(const SamplerConfig& cfg, int horizon,
                                          int count, std::uint64_t key);

// v_0 = 0, v_i = v_{i-1} + d_{i-1} * dt. The last derivative is unused.
Eigen::VectorXd integrate_derivative(const Eigen::VectorXd& derivative, double dt);

}  // namespace nfmppi

#endif  // NFMPPI_SAMPLING_HPP_
