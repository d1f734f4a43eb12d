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

#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <vector>

#include "nfmppi/error.hpp"
#include "nfmppi/flow.hpp"
#include "nfmppi/sampling.hpp"
#include "oracles.hpp"

namespace nfmppi {
namespace {

SamplerConfig config(SamplerKind kind) {
  SamplerConfig cfg;
  cfg.kind = kind;
  return cfg;
}

bool identical(const std::vector<NoiseTrajectory>& a,
               const std::vector<NoiseTrajectory>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k].rows() != b[k].rows()) return false;
    if ((a[k].array() != b[k].array()).any()) return false;
  }
  return true;
}

TEST(SamplerNames, RoundTrip) {
  for (SamplerKind k : kAllSamplers) {
    EXPECT_EQ(parse_sampler_kind(to_string(k)), k);
  }
  EXPECT_EQ(parse_sampler_kind("NF_AIL"), SamplerKind::kFlowAil);
  EXPECT_THROW(parse_sampler_kind("gauss"), InvalidArgument);
}

TEST(SampleBg, ZeroVarianceGivesZeros) {
  auto cfg = config(SamplerKind::kBasicGaussian);
  cfg.sigma.setZero();
  for (const auto& v : sample_bg(cfg, 80, 20, 7)) {
    EXPECT_TRUE((v.array() == 0.0).all());
  }
}

TEST(SampleBg, MomentsMatchCovariance) {
  auto cfg = config(SamplerKind::kBasicGaussian);
  cfg.sigma = {0.1, 2.0};
  const int horizon = 10;
  const int count = 10000;  // 10^5 draws per channel
  const auto v = sample_bg(cfg, horizon, count, 11);
  for (int ch = 0; ch < 2; ++ch) {
    double sum = 0.0;
    double sq = 0.0;
    for (const auto& t : v) {
      sum += t.col(ch).sum();
      sq += t.col(ch).squaredNorm();
    }
    const double n = static_cast<double>(horizon) * count;
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    EXPECT_LT(std::abs(mean), 3.0 * std::sqrt(cfg.sigma(ch) / n));
    EXPECT_NEAR(var, cfg.sigma(ch), 0.05 * cfg.sigma(ch));
  }
}

TEST(SampleBg, StepsAreUncorrelated) {
  auto cfg = config(SamplerKind::kBasicGaussian);
  const auto v = sample_bg(cfg, 2, 20000, 3);
  std::vector<double> a;
  std::vector<double> b;
  for (const auto& t : v) {
    a.push_back(t(0, 1));
    b.push_back(t(1, 1));
  }
  EXPECT_LT(std::abs(testing::pearson(a, b)), 4.0 / std::sqrt(20000.0));
}

TEST(SampleBg, RejectsNegativeVariance) {
  auto cfg = config(SamplerKind::kBasicGaussian);
  cfg.sigma(0) = -0.1;
  EXPECT_THROW(sample_bg(cfg, 10, 1, 0), InvalidArgument);
}

TEST(Sampling, WrongKindIsRejected) {
  EXPECT_THROW(sample_il(config(SamplerKind::kBasicGaussian), 10, 1, 0),
               InvalidArgument);
  EXPECT_THROW(sample_flow(config(SamplerKind::kTwoDof), 10, 1, 0),
               InvalidArgument);
}

TEST(SampleIl, ZeroDerivativeGivesZeros) {
  auto cfg = config(SamplerKind::kInputLifting);
  cfg.sigma.setZero();
  for (const auto& v : sample_il(cfg, 80, 5, 1)) {
    EXPECT_TRUE((v.array() == 0.0).all());
  }
}

TEST(IntegrateDerivative, ConstantGivesRamp) {
  const double c = 0.7;
  const Eigen::VectorXd d = Eigen::VectorXd::Constant(80, c);
  const Eigen::VectorXd v = integrate_derivative(d, 0.1);
  for (int i = 0; i < 80; ++i) EXPECT_NEAR(v(i), c * i * 0.1, 1e-12);
}

TEST(SampleIl, VarianceFollowsRandomWalk) {
  auto cfg = config(SamplerKind::kInputLifting);
  cfg.sigma = {0.045, 1.1};
  const int count = 20000;
  const auto v = sample_il(cfg, 80, count, 5);
  for (int ch = 0; ch < 2; ++ch) {
    for (int i : {10, 40, 79}) {
      double sq = 0.0;
      for (const auto& t : v) sq += t(i, ch) * t(i, ch);
      const double var = sq / count;
      const double expected = cfg.sigma(ch) * i * cfg.dt * cfg.dt;
      // Sample variance of a Gaussian has relative sd sqrt(2 / n).
      EXPECT_NEAR(var, expected, 4.0 * std::sqrt(2.0 / count) * expected)
          << "channel " << ch << " step " << i;
    }
  }
}

TEST(SampleIl, IncrementsBoundedByDrawnDerivative) {
  auto cfg = config(SamplerKind::kInputLifting);
  const std::uint64_t key = 9;
  const auto v = sample_il(cfg, 80, 50, key);
  for (int k = 0; k < 50; ++k) {
    for (int ch = 0; ch < 2; ++ch) {
      Rng rng = noise_stream(key, k, ch, StreamTag::kDerivative);
      double max_abs = 0.0;
      for (int i = 0; i < 80; ++i) {
        max_abs = std::max(max_abs, std::abs(std::sqrt(cfg.sigma(ch)) * rng.normal()));
      }
      const auto col = v[static_cast<std::size_t>(k)].col(ch);
      for (int i = 1; i < 80; ++i) {
        EXPECT_LE(std::abs(col(i) - col(i - 1)), cfg.dt * max_abs + 1e-12);
      }
    }
  }
}

TEST(Sample2df, ZeroDerivativeGroupReducesToBg) {
  auto cfg = config(SamplerKind::kTwoDof);
  cfg.sigma_derivative.setZero();
  cfg.sigma_additive = {0.045, 0.09};
  auto bg = config(SamplerKind::kBasicGaussian);
  bg.sigma = cfg.sigma_additive;
  EXPECT_TRUE(identical(sample_2df(cfg, 80, 30, 42), sample_bg(bg, 80, 30, 42)));
}

TEST(Sample2df, ZeroAdditiveGroupReducesToIl) {
  auto cfg = config(SamplerKind::kTwoDof);
  cfg.sigma_derivative = {0.03, 0.075};
  cfg.sigma_additive.setZero();
  auto il = config(SamplerKind::kInputLifting);
  il.sigma = cfg.sigma_derivative;
  EXPECT_TRUE(identical(sample_2df(cfg, 80, 30, 42), sample_il(il, 80, 30, 42)));
}

TEST(Sample2df, FirstEntryHasAdditiveVariance) {
  auto cfg = config(SamplerKind::kTwoDof);
  const int count = 40000;
  const auto v = sample_2df(cfg, 80, count, 8);
  for (int ch = 0; ch < 2; ++ch) {
    double sq = 0.0;
    for (const auto& t : v) sq += t(0, ch) * t(0, ch);
    const double expected = cfg.sigma_additive(ch);
    EXPECT_NEAR(sq / count, expected, 4.0 * std::sqrt(2.0 / count) * expected);
  }
}

TEST(Sampling, SameKeyIsBitIdentical) {
  for (SamplerKind kind : {SamplerKind::kBasicGaussian, SamplerKind::kInputLifting,
                           SamplerKind::kTwoDof}) {
    const auto cfg = config(kind);
    EXPECT_TRUE(identical(sample_noise(cfg, 80, 20, 123), sample_noise(cfg, 80, 20, 123)));
    EXPECT_FALSE(identical(sample_noise(cfg, 80, 20, 123), sample_noise(cfg, 80, 20, 124)));
  }
}

TEST(SampleFlow, RequiresModelsOfMatchingDimension) {
  auto cfg = config(SamplerKind::kFlowA2df);
  EXPECT_THROW(sample_flow(cfg, 8, 1, 0), InvalidArgument);
  auto wrong = std::make_shared<const FlowModel>(6, 2, 4);
  cfg.flows = {wrong, wrong};
  EXPECT_THROW(sample_flow(cfg, 8, 1, 0), InvalidArgument);
}

TEST(SampleFlow, IdentityA2dfIsStandardNormalBg) {
  auto identity = std::make_shared<const FlowModel>(16, 4, 8);
  auto cfg = config(SamplerKind::kFlowA2df);
  cfg.flows = {identity, identity};
  auto bg = config(SamplerKind::kBasicGaussian);
  bg.sigma = {1.0, 1.0};
  EXPECT_TRUE(identical(sample_flow(cfg, 16, 25, 77), sample_bg(bg, 16, 25, 77)));
}

TEST(SampleFlow, IdentityAilIsUnitVarianceIl) {
  auto identity = std::make_shared<const FlowModel>(16, 4, 8);
  auto cfg = config(SamplerKind::kFlowAil);
  cfg.flows = {identity, identity};
  auto il = config(SamplerKind::kInputLifting);
  il.sigma = {1.0, 1.0};
  EXPECT_TRUE(identical(sample_flow(cfg, 16, 25, 77), sample_il(il, 16, 25, 77)));
}

TEST(SampleFlow, AilIncrementsBoundedByFlowOutput) {
  FlowModel model(16, 4, 8, 3);
  std::vector<double> p = model.parameters();
  Rng rng(1);
  for (double& x : p) x += 0.05 * rng.normal();
  model.set_parameters(p);
  auto shared = std::make_shared<const FlowModel>(model);
  auto cfg = config(SamplerKind::kFlowAil);
  cfg.flows = {shared, shared};
  const auto v = sample_flow(cfg, 16, 10, 5);
  for (int k = 0; k < 10; ++k) {
    for (int ch = 0; ch < 2; ++ch) {
      Rng s = noise_stream(5, k, ch, StreamTag::kDerivative);
      Eigen::MatrixXd z(1, 16);
      for (int i = 0; i < 16; ++i) z(0, i) = s.normal();
      const double bound = model.forward(z).values.cwiseAbs().maxCoeff();
      const auto col = v[static_cast<std::size_t>(k)].col(ch);
      for (int i = 1; i < 16; ++i) {
        EXPECT_LE(std::abs(col(i) - col(i - 1)), cfg.dt * bound + 1e-12);
      }
    }
  }
}

}  // namespace
}  // namespace nfmppi
