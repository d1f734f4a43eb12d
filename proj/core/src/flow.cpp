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

#include "nfmppi/flow.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "nfmppi/error.hpp"

namespace nfmppi {

namespace {

constexpr MaskKind kMaskCycle[] = {MaskKind::kEven, MaskKind::kOdd,
                                   MaskKind::kLowerHalf, MaskKind::kUpperHalf};

bool is_passive(MaskKind mask, int i, int dim) {
  switch (mask) {
    case MaskKind::kEven:
      return i % 2 == 0;
    case MaskKind::kOdd:
      return i % 2 == 1;
    case MaskKind::kLowerHalf:
      return i < dim / 2;
    case MaskKind::kUpperHalf:
      return i >= dim / 2;
  }
  return false;
}

// tanh through the vectorized exp; matches std::tanh to a few ulp.
template <typename Derived>
Eigen::ArrayXXd fast_tanh(const Eigen::ArrayBase<Derived>& x) {
  return 1.0 - 2.0 / ((2.0 * x).exp() + 1.0);
}

// Conditioner activations for one layer and one batch.
struct ConditionerPass {
  Eigen::MatrixXd passive_in;  // B x P
  Eigen::MatrixXd h1;          // B x H
  Eigen::MatrixXd h2;          // B x H
  Eigen::ArrayXXd raw_scale;   // B x A
  Eigen::ArrayXXd log_scale;   // B x A, bounded
  Eigen::ArrayXXd shift;       // B x A
};

ConditionerPass run_conditioner(const CouplingLayer& layer,
                                const Eigen::MatrixXd& x) {
  ConditionerPass c;
  const auto n_active = static_cast<Eigen::Index>(layer.active().size());
  c.passive_in = x(Eigen::all, layer.passive());
  c.h1 = fast_tanh(((c.passive_in * layer.w1.transpose()).rowwise() +
                    layer.b1.transpose())
                       .array())
             .matrix();
  c.h2 = fast_tanh(
             ((c.h1 * layer.w2.transpose()).rowwise() + layer.b2.transpose())
                 .array())
             .matrix();
  Eigen::MatrixXd out =
      (c.h2 * layer.w3.transpose()).rowwise() + layer.b3.transpose();
  c.raw_scale = out.leftCols(n_active).array();
  c.shift = out.rightCols(n_active).array();
  constexpr double m = FlowModel::kMaxLogScale;
  c.log_scale = m * fast_tanh(c.raw_scale / m);
  return c;
}

template <typename Affine, typename Fn>
void for_each_affine(Affine& a, Fn&& fn) {
  fn(a.shift.data(), a.shift.size());
  fn(a.log_diag.data(), a.log_diag.size());
  const auto d = a.lower.rows();
  for (Eigen::Index j = 0; j + 1 < d; ++j) {
    fn(a.lower.col(j).data() + j + 1, d - j - 1);
  }
}

template <typename Layer, typename Fn>
void for_each_block(Layer& layer, Fn&& fn) {
  fn(layer.w1.data(), layer.w1.size());
  fn(layer.b1.data(), layer.b1.size());
  fn(layer.w2.data(), layer.w2.size());
  fn(layer.b2.data(), layer.b2.size());
  fn(layer.w3.data(), layer.w3.size());
  fn(layer.b3.data(), layer.b3.size());
}

}  // namespace

CouplingLayer::CouplingLayer(int dim, MaskKind mask, int hidden)
    : dim_(dim), hidden_(hidden), mask_(mask) {
  if (dim < 2) throw InvalidArgument("coupling layer needs dim >= 2");
  if (hidden < 1) throw InvalidArgument("coupling layer needs hidden >= 1");
  for (int i = 0; i < dim; ++i) {
    (is_passive(mask, i, dim) ? passive_ : active_).push_back(i);
  }
  const auto p = static_cast<Eigen::Index>(passive_.size());
  const auto a = static_cast<Eigen::Index>(active_.size());
  w1 = Eigen::MatrixXd::Zero(hidden, p);
  b1 = Eigen::VectorXd::Zero(hidden);
  w2 = Eigen::MatrixXd::Zero(hidden, hidden);
  b2 = Eigen::VectorXd::Zero(hidden);
  w3 = Eigen::MatrixXd::Zero(2 * a, hidden);
  b3 = Eigen::VectorXd::Zero(2 * a);
}

std::size_t CouplingLayer::num_params() const noexcept {
  return static_cast<std::size_t>(w1.size() + b1.size() + w2.size() +
                                   b2.size() + w3.size() + b3.size());
}

AffineLayer::AffineLayer(int dim)
    : shift(Eigen::VectorXd::Zero(dim)),
      log_diag(Eigen::VectorXd::Zero(dim)),
      lower(Eigen::MatrixXd::Zero(dim, dim)) {}

Eigen::MatrixXd AffineLayer::matrix() const {
  Eigen::MatrixXd m = lower.triangularView<Eigen::StrictlyLower>();
  m.diagonal() = log_diag.array().exp().matrix();
  return m;
}

std::size_t AffineLayer::num_params() const noexcept {
  const auto d = static_cast<std::size_t>(shift.size());
  return 2 * d + d * (d - 1) / 2;
}

FlowModel::FlowModel(int dim, int num_layers, int hidden,
                     std::uint64_t init_seed)
    : dim_(dim), affine_(std::max(dim, 0)) {
  if (dim < 2) throw InvalidArgument("flow dimension must be >= 2");
  if (num_layers < 1) throw InvalidArgument("flow needs at least one layer");
  Rng rng(derive_key(init_seed, 0xF10F));
  layers_.reserve(static_cast<std::size_t>(num_layers));
  for (int l = 0; l < num_layers; ++l) {
    CouplingLayer layer(dim, kMaskCycle[l % 4], hidden);
    const double s1 = 1.0 / std::sqrt(static_cast<double>(layer.w1.cols()));
    const double s2 = 1.0 / std::sqrt(static_cast<double>(layer.w2.cols()));
    for (Eigen::Index i = 0; i < layer.w1.size(); ++i) {
      layer.w1.data()[i] = s1 * rng.normal();
    }
    for (Eigen::Index i = 0; i < layer.w2.size(); ++i) {
      layer.w2.data()[i] = s2 * rng.normal();
    }
    // w3/b3 stay zero: every layer starts as the identity.
    layers_.push_back(std::move(layer));
  }
}

FlowModel::FlowModel(int dim, std::vector<CouplingLayer> layers,
                     AffineLayer affine, FlowMetadata metadata)
    : dim_(dim),
      layers_(std::move(layers)),
      affine_(std::move(affine)),
      metadata_(std::move(metadata)) {
  if (layers_.empty()) throw InvalidArgument("flow needs at least one layer");
  if (affine_.shift.size() != dim_ || affine_.log_diag.size() != dim_ ||
      affine_.lower.rows() != dim_ || affine_.lower.cols() != dim_) {
    throw InvalidArgument("affine layer dimension does not match model");
  }
  for (const auto& layer : layers_) {
    if (layer.dim() != dim_) {
      throw InvalidArgument("coupling layer dimension does not match model");
    }
  }
}

int FlowModel::hidden() const noexcept { return layers_.front().hidden(); }

void FlowModel::check_dim(const Eigen::MatrixXd& m, const char* what) const {
  if (m.cols() != dim_) {
    std::ostringstream msg;
    msg << what << ": expected " << dim_ << " columns, got " << m.cols();
    throw InvalidArgument(msg.str());
  }
}

FlowBatch FlowModel::forward(const Eigen::MatrixXd& z) const {
  check_dim(z, "FlowModel::forward");
  FlowBatch out{z, Eigen::VectorXd::Zero(z.rows())};
  for (const auto& layer : layers_) {
    const ConditionerPass c = run_conditioner(layer, out.values);
    Eigen::ArrayXXd xa = out.values(Eigen::all, layer.active()).array();
    out.values(Eigen::all, layer.active()) =
        (xa * c.log_scale.exp() + c.shift).matrix();
    out.logdet += c.log_scale.rowwise().sum().matrix();
  }
  out.values = (out.values * affine_.matrix().transpose()).rowwise() +
               affine_.shift.transpose();
  out.logdet.array() += affine_.log_diag.sum();
  return out;
}

FlowBatch FlowModel::inverse(const Eigen::MatrixXd& x) const {
  check_dim(x, "FlowModel::inverse");
  const Eigen::MatrixXd centered = x.rowwise() - affine_.shift.transpose();
  FlowBatch out{affine_.matrix()
                    .triangularView<Eigen::Lower>()
                    .solve(centered.transpose())
                    .transpose(),
                Eigen::VectorXd::Constant(x.rows(), -affine_.log_diag.sum())};
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) {
    const ConditionerPass c = run_conditioner(*it, out.values);
    Eigen::ArrayXXd ya = out.values(Eigen::all, it->active()).array();
    out.values(Eigen::all, it->active()) =
        ((ya - c.shift) * (-c.log_scale).exp()).matrix();
    out.logdet -= c.log_scale.rowwise().sum().matrix();
  }
  return out;
}

Eigen::VectorXd standard_normal_log_prob(const Eigen::MatrixXd& z) {
  const double log_norm =
      -0.5 * static_cast<double>(z.cols()) * std::log(2.0 * std::numbers::pi);
  return (-0.5 * z.rowwise().squaredNorm()).array() + log_norm;
}

Eigen::VectorXd FlowModel::log_prob(const Eigen::MatrixXd& x) const {
  const FlowBatch inv = inverse(x);
  return standard_normal_log_prob(inv.values) + inv.logdet;
}

std::pair<Eigen::VectorXd, double> FlowModel::forward(
    const Eigen::VectorXd& z) const {
  const FlowBatch b = forward(Eigen::MatrixXd(z.transpose()));
  return {b.values.row(0).transpose(), b.logdet(0)};
}

std::pair<Eigen::VectorXd, double> FlowModel::inverse(
    const Eigen::VectorXd& x) const {
  const FlowBatch b = inverse(Eigen::MatrixXd(x.transpose()));
  return {b.values.row(0).transpose(), b.logdet(0)};
}

double FlowModel::log_prob(const Eigen::VectorXd& x) const {
  return log_prob(Eigen::MatrixXd(x.transpose()))(0);
}

Eigen::MatrixXd FlowModel::sample(int count, Rng& rng) const {
  if (count < 0) throw InvalidArgument("sample count must be non-negative");
  Eigen::MatrixXd z(count, dim_);
  for (int k = 0; k < count; ++k) {
    for (int i = 0; i < dim_; ++i) z(k, i) = rng.normal();
  }
  return forward(z).values;
}

std::size_t FlowModel::num_params() const noexcept {
  std::size_t n = affine_.num_params();
  for (const auto& layer : layers_) n += layer.num_params();
  return n;
}

std::vector<double> FlowModel::parameters() const {
  std::vector<double> out;
  out.reserve(num_params());
  for (const auto& layer : layers_) {
    for_each_block(layer, [&](const double* p, Eigen::Index n) {
      out.insert(out.end(), p, p + n);
    });
  }
  for_each_affine(affine_, [&](const double* p, Eigen::Index n) {
    out.insert(out.end(), p, p + n);
  });
  return out;
}

void FlowModel::set_parameters(std::span<const double> params) {
  if (params.size() != num_params()) {
    throw InvalidArgument("set_parameters: size mismatch");
  }
  std::size_t offset = 0;
  auto take = [&](double* p, Eigen::Index n) {
    std::copy_n(params.begin() + static_cast<std::ptrdiff_t>(offset), n, p);
    offset += static_cast<std::size_t>(n);
  };
  for (auto& layer : layers_) for_each_block(layer, take);
  for_each_affine(affine_, take);
}

double FlowModel::nll_and_gradient(const Eigen::MatrixXd& x,
                                   std::span<double> grad) const {
  check_dim(x, "FlowModel::nll_and_gradient");
  const auto batch = x.rows();
  if (batch == 0) throw InvalidArgument("nll_and_gradient: empty batch");
  const bool want_grad = !grad.empty();
  if (want_grad && grad.size() != num_params()) {
    throw InvalidArgument("nll_and_gradient: gradient size mismatch");
  }

  // Inverse pass from data to base, keeping each layer's input and
  // conditioner activations. passes[l] belongs to layers_[l].
  const auto n_layers = layers_.size();
  std::vector<ConditionerPass> passes(n_layers);
  std::vector<Eigen::MatrixXd> outputs(n_layers);  // z-side output of layer l
  const Eigen::MatrixXd lmat = affine_.matrix();
  const Eigen::MatrixXd affine_out =
      lmat.triangularView<Eigen::Lower>()
          .solve((x.rowwise() - affine_.shift.transpose()).transpose())
          .transpose();
  Eigen::MatrixXd h = affine_out;
  Eigen::VectorXd sum_log_scale =
      Eigen::VectorXd::Constant(batch, affine_.log_diag.sum());
  for (std::size_t l = n_layers; l-- > 0;) {
    const auto& layer = layers_[l];
    passes[l] = run_conditioner(layer, h);
    Eigen::ArrayXXd ya = h(Eigen::all, layer.active()).array();
    h(Eigen::all, layer.active()) =
        ((ya - passes[l].shift) * (-passes[l].log_scale).exp()).matrix();
    sum_log_scale += passes[l].log_scale.rowwise().sum().matrix();
    outputs[l] = h;
  }
  // Per-sample NLL = 0.5 |z|^2 + D/2 log(2 pi) + sum of log-scales.
  const Eigen::VectorXd nll =
      -standard_normal_log_prob(h) + sum_log_scale;
  const double mean_nll = nll.mean();
  if (!want_grad) return mean_nll;

  std::fill(grad.begin(), grad.end(), 0.0);
  std::vector<std::size_t> offsets(n_layers);
  {
    std::size_t off = 0;
    for (std::size_t l = 0; l < n_layers; ++l) {
      offsets[l] = off;
      off += layers_[l].num_params();
    }
  }

  const double inv_b = 1.0 / static_cast<double>(batch);
  constexpr double m = kMaxLogScale;
  Eigen::MatrixXd g = h * inv_b;  // d(mean NLL)/dz
  for (std::size_t l = 0; l < n_layers; ++l) {
    const auto& layer = layers_[l];
    const auto& c = passes[l];
    const Eigen::ArrayXXd out_a = outputs[l](Eigen::all, layer.active()).array();
    const Eigen::ArrayXXd g_a = g(Eigen::all, layer.active()).array();
    const Eigen::ArrayXXd inv_scale = (-c.log_scale).exp();

    const Eigen::ArrayXXd d_in_a = g_a * inv_scale;
    const Eigen::ArrayXXd d_shift = -d_in_a;
    const Eigen::ArrayXXd d_log_scale = -g_a * out_a + inv_b;
    const Eigen::ArrayXXd t = c.log_scale / m;
    const Eigen::ArrayXXd d_raw = d_log_scale * (1.0 - t.square());

    const auto n_active = static_cast<Eigen::Index>(layer.active().size());
    Eigen::MatrixXd d_out(batch, 2 * n_active);
    d_out.leftCols(n_active) = d_raw.matrix();
    d_out.rightCols(n_active) = d_shift.matrix();

    const Eigen::MatrixXd d_h2 = d_out * layer.w3;
    const Eigen::MatrixXd d_a2 =
        (d_h2.array() * (1.0 - c.h2.array().square())).matrix();
    const Eigen::MatrixXd d_h1 = d_a2 * layer.w2;
    const Eigen::MatrixXd d_a1 =
        (d_h1.array() * (1.0 - c.h1.array().square())).matrix();

    double* p = grad.data() + offsets[l];
    auto put = [&p](const auto& block) {
      Eigen::Map<Eigen::MatrixXd>(p, block.rows(), block.cols()) = block;
      p += block.size();
    };
    put(Eigen::MatrixXd(d_a1.transpose() * c.passive_in));
    put(Eigen::VectorXd(d_a1.colwise().sum().transpose()));
    put(Eigen::MatrixXd(d_a2.transpose() * c.h1));
    put(Eigen::VectorXd(d_a2.colwise().sum().transpose()));
    put(Eigen::MatrixXd(d_out.transpose() * c.h2));
    put(Eigen::VectorXd(d_out.colwise().sum().transpose()));

    // Gradient with respect to this layer's (data-side) input.
    Eigen::MatrixXd g_in(batch, dim_);
    g_in(Eigen::all, layer.active()) = d_in_a.matrix();
    g_in(Eigen::all, layer.passive()) =
        g(Eigen::all, layer.passive()) + d_a1 * layer.w1;
    g = std::move(g_in);
  }

  // Affine layer: y = L^-1 (x - shift), g = d(mean NLL)/dy.
  const Eigen::MatrixXd d_l = -lmat.transpose()
                                  .triangularView<Eigen::Upper>()
                                  .solve(g.transpose() * affine_out);
  const Eigen::VectorXd d_shift = -lmat.transpose()
                                       .triangularView<Eigen::Upper>()
                                       .solve(g.colwise().sum().transpose());
  AffineLayer d_affine(dim_);
  d_affine.shift = d_shift;
  d_affine.log_diag =
      (d_l.diagonal().array() * affine_.log_diag.array().exp() + 1.0).matrix();
  d_affine.lower = d_l;
  double* p = grad.data() + (offsets.empty() ? 0 : offsets.back() + layers_.back().num_params());
  for_each_affine(d_affine, [&p](const double* src, Eigen::Index n) {
    std::copy_n(src, n, p);
    p += n;
  });
  return mean_nll;
}

}  // namespace nfmppi
