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

// Model file layout (little-endian):
//
//   char[8]  magic "NFMFLOW\0"
//   u32      format version (2)
//   u32      dim
//   u32      number of layers
//   u32      hidden width
//   f64      max log-scale
//   u32      metadata channel
//   u32 + n  provenance string
//   u32 + n  details JSON string
//   per layer: u32 mask kind, then w1 b1 w2 b2 w3 b3 as raw f64
//   affine layer: shift, log_diag, strictly lower L column by column (f64)
//   char[8]  end marker "NFMFEND\0"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>

#include "nfmppi/error.hpp"
#include "nfmppi/flow.hpp"

namespace nfmppi {

namespace {

static_assert(std::endian::native == std::endian::little,
              "model files are written in native little-endian order");

constexpr std::array<char, 8> kMagic = {'N', 'F', 'M', 'F', 'L', 'O', 'W', '\0'};
constexpr std::array<char, 8> kEndMarker = {'N', 'F', 'M', 'F',
                                            'E', 'N', 'D', '\0'};
constexpr std::uint32_t kVersion = 2;

class Writer {
 public:
  explicit Writer(std::ofstream& out) : out_(out) {}
  void u32(std::uint32_t v) { raw(&v, sizeof v); }
  void f64(double v) { raw(&v, sizeof v); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    raw(s.data(), s.size());
  }
  void doubles(const double* p, Eigen::Index n) {
    raw(p, static_cast<std::size_t>(n) * sizeof(double));
  }
  void raw(const void* p, std::size_t n) {
    out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
  }

 private:
  std::ofstream& out_;
};

class Reader {
 public:
  Reader(std::ifstream& in, std::string name) : in_(in), name_(std::move(name)) {}
  std::uint32_t u32() {
    std::uint32_t v;
    raw(&v, sizeof v);
    return v;
  }
  double f64() {
    double v;
    raw(&v, sizeof v);
    return v;
  }
  std::string str() {
    const std::uint32_t n = u32();
    if (n > (1u << 24)) fail("string length out of range");
    std::string s(n, '\0');
    raw(s.data(), n);
    return s;
  }
  void doubles(double* p, Eigen::Index n) {
    raw(p, static_cast<std::size_t>(n) * sizeof(double));
  }
  void raw(void* p, std::size_t n) {
    in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!in_) fail("unexpected end of file");
  }
  [[noreturn]] void fail(const std::string& why) const {
    throw FormatError("flow model " + name_ + ": " + why);
  }

 private:
  std::ifstream& in_;
  std::string name_;
};

}  // namespace

void save(const FlowModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  Writer w(out);
  w.raw(kMagic.data(), kMagic.size());
  w.u32(kVersion);
  w.u32(static_cast<std::uint32_t>(model.dim()));
  w.u32(static_cast<std::uint32_t>(model.num_layers()));
  w.u32(static_cast<std::uint32_t>(model.hidden()));
  w.f64(FlowModel::kMaxLogScale);
  w.u32(static_cast<std::uint32_t>(model.metadata().channel));
  w.str(model.metadata().provenance);
  w.str(model.metadata().details);
  for (const auto& layer : model.layers()) {
    w.u32(static_cast<std::uint32_t>(layer.mask()));
    w.doubles(layer.w1.data(), layer.w1.size());
    w.doubles(layer.b1.data(), layer.b1.size());
    w.doubles(layer.w2.data(), layer.w2.size());
    w.doubles(layer.b2.data(), layer.b2.size());
    w.doubles(layer.w3.data(), layer.w3.size());
    w.doubles(layer.b3.data(), layer.b3.size());
  }
  const AffineLayer& a = model.affine();
  w.doubles(a.shift.data(), a.shift.size());
  w.doubles(a.log_diag.data(), a.log_diag.size());
  for (Eigen::Index j = 0; j + 1 < a.lower.rows(); ++j) {
    w.doubles(a.lower.col(j).data() + j + 1, a.lower.rows() - j - 1);
  }
  w.raw(kEndMarker.data(), kEndMarker.size());
  if (!out) throw Error("failed writing " + path.string());
}

FlowModel load(const std::filesystem::path& path,
               std::optional<int> expected_dim) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open flow model " + path.string());
  Reader r(in, path.string());

  std::array<char, 8> magic{};
  r.raw(magic.data(), magic.size());
  if (magic != kMagic) r.fail("bad magic bytes");
  const std::uint32_t version = r.u32();
  if (version != kVersion) {
    r.fail("unsupported format version " + std::to_string(version));
  }
  const auto dim = static_cast<int>(r.u32());
  const auto n_layers = static_cast<int>(r.u32());
  const auto hidden = static_cast<int>(r.u32());
  if (dim < 2 || n_layers < 1 || hidden < 1 || dim > 1 << 16 ||
      n_layers > 1 << 12 || hidden > 1 << 16) {
    r.fail("implausible model shape");
  }
  if (expected_dim && *expected_dim != dim) {
    r.fail("dimension " + std::to_string(dim) + " does not match expected " +
           std::to_string(*expected_dim));
  }
  if (r.f64() != FlowModel::kMaxLogScale) r.fail("log-scale bound mismatch");

  FlowMetadata meta;
  meta.channel = static_cast<int>(r.u32());
  meta.provenance = r.str();
  meta.details = r.str();

  std::vector<CouplingLayer> layers;
  layers.reserve(static_cast<std::size_t>(n_layers));
  for (int l = 0; l < n_layers; ++l) {
    const std::uint32_t mask = r.u32();
    if (mask > static_cast<std::uint32_t>(MaskKind::kUpperHalf)) {
      r.fail("unknown mask kind");
    }
    CouplingLayer layer(dim, static_cast<MaskKind>(mask), hidden);
    r.doubles(layer.w1.data(), layer.w1.size());
    r.doubles(layer.b1.data(), layer.b1.size());
    r.doubles(layer.w2.data(), layer.w2.size());
    r.doubles(layer.b2.data(), layer.b2.size());
    r.doubles(layer.w3.data(), layer.w3.size());
    r.doubles(layer.b3.data(), layer.b3.size());
    layers.push_back(std::move(layer));
  }
  AffineLayer affine(dim);
  r.doubles(affine.shift.data(), affine.shift.size());
  r.doubles(affine.log_diag.data(), affine.log_diag.size());
  for (Eigen::Index j = 0; j + 1 < dim; ++j) {
    r.doubles(affine.lower.col(j).data() + j + 1, dim - j - 1);
  }
  std::array<char, 8> end{};
  r.raw(end.data(), end.size());
  if (end != kEndMarker) r.fail("missing end marker");
  return FlowModel(dim, std::move(layers), std::move(affine), std::move(meta));
}

}  // namespace nfmppi
