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

#ifndef NFMPPI_RNG_HPP_
#define NFMPPI_RNG_HPP_

#include <cstdint>
#include <string_view>

namespace nfmppi {

/// Counter-based random stream.
///
/// Output i of a stream is a pure function of (key, i), so independent
/// streams can be carved out of a master seed with derive_key() and consumed
/// from any thread in any order without changing results.
class Rng {
 public:
  explicit Rng(std::uint64_t key) noexcept : key_(key) {}

  std::uint64_t next_u64() noexcept;

  // Uniform on [0, 1).
  double uniform() noexcept;

  // Standard normal (Box-Muller, pairs cached).
  double normal() noexcept;

  // Uniform on {0, ..., n - 1}; n must be positive.
  std::uint64_t uniform_index(std::uint64_t n) noexcept;

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

// 64-bit finalizer from SplitMix64.
std::uint64_t mix64(std::uint64_t x) noexcept;

// Child key for the stream identified by (parent, a, b, c).
std::uint64_t derive_key(std::uint64_t parent, std::uint64_t a,
                         std::uint64_t b = 0, std::uint64_t c = 0) noexcept;

// FNV-1a, used to fold identifiers (scenario ids, sampler names) into seeds.
std::uint64_t hash_string(std::string_view s) noexcept;

}  // namespace nfmppi

#endif  // NFMPPI_RNG_HPP_
