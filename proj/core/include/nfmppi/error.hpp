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

#ifndef NFMPPI_ERROR_HPP_
#define NFMPPI_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace nfmppi {

// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid argument or violated precondition (shape, range, finiteness).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Malformed or incompatible file content (model files, scenarios, configs).
class FormatError : public Error {
 public:
  using Error::Error;
};

// Numerical failure during training or planning.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace nfmppi

#endif  // NFMPPI_ERROR_HPP_
