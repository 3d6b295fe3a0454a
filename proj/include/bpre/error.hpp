// Copyright 2026 The bpre Authors.
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

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace bpre {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A law, environment model or numeric argument violates its contract.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A request reaches past the end of a realized environment.
class HorizonError : public Error {
 public:
  using Error::Error;
};

// A series or generating function left its domain of convergence.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

// All relevant laws are point masses, so a normalizing scale is zero.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

// The hypotheses of a verification campaign are not satisfied by the model.
class HypothesisError : public Error {
 public:
  using Error::Error;
};

// Estimator noise is too large relative to the quantity being measured.
class EstimatorInvalid : public Error {
 public:
  using Error::Error;
};

// A population total would exceed the hard cap. `partial` is the running
// total at the moment the cap was crossed.
class PopulationOverflow : public Error {
 public:
  PopulationOverflow(const std::string& what, std::uint64_t partial)
      : Error(what), partial_(partial) {}
  std::uint64_t partial() const noexcept { return partial_; }

 private:
  std::uint64_t partial_;
};

}  // namespace bpre
