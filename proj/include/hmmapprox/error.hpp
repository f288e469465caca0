// Copyright 2026 The hmmapprox Authors
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

#include <stdexcept>
#include <string>

namespace hmmapprox {

// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A word contains a digit outside the alphabet, or a label is unknown.
class InvalidWord : public Error {
 public:
  using Error::Error;
};

// A model or matrix violates a stated invariant (stochasticity,
// stationarity, nonnegativity).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A query needs words longer than the source supports.
class LengthOutOfRange : public Error {
 public:
  using Error::Error;
};

class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

// Raised by the factorization pipeline; `step()` names the failing stage.
class SolverError : public Error {
 public:
  SolverError(std::string step, const std::string& what)
      : Error(step + ": " + what), step_(std::move(step)) {}

  const std::string& step() const noexcept { return step_; }

 private:
  std::string step_;
};

// Malformed input files (JSON models, sample files).
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace hmmapprox
