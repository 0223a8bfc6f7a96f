// Copyright 2026 The oqsonic Authors
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

namespace oqs {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class HermiticityError : public Error {
 public:
  HermiticityError(const std::string& what, double residue)
      : Error(what + " (max |A - A^dagger| = " + std::to_string(residue) + ")"),
        residue_(residue) {}
  double residue() const noexcept { return residue_; }

 private:
  double residue_;
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
};

class ModelTooLarge : public Error {
 public:
  using Error::Error;
};

// Integrator or renderer detected a numerically broken state.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

class AliasingError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace oqs
