// Copyright 2026 The rdeq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef RDEQ_ERRORS_HPP_
#define RDEQ_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rdeq {

// Base class for everything thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid input: malformed documents, violated invariants, bad arguments.
// The CLI maps this family to exit code 3.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Unknown, duplicated, or overlapping axis names.
class AxisError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// CSV or plan documents that do not match the declared schema.
class SchemaError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// A malformed database row; carries the 1-based line number in the file.
class RowError : public ValidationError {
 public:
  RowError(std::size_t line, const std::string& what)
      : ValidationError("line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Problem instances that exceed the enumeration limits of an oracle.
class SizeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Model shapes a given operation does not support (e.g. K != 1 for the
// successive-disclosure checker).
class UnsupportedModelError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Using a result object in a state that does not permit the operation.
class StateError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// A requested operating point lies outside the feasible region.
// The CLI maps this family to exit code 2.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

class InfeasibleDistortionError : public InfeasibleError {
 public:
  using InfeasibleError::InfeasibleError;
};

class InfeasiblePrivacyError : public InfeasibleError {
 public:
  using InfeasibleError::InfeasibleError;
};

}  // namespace rdeq

#endif  // RDEQ_ERRORS_HPP_
