/*
 * Copyright 2026 The MCRD Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>

namespace mcrd {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor shapes do not conform for the requested operation.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file; carries the 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line == 0 ? what
                        : "line " + std::to_string(line) + ": " + what),
        line_(line) {}
  explicit ParseError(const std::string& what) : ParseError(what, 0) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Loaded data violates a cross-reference or range constraint.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// An operation that needs at least one element received none.
class EmptyInputError : public Error {
 public:
  using Error::Error;
};

/// Query text has no tokens after normalization.
class EmptyQueryError : public EmptyInputError {
 public:
  using EmptyInputError::EmptyInputError;
};

/// Index outside its valid range.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// Checkpoint failed its checksum, version, or consistency checks.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

/// Training produced a non-finite loss or gradient.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace mcrd
