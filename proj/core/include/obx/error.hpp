// Copyright (c) the obx authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace obx {

/// Invalid values handed to a library entry point: non-finite coordinates,
/// non-positive box sides, out-of-range configuration, shape mismatches.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed text input. Carries the 1-based line number when known (-1 otherwise).
class ParseError : public InputError {
 public:
  explicit ParseError(const std::string& what, long line = -1)
      : InputError(line >= 0 ? what + " (line " + std::to_string(line) + ")" : what),
        line_(line) {}
  long line() const noexcept { return line_; }

 private:
  long line_;
};

/// An angle embedding whose period-90 vector is numerically zero carries no
/// angle information at all and cannot be decoded.
class UndecodableEmbedding : public InputError {
 public:
  using InputError::InputError;
};

}  // namespace obx
