/**
 * Copyright 2026 The tabkit Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tabkit {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An annotation violates a TableAnnotation invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Strict-mode HTML violation; `offset` is the byte offset of the token.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " at byte " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// HTML that parses but cannot be laid out on a grid.
class MalformedTable : public Error {
 public:
  MalformedTable(const std::string& what, int row)
      : Error("malformed table: " + what + " (row " + std::to_string(row) + ")"), row_(row) {}
  int row() const { return row_; }

 private:
  int row_;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

}  // namespace tabkit
