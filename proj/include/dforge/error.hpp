// Copyright 2026 The dialect-forge Authors
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

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dforge {

// Bad input data: malformed records, invariant violations, unknown ids.
// The CLI maps these to exit code 1.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A record in a line-oriented file failed to parse or validate.
class RecordError : public DataError {
 public:
  RecordError(std::string path, std::size_t line, std::string field,
              const std::string& what)
      : DataError(path + ":" + std::to_string(line) + ": field \"" + field +
                  "\": " + what),
        path_(std::move(path)),
        line_(line),
        field_(std::move(field)) {}

  const std::string& path() const noexcept { return path_; }
  std::size_t line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::string path_;
  std::size_t line_;
  std::string field_;
};

// The backend peer broke the wire protocol.
class ProtocolError : public DataError {
 public:
  using DataError::DataError;
};

// The backend process could not be started or driven.
class BackendError : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace dforge
