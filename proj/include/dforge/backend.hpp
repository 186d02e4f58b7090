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

#include <chrono>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dforge/protocol.hpp"

namespace dforge {

using protocol::AsrRequest;
using protocol::AsrResponse;
using protocol::TtsRequest;
using protocol::TtsResponse;

struct BackendOptions {
  // Run through /bin/sh -c, so quoting and arguments work as in a shell.
  std::string command;
  std::size_t parallelism = 4;
  std::chrono::milliseconds timeout{std::chrono::seconds(300)};
};

template <class Response>
struct BackendRun {
  std::vector<Response> responses;  // one per request, request order
  // The backend exited early or with a nonzero status. Responses it never
  // sent are synthesized as errors.
  bool backend_failed = false;
  std::string failure;
};

/// Drives one long-lived backend process. Up to `parallelism` requests are
/// in flight; responses are re-sequenced into request order. Timed-out
/// requests get a synthesized error response and late answers for them are
/// ignored.
///
/// Throws BackendError if the process cannot start and ProtocolError on a
/// malformed line, an unknown id or a duplicate response.
BackendRun<AsrResponse> run_asr(const BackendOptions& options,
                                std::span<const AsrRequest> requests);
BackendRun<TtsResponse> run_tts(const BackendOptions& options,
                                std::span<const TtsRequest> requests);

namespace detail {

struct LineOutcome {
  std::optional<std::string> line;  // raw response line
  std::string error;                // set when line is empty
};

struct LineRun {
  std::vector<LineOutcome> outcomes;
  bool backend_failed = false;
  std::string failure;
};

// Protocol-agnostic engine behind run_asr/run_tts.
LineRun run_lines(const BackendOptions& options,
                  const std::vector<std::string>& ids,
                  const std::vector<std::string>& request_lines);

}  // namespace detail

}  // namespace dforge
