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

#include <string>
#include <string_view>

namespace dforge::utf8 {

inline constexpr char32_t kReplacement = 0xFFFD;

// Invalid or truncated sequences decode to U+FFFD, one per offending byte.
std::u32string decode(std::string_view bytes);

void append(std::string& out, char32_t cp);
std::string encode(std::u32string_view cps);
std::string encode(char32_t cp);

}  // namespace dforge::utf8
