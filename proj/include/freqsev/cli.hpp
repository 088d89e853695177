/*
 * Copyright 2026 The freqsev Authors.
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

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace freqsev::cli {

inline constexpr const char* kVersion = "0.1.0";

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kUsage = 1;
inline constexpr int kData = 2;
inline constexpr int kInternal = 3;

// Runs one command, e.g. {"tune", "--config", "tune.json", "--seed", "7"}.
// Help goes to `out`; failures are reported on `err` as one JSON line.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// FNV-1a, 64 bit.
std::uint64_t fnv1a(std::string_view bytes) noexcept;

}  // namespace freqsev::cli
