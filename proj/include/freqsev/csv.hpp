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

// Minimal RFC-4180-style CSV reading: comma separated, optional double
// quotes with "" escapes, no embedded newlines.

#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace freqsev::csv {

std::vector<std::string> split_line(std::string_view line);

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  // Next non-empty record, or nullopt at end of input. Tracks 1-based
  // physical line numbers for error messages.
  std::optional<std::vector<std::string>> next();
  std::size_t line() const noexcept { return line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
};

// Quotes a field only when it contains a separator, quote or whitespace edge.
std::string escape(std::string_view field);

// Round-trip exact decimal rendering of a double (shortest form).
std::string format_double(double value);

// Throws std::invalid_argument unless the whole field is a finite number.
double parse_double(std::string_view field);

}  // namespace freqsev::csv
