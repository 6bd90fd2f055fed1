// Copyright 2025 The toneprobe Authors
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

#ifndef TONEPROBE_COMMON_STRINGS_H_
#define TONEPROBE_COMMON_STRINGS_H_

#include <string>
#include <string_view>
#include <vector>

namespace toneprobe::strings {

// printf-style formatting into a std::string.
std::string strf(const char* fmt, ...) __attribute__((format(printf, 1, 2)));

// Splits on a single delimiter, keeping empty fields.
std::vector<std::string> split(std::string_view s, char delim);

// Splits on runs of ASCII whitespace, dropping empty fields.
std::vector<std::string> split_ws(std::string_view s);

std::string_view trim(std::string_view s);

std::string lower(std::string_view s);

// Decodes a UTF-8 string into one std::string per code point. Invalid bytes
// are passed through as single-byte units.
std::vector<std::string> utf8_chars(std::string_view s);

// Fixed-point decimal, e.g. format_fixed(1.5, 6) == "1.500000".
std::string format_fixed(double v, int decimals);

// Shortest decimal string that round-trips to the same double.
std::string format_double(double v);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace toneprobe::strings

#endif  // TONEPROBE_COMMON_STRINGS_H_
