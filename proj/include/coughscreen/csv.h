// Copyright 2026 The CoughScreen Authors. All Rights Reserved.
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

// Minimal CSV helpers for the project's interchange files. Fields never
// contain quoted commas in these formats, so no quoting is supported.

#ifndef COUGHSCREEN_CSV_H_
#define COUGHSCREEN_CSV_H_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace coughscreen::csv {

// Splits on commas; strips a trailing '\r' from the line and surrounding
// blanks from each field.
std::vector<std::string_view> SplitLine(std::string_view line);

// Parses a decimal float. Throws Error(kData) on garbage or trailing text.
// Non-finite spellings (nan, inf) parse successfully; callers validate.
double ParseDouble(std::string_view field);

// Shortest representation that round-trips exactly.
std::string FormatDouble(double value);

// Whole-file read; throws Error(kNotFound) when the file cannot be opened.
std::string ReadFile(const std::filesystem::path& path);

// Splits into lines, dropping a final empty line.
std::vector<std::string_view> Lines(std::string_view text);

void WriteFile(const std::filesystem::path& path, std::string_view contents);

}  // namespace coughscreen::csv

#endif  // COUGHSCREEN_CSV_H_
