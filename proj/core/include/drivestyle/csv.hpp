// Copyright 2026 The drivestyle Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Small text helpers shared by every reader and writer in the library.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace drivestyle {

std::string read_text_file(const std::filesystem::path& path);
/// Creates parent directories as needed.
void write_text_file(const std::filesystem::path& path, std::string_view content);

/// Parses a decimal number. Empty cells, "nan" and "inf" give non-finite
/// values; anything else unparsable throws DataError.
double parse_double(std::string_view s);
long long parse_int(std::string_view s);

/// Shortest representation that round-trips exactly.
std::string format_double(double v);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view data);
std::string hex64(std::uint64_t v);

/// Minimal comma-separated reader: one record per line, no embedded
/// separators; surrounding whitespace and double quotes are stripped.
class CsvReader {
 public:
  CsvReader(std::string_view text, std::string source);

  const std::vector<std::string>& header() const noexcept { return header_; }
  /// Column index by name; throws SchemaError naming `source` when absent.
  std::size_t column(const std::string& name) const;
  bool has_column(const std::string& name) const;

  /// Reads the next non-empty record. Returns false at end of input.
  bool next(std::vector<std::string>& fields);
  const std::string& source() const noexcept { return source_; }

 private:
  bool next_line(std::string_view& line);

  std::string_view text_;
  std::size_t pos_ = 0;
  std::string source_;
  std::vector<std::string> header_;
};

void split_csv_line(std::string_view line, std::vector<std::string>& out);

}  // namespace drivestyle
