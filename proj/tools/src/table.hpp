// Copyright 2026 The ringsqz Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Small helpers for the CSV and report files the commands read and write.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace ringsqz::cli {

/// Shortest round-trip decimal form of v.
std::string format_double(double v);

/// "# ringsqz <command> config_hash=<hex> seed=<seed>"
std::string provenance_line(const std::string& command, const std::string& config_hash, std::uint64_t seed);

/// Header-addressed CSV: '#' lines are skipped, the first remaining line names the columns.
class Table {
 public:
  static Table read(const std::string& path);

  std::size_t rows() const { return cells_.size(); }
  bool has_column(const std::string& name) const;
  /// Throws FormatError naming the missing column and the ones present.
  std::size_t column(const std::string& name) const;
  const std::string& cell(std::size_t row, std::size_t col) const { return cells_[row][col]; }
  double number(std::size_t row, std::size_t col) const;
  std::vector<double> numbers(const std::string& name) const;

 private:
  std::string path_;
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> cells_;
  std::vector<int> lines_;
};

}  // namespace ringsqz::cli
