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

// Run configuration: flat sectioned key = value text.
//
//   # comment
//   [section]
//   key = value   # trailing comment
//
// Every section and key is checked against a fixed schema at load time, so typos
// fail loudly instead of silently falling back to defaults.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ringsqz::cli {

class RunConfig {
 public:
  static RunConfig parse(const std::string& text, const std::string& origin = "<config>");
  static RunConfig load(const std::string& path);

  bool has(const std::string& section, const std::string& key) const;
  bool has_section(const std::string& section) const;

  std::optional<std::string> text(const std::string& section, const std::string& key) const;
  std::optional<double> number(const std::string& section, const std::string& key) const;
  std::optional<std::int64_t> integer(const std::string& section, const std::string& key) const;
  std::optional<std::uint64_t> unsigned_integer(const std::string& section, const std::string& key) const;
  std::optional<bool> boolean(const std::string& section, const std::string& key) const;
  std::optional<std::vector<double>> number_list(const std::string& section, const std::string& key) const;

  double number_or(const std::string& section, const std::string& key, double fallback) const;

  /// FNV-1a 64 of the raw config text, as 16 hex digits.
  const std::string& hash() const { return hash_; }
  /// Directory holding the config file; relative data paths resolve against it.
  const std::string& base_dir() const { return base_dir_; }

 private:
  struct Entry {
    std::string value;
    int line = 0;
  };
  const Entry* find(const std::string& section, const std::string& key) const;
  [[noreturn]] void bad_value(const std::string& section, const std::string& key, const std::string& expected) const;

  std::map<std::string, std::map<std::string, Entry>> sections_;
  std::string origin_;
  std::string hash_;
  std::string base_dir_ = ".";
};

std::string fnv1a_hex(const std::string& bytes);

}  // namespace ringsqz::cli
