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

#include "config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include "ringsqz/errors.hpp"

namespace ringsqz::cli {
namespace {

using Schema = std::map<std::string, std::set<std::string>>;

const Schema& schema() {
  static const Schema s = {
      {"run", {"seed", "threads"}},
      {"ring",
       {"loaded_q", "resonance_frequency", "escape_efficiency", "escape_efficiency_signal", "escape_efficiency_idler",
        "downstream_efficiency", "group_velocity", "nonlinear_parameter", "round_trip_length", "dissipation_signal",
        "dissipation_idler", "pump_frequency", "signal_frequency", "idler_frequency"}},
      {"drive", {"gain", "intracavity_photons", "coupling", "detuning_mode", "detuning"}},
      {"spectrum", {"sideband_min", "sideband_max", "points", "noise_db"}},
      {"schmidt",
       {"squeezing", "modes", "mean_pairs", "eta", "eta_signal", "eta_idler", "noise_mean", "noise_mean_signal",
        "noise_mean_idler"}},
      {"counts", {"pulses", "saturation_threshold", "include_saturated", "subsets", "gain_scales"}},
      {"template",
       {"samples", "sample_period", "rise_time", "decay_time", "separation_sigmas", "noise_sigma", "nonlinearity"}},
      {"traces",
       {"input_signal", "input_idler", "csv_sample_period", "pulses", "max_components", "improvement_threshold",
        "write_traces"}},
      {"fit",
       {"kind", "data", "model", "gradient_tolerance", "max_iterations", "g", "eta", "gamma", "detuning_over_gamma",
        "k", "power_column", "n_tot_column"}},
  };
  return s;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool parse_double(const std::string& s, double& out) {
  const char* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

RunConfig RunConfig::parse(const std::string& text, const std::string& origin) {
  RunConfig cfg;
  cfg.origin_ = origin;
  cfg.hash_ = fnv1a_hex(text);
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line_no = 0;
  auto fail = [&](const std::string& what) {
    throw FormatError(origin + ":" + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!schema().count(section)) fail("unknown section [" + section + "]");
      cfg.sections_[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected key = value");
    if (section.empty()) fail("key outside of any section");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!schema().at(section).count(key)) fail("unknown key '" + key + "' in [" + section + "]");
    if (value.empty()) fail("empty value for '" + key + "'");
    auto& entries = cfg.sections_[section];
    if (entries.count(key)) fail("duplicate key '" + key + "' in [" + section + "]");
    entries[key] = Entry{value, line_no};
  }
  return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open config " + path);
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  RunConfig cfg = parse(text, path);
  const auto parent = std::filesystem::path(path).parent_path();
  cfg.base_dir_ = parent.empty() ? "." : parent.string();
  return cfg;
}

const RunConfig::Entry* RunConfig::find(const std::string& section, const std::string& key) const {
  const auto s = sections_.find(section);
  if (s == sections_.end()) return nullptr;
  const auto k = s->second.find(key);
  return k == s->second.end() ? nullptr : &k->second;
}

void RunConfig::bad_value(const std::string& section, const std::string& key, const std::string& expected) const {
  const Entry* e = find(section, key);
  throw FormatError(origin_ + ":" + std::to_string(e ? e->line : 0) + ": [" + section + "] " + key + " = '" +
                    (e ? e->value : std::string()) + "' is not " + expected);
}

bool RunConfig::has(const std::string& section, const std::string& key) const { return find(section, key) != nullptr; }

bool RunConfig::has_section(const std::string& section) const { return sections_.count(section) != 0; }

std::optional<std::string> RunConfig::text(const std::string& section, const std::string& key) const {
  const Entry* e = find(section, key);
  if (!e) return std::nullopt;
  return e->value;
}

std::optional<double> RunConfig::number(const std::string& section, const std::string& key) const {
  const Entry* e = find(section, key);
  if (!e) return std::nullopt;
  double v = 0.0;
  if (!parse_double(e->value, v) || !std::isfinite(v)) bad_value(section, key, "a finite number");
  return v;
}

std::optional<std::int64_t> RunConfig::integer(const std::string& section, const std::string& key) const {
  const Entry* e = find(section, key);
  if (!e) return std::nullopt;
  std::int64_t v = 0;
  const char* end = e->value.data() + e->value.size();
  const auto [ptr, ec] = std::from_chars(e->value.data(), end, v);
  if (ec != std::errc() || ptr != end) bad_value(section, key, "an integer");
  return v;
}

std::optional<std::uint64_t> RunConfig::unsigned_integer(const std::string& section, const std::string& key) const {
  const Entry* e = find(section, key);
  if (!e) return std::nullopt;
  std::uint64_t v = 0;
  const char* end = e->value.data() + e->value.size();
  const auto [ptr, ec] = std::from_chars(e->value.data(), end, v);
  if (ec != std::errc() || ptr != end) bad_value(section, key, "a nonnegative integer");
  return v;
}

std::optional<bool> RunConfig::boolean(const std::string& section, const std::string& key) const {
  const Entry* e = find(section, key);
  if (!e) return std::nullopt;
  if (e->value == "true" || e->value == "1" || e->value == "yes") return true;
  if (e->value == "false" || e->value == "0" || e->value == "no") return false;
  bad_value(section, key, "a boolean (true/false)");
}

std::optional<std::vector<double>> RunConfig::number_list(const std::string& section, const std::string& key) const {
  const Entry* e = find(section, key);
  if (!e) return std::nullopt;
  std::vector<double> out;
  std::istringstream in(e->value);
  std::string item;
  while (std::getline(in, item, ',')) {
    double v = 0.0;
    if (!parse_double(trim(item), v) || !std::isfinite(v)) bad_value(section, key, "a comma-separated number list");
    out.push_back(v);
  }
  if (out.empty()) bad_value(section, key, "a comma-separated number list");
  return out;
}

double RunConfig::number_or(const std::string& section, const std::string& key, double fallback) const {
  return number(section, key).value_or(fallback);
}

}  // namespace ringsqz::cli
