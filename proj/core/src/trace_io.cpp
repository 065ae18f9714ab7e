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

#include "ringsqz/trace_io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "ringsqz/errors.hpp"

namespace ringsqz {
namespace {

static_assert(std::endian::native == std::endian::little, "trace I/O assumes a little-endian host");

constexpr std::array<char, 4> kMagic = {'T', 'E', 'S', '1'};
constexpr std::size_t kHeaderSize = 4 + 4 + 4 + 8;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

template <class T>
T load(const std::string& bytes, std::size_t offset) {
  T v;
  std::memcpy(&v, bytes.data() + offset, sizeof(T));
  return v;
}

template <class T>
void store(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

void check_sample_count(std::size_t num_samples, std::int64_t offset) {
  if (num_samples < 8) {
    throw FormatError("traces need at least 8 samples, got " + std::to_string(num_samples), offset);
  }
}

void check_period(double period, std::int64_t offset) {
  if (!(period > 0.0) || !std::isfinite(period)) throw FormatError("sample period must be positive", offset);
}

}  // namespace

void write_traces_binary(const std::string& path, const TraceSet& traces) {
  traces.validate();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path);
  out.write(kMagic.data(), kMagic.size());
  store(out, static_cast<std::uint32_t>(traces.num_pulses));
  store(out, static_cast<std::uint32_t>(traces.num_samples));
  store(out, traces.sample_period);
  out.write(reinterpret_cast<const char*>(traces.samples.data()),
            static_cast<std::streamsize>(traces.samples.size() * sizeof(float)));
  if (!out) throw FormatError("write failed for " + path);
}

TraceSet read_traces_binary(const std::string& path) {
  const std::string bytes = slurp(path);
  if (bytes.size() < kMagic.size() || std::memcmp(bytes.data(), kMagic.data(), kMagic.size()) != 0) {
    throw FormatError("missing TES1 magic", 0);
  }
  if (bytes.size() < kHeaderSize) {
    throw FormatError("truncated header", static_cast<std::int64_t>(bytes.size()));
  }
  TraceSet t;
  t.num_pulses = load<std::uint32_t>(bytes, 4);
  t.num_samples = load<std::uint32_t>(bytes, 8);
  t.sample_period = load<double>(bytes, 12);
  if (t.num_pulses == 0) throw FormatError("file holds no traces", 4);
  check_sample_count(t.num_samples, 8);
  check_period(t.sample_period, 12);

  const std::size_t payload = t.num_pulses * t.num_samples * sizeof(float);
  const std::size_t have = bytes.size() - kHeaderSize;
  if (have < payload) {
    throw FormatError("truncated payload: expected " + std::to_string(payload) + " bytes, found " +
                          std::to_string(have),
                      static_cast<std::int64_t>(bytes.size()));
  }
  if (have > payload) {
    throw FormatError("trailing bytes after payload", static_cast<std::int64_t>(kHeaderSize + payload));
  }
  t.samples.resize(t.num_pulses * t.num_samples);
  std::memcpy(t.samples.data(), bytes.data() + kHeaderSize, payload);
  for (std::size_t i = 0; i < t.samples.size(); ++i) {
    if (!std::isfinite(t.samples[i])) {
      throw FormatError("non-finite sample", static_cast<std::int64_t>(kHeaderSize + i * sizeof(float)));
    }
  }
  return t;
}

void write_traces_csv(const std::string& path, const TraceSet& traces) {
  traces.validate();
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw FormatError("cannot write " + path);
  for (std::size_t i = 0; i < traces.num_pulses; ++i) {
    const auto row = traces.row(i);
    for (std::size_t k = 0; k < row.size(); ++k) {
      std::fprintf(f, k == 0 ? "%.9g" : ",%.9g", static_cast<double>(row[k]));
    }
    std::fputc('\n', f);
  }
  if (std::fclose(f) != 0) throw FormatError("write failed for " + path);
}

TraceSet read_traces_csv(const std::string& path, double sample_period) {
  check_period(sample_period, -1);
  const std::string text = slurp(path);
  TraceSet t;
  t.sample_period = sample_period;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    std::size_t end = eol;
    if (end > pos && text[end - 1] == '\r') --end;
    const std::size_t line_start = pos;
    pos = eol + 1;
    if (end == line_start || text[line_start] == '#') continue;

    std::size_t fields = 0;
    const char* p = text.data() + line_start;
    const char* stop = text.data() + end;
    while (true) {
      while (p < stop && (*p == ' ' || *p == '\t')) ++p;
      float v = 0.0f;
      const auto [next, ec] = std::from_chars(p, stop, v);
      const auto offset = static_cast<std::int64_t>(p - text.data());
      if (ec != std::errc()) throw FormatError("cannot parse number", offset);
      if (!std::isfinite(v)) throw FormatError("non-finite sample", offset);
      t.samples.push_back(v);
      ++fields;
      p = next;
      while (p < stop && (*p == ' ' || *p == '\t')) ++p;
      if (p == stop) break;
      if (*p != ',') throw FormatError("expected ','", static_cast<std::int64_t>(p - text.data()));
      ++p;
    }
    if (t.num_pulses == 0) {
      check_sample_count(fields, static_cast<std::int64_t>(line_start));
      t.num_samples = fields;
    } else if (fields != t.num_samples) {
      throw FormatError("ragged row: expected " + std::to_string(t.num_samples) + " values, found " +
                            std::to_string(fields),
                        static_cast<std::int64_t>(line_start));
    }
    ++t.num_pulses;
  }
  if (t.num_pulses == 0) throw FormatError("file holds no traces", 0);
  return t;
}

TraceSet read_traces(const std::string& path, double csv_sample_period) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  std::array<char, 4> head{};
  in.read(head.data(), head.size());
  if (in.gcount() == 4 && head == kMagic) return read_traces_binary(path);
  return read_traces_csv(path, csv_sample_period);
}

}  // namespace ringsqz
