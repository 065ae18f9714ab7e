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

// Trace file formats.
//
// Binary, little-endian: "TES1", u32 num_pulses, u32 num_samples, f64 sample_period,
// then num_pulses * num_samples f32 values row-major.
// CSV: one trace per row, comma separated, '#' lines ignored.

#include <string>

#include "ringsqz/tes_pipeline.hpp"

namespace ringsqz {

void write_traces_binary(const std::string& path, const TraceSet& traces);
TraceSet read_traces_binary(const std::string& path);

void write_traces_csv(const std::string& path, const TraceSet& traces);
TraceSet read_traces_csv(const std::string& path, double sample_period);

/// Picks the reader from the file's first four bytes.
TraceSet read_traces(const std::string& path, double csv_sample_period);

}  // namespace ringsqz
