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

// The four ringsqz subcommands. Each reads a RunConfig, writes its outputs into
// out_dir and returns normally; failures surface as ringsqz::Error.

#include <cstdint>
#include <string>
#include <vector>

#include "config.hpp"
#include "ringsqz/errors.hpp"
#include "ringsqz/photon_stats.hpp"
#include "ringsqz/ring_model.hpp"
#include "ringsqz/tes_pipeline.hpp"

namespace ringsqz::cli {

struct CommandContext {
  RunConfig config;
  std::uint64_t seed = 1;
  std::string out_dir = ".";
  unsigned threads = 0;
};

/// Files written by a command, relative to out_dir, plus lines for the sidecar log.
struct CommandResult {
  std::vector<std::string> files;
  std::vector<std::string> log;
};

CommandResult cmd_spectrum(const CommandContext& ctx);
CommandResult cmd_counts(const CommandContext& ctx);
CommandResult cmd_traces(const CommandContext& ctx);
CommandResult cmd_fit(const CommandContext& ctx);

/// 2 config/format, 3 numerical, 4 degenerate data.
int exit_code_for(const Error& error);

// Config section readers, exposed for tests.
RingParams ring_from_config(const RunConfig& cfg);
PumpDrive drive_from_config(const RunConfig& cfg, const RingParams& ring);
SchmidtSpectrum schmidt_from_config(const RunConfig& cfg);
PulseTemplate template_from_config(const RunConfig& cfg, double& sample_period);

}  // namespace ringsqz::cli
