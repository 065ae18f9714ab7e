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

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "commands.hpp"

namespace {

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

// Timestamps and other run-specific details go here so the data files stay reproducible.
void write_log(const std::string& out_dir, const std::string& command, const std::string& config_path,
               const std::string& started, int exit_code, const std::vector<std::string>& lines) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  std::ofstream log(std::filesystem::path(out_dir) / (command + ".log"), std::ios::trunc);
  if (!log) return;
  log << "command = " << command << '\n'
      << "config = " << config_path << '\n'
      << "started = " << started << '\n'
      << "finished = " << utc_now() << '\n'
      << "exit_code = " << exit_code << '\n';
  for (const auto& l : lines) log << l << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  using namespace ringsqz::cli;
  CLI::App app{"ringsqz: microring squeezing model, photon statistics, TES analysis and fits"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  unsigned threads = 0;
  bool have_threads = false;

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"spectrum", "squeezing spectrum CSV and fit-ready points"},
      {"counts", "Monte Carlo photon counts and statistics report"},
      {"traces", "TES trace classification (ingest or synthetic round trip)"},
      {"fit", "parameter fits to spectrum, NRF, power-scaling or power-scan data"},
  };
  std::vector<CLI::App*> subs;
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "run configuration file")->required();
    sub->add_option("--seed", seed, "64-bit seed (overrides [run] seed)");
    sub->add_option("--out", out_dir, "output directory")->capture_default_str();
    sub->add_option("--threads", threads, "worker threads, 0 = auto (overrides [run] threads)")
        ->each([&](const std::string&) { have_threads = true; });
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  CLI::App* active = nullptr;
  for (auto* s : subs)
    if (s->parsed()) active = s;
  const std::string command = active->get_name();
  const bool seed_given = active->count("--seed") > 0;

  const std::string started = utc_now();
  int code = 0;
  CommandResult result;
  try {
    CommandContext ctx{RunConfig::load(config_path), 1, out_dir, 0};
    const auto cfg_seed = ctx.config.unsigned_integer("run", "seed");
    ctx.seed = seed_given ? seed : cfg_seed.value_or(1);
    const auto cfg_threads = ctx.config.integer("run", "threads");
    if (cfg_threads && *cfg_threads < 0) throw ringsqz::DomainError("[run] threads must be >= 0");
    ctx.threads = have_threads ? threads : static_cast<unsigned>(cfg_threads.value_or(0));

    if (command == "spectrum") {
      result = cmd_spectrum(ctx);
    } else if (command == "counts") {
      result = cmd_counts(ctx);
    } else if (command == "traces") {
      result = cmd_traces(ctx);
    } else {
      result = cmd_fit(ctx);
    }
    for (const auto& f : result.files) std::cout << "wrote " << (std::filesystem::path(out_dir) / f).string() << '\n';
  } catch (const ringsqz::FormatError& e) {
    code = exit_code_for(e);
    std::cerr << "error: " << e.what();
    if (e.byte_offset() >= 0) std::cerr << " (byte offset " << e.byte_offset() << ")";
    std::cerr << '\n';
  } catch (const ringsqz::Error& e) {
    code = exit_code_for(e);
    std::cerr << "error: " << e.what() << '\n';
  } catch (const std::filesystem::filesystem_error& e) {
    code = 2;
    std::cerr << "error: " << e.what() << '\n';
  }
  write_log(out_dir, command, config_path, started, code, result.log);
  return code;
}
