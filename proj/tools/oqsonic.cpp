// Copyright 2026 The oqsonic Authors
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

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "oqsonic/cli/commands.hpp"

namespace {

struct CommonFlags {
  std::string config;
  std::string out;
  bool overwrite = false;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "Run configuration (YAML)")->required();
  cmd->add_option("--out", f.out, "Output directory (overrides outputs.dir)");
  cmd->add_flag("--overwrite", f.overwrite, "Replace existing output files");
  cmd->add_option("--seed", f.seed, "Override dynamics.seed");
  cmd->add_flag("--quiet", f.quiet, "Suppress progress messages");
}

oqs::cli::RunConfig load(const CommonFlags& f) {
  std::ifstream is(f.config);
  if (!is) throw oqs::cli::ConfigError("cannot read config file " + f.config);
  std::stringstream ss;
  ss << is.rdbuf();
  oqs::cli::RunConfig cfg = oqs::cli::parse_config(ss.str());
  if (!f.out.empty()) cfg.outputs.dir = f.out;
  if (f.overwrite) cfg.outputs.overwrite = true;
  if (f.seed && cfg.dynamics) cfg.dynamics->ensemble.base_seed = *f.seed;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Open quantum system simulator with binaural sonification"};
  app.require_subcommand(1);
  CommonFlags flags;
  auto* spectrum = app.add_subcommand("spectrum", "Eigenvalues, mapped frequencies, densities");
  auto* evolve = app.add_subcommand("evolve", "Integrate the dynamics, write observables");
  auto* render = app.add_subcommand("render", "Evolve if needed, then render binaural WAV");
  for (auto* c : {spectrum, evolve, render}) add_common(c, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : oqs::cli::kConfigError;
  }

  try {
    const oqs::cli::RunConfig cfg = load(flags);
    std::ostream* log = flags.quiet ? nullptr : &std::cerr;
    if (spectrum->parsed()) {
      oqs::cli::cmd_spectrum(cfg, log);
    } else if (evolve->parsed()) {
      oqs::cli::cmd_evolve(cfg, log);
    } else {
      oqs::cli::cmd_render(cfg, log);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return oqs::cli::exit_code_for(e);
  }
  return oqs::cli::kOk;
}
