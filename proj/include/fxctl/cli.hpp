#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace fxctl {

struct CliConfig {
  std::string scene;
  std::string catalog;    // defaults to the bundled catalog
  std::string templates;  // defaults to the bundled prompt templates
  std::string icons;      // defaults to the bundled icon list
  std::string provider = "fixture";  // fixture | live | scripted
  std::string fixtures;
  std::string fixture_mode = "replay";  // replay | record | replay-or-record
  std::string script;                   // rules for scripted mode, or the record upstream
  std::string live_config;
  std::vector<std::string> prompts;
  std::vector<std::string> sets;     // node=value in display units
  std::vector<std::string> presets;  // node=label
  std::vector<std::string> locks;    // node ids
  int steps = 0;
  double dt = 1.0 / 60.0;
  std::optional<std::uint64_t> seed;  // overrides the scene seed
  std::string dump_frames;
  std::string save_panel;
  std::string load_panel;
  bool palette = true;
};

// Throws Error(validation) on inconsistent flags.
void check_config(const CliConfig& config);

// Runs the headless workflow. Progress goes to `out`; failures print one
// "error [stage] kind: reason" line to `err` and return nonzero.
int run_cli(const CliConfig& config, std::ostream& out, std::ostream& err);

// Parses argv with CLI11 and runs. Returns the process exit status.
int cli_main(int argc, char** argv);

}  // namespace fxctl
