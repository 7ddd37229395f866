#pragma once

// The iwpix command-line tool: run, features and sweep subcommands.

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "iwpix/episode.hpp"
#include "iwpix/toy_env.hpp"

namespace iwpix::cli {

inline constexpr const char* kResultsSchema = "iwpix.results/1";

struct RunConfig {
  EpisodeConfig episode;
  /// Built-in toy family such as "pixel_chain(5)"; ignored with env_file.
  std::string env = "pixel_chain(5)";
  std::string env_file;  // JSON toy spec
  int runs = 1;
  int jobs = 1;
  std::string out;    // results file; stdout when empty
  std::string trace;  // JSONL episode logs; none when empty
  bool trace_trees = false;
};

/// The toy spec named by the config, with move_period stretched by the
/// frameskip so that one decision moves the agent one cell.
ToyEnvSpec resolve_env(const RunConfig& cfg);
std::string env_label(const RunConfig& cfg);

/// HUD marker atoms, one per item; empty when the spec has no HUD.
std::vector<FeatureId> hud_goals(const ToyEnvSpec& spec);

/// Header plus one row per run and a mean row.
void write_results(std::ostream& out, const RunConfig& cfg, const BatchResult& batch);

/// Entry point shared by the executable and the tests. Returns the exit code.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace iwpix::cli
