#pragma once

// The online control loop: plan from the current state under a budget, back
// up discounted values, execute the best first action, repeat.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "iwpix/featurizer.hpp"
#include "iwpix/search_space.hpp"
#include "iwpix/simulator.hpp"

namespace iwpix {

enum class PlannerKind { kIw1, kIwk, kIwg, kIws, kRollout, kRaRollout, kRasRollout };

/// Accepts iw1, iwk, iwg, iws, rollout, ra-rollout, ras-rollout.
PlannerKind parse_planner(const std::string& name);
std::string to_string(PlannerKind kind);
bool is_rollout(PlannerKind kind);

struct EpisodeConfig {
  int frameskip = 15;
  Budget budget = Budget::simulator_calls(1000);
  double gamma = 0.99;
  double alpha = 50'000.0;
  /// Defaults to -10 * alpha.
  std::optional<double> death_penalty;
  PlannerKind planner = PlannerKind::kRollout;
  int width = 1;  // k for IW(k); also lifts Rollout IW
  std::vector<FeatureId> goals;  // IW_G atoms
  std::uint64_t max_frames = 18'000;
  bool caching = true;
  std::uint64_t seed = 0;
  int calibration_actions = 100;
  bool extend_on_no_change = true;
  FeatureFamilies families = FeatureFamilies::all();
  std::optional<TilingConfig> tiling;  // overrides the environment's tiling
  /// Also log each decision's lookahead tree (see dump_tree).
  bool log_trees = false;

  RewardShaping shaping() const;
  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

struct DecisionRecord {
  Action selected = -1;
  bool fallback = false;  // no generated root child; action drawn at random
  double raw_reward = 0.0;
  int frames = 0;
  std::size_t lookahead_nodes = 0;
  std::uint64_t rollouts = 0;
  std::uint64_t simulator_calls = 0;
  double elapsed = 0.0;  // seconds
  Depth tree_depth_max = 0;
};

enum class Termination { kGameOver, kFrameCap, kError };
std::string to_string(Termination t);

struct EpisodeResult {
  double total_raw_score = 0.0;
  std::uint64_t frames = 0;
  std::vector<DecisionRecord> decisions;
  Termination terminated_by = Termination::kFrameCap;
  std::string error;  // set with kError

  std::uint64_t simulator_calls() const;
};

/// Discounted value of each root child: a node's value is its shaped edge
/// reward plus gamma times the best value among its filled children.
/// Unfilled slots yield nullopt.
std::vector<std::optional<double>> backup_values(const Node& root, double gamma);

/// Argmax with uniform tie-breaking; nullopt when no child has a value.
std::optional<Action> select_action(const std::vector<std::optional<double>>& values,
                                    std::mt19937_64& rng);

/// Plays one episode on `env` from its current state. Decision-level
/// failures end the episode with Termination::kError and the partial result.
/// When `log` is given, one JSON object per decision and a summary object
/// are written to it, one per line.
EpisodeResult run_episode(Simulator& env, const EpisodeConfig& cfg,
                          std::ostream* log = nullptr);

struct BatchResult {
  std::vector<std::uint64_t> seeds;
  std::vector<EpisodeResult> runs;
  double mean_score = 0.0;
};

/// Seed of run `i` of a batch.
std::uint64_t run_seed(std::uint64_t base, std::uint64_t i);

/// `n_runs` independent episodes on fresh environments from `make_env`,
/// `jobs` at a time. With `logs`, run i's episode log ends up in (*logs)[i].
BatchResult run_batch(const std::function<std::unique_ptr<Simulator>()>& make_env,
                      const EpisodeConfig& cfg, int n_runs, int jobs = 1,
                      std::vector<std::string>* logs = nullptr);

}  // namespace iwpix
