#pragma once

// Rollout IW: the lookahead tree is grown by random root-to-tip rollouts,
// each cut short as soon as its tip brings no extended feature <f, depth>
// with depth below the best depth d[f] seen so far.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <vector>

#include "iwpix/features.hpp"
#include "iwpix/search_space.hpp"

namespace iwpix {

/// What happened at one step of a rollout.
///   kNovel           new or revisited node improving some d[f]  (continue)
///   kNewNotNovel     new node improving nothing                 (solve, stop)
///   kRevisitedStale  known node with no f at depth == d[f]      (solve, stop)
///   kRevisitedKnown  known node with some f at depth == d[f]    (continue)
///   kTerminal        terminal node                              (solve, stop)
enum class RolloutCase { kNovel, kNewNotNovel, kRevisitedStale, kRevisitedKnown, kTerminal };

const char* to_string(RolloutCase c);

struct RolloutStep {
  Depth depth = 0;
  Action action = -1;
  RolloutCase kind = RolloutCase::kNovel;
};

struct RolloutTrace {
  std::vector<RolloutStep> steps;
  std::vector<FeatureId> improved;  // features whose d[f] decreased, ascending
  std::size_t newly_solved = 0;
  bool truncated = false;  // a simulator call was refused by the budget
};

struct RolloutOptions {
  int width = 1;
  /// One depth table per logscore of the shaped path reward.
  bool subscoring = false;
  /// Stop after this many rollouts; 0 means only the budget and the solved
  /// root stop the search.
  std::uint64_t max_rollouts = 0;
  std::function<void(const RolloutTrace&)> on_rollout;
};

struct RolloutStats {
  std::uint64_t rollouts = 0;
  std::size_t nodes = 0;  // filled nodes in the tree, root included
  Depth max_rollout_length = 0;
  bool solved = false;
  bool truncated = false;
};

/// Marks `n` solved, then every ancestor whose children are all filled and
/// solved, stopping at the first that is not. Returns how many nodes changed.
std::size_t solve_and_propagate(Node& n);

class RolloutSearch {
 public:
  /// `root` must be filled. Depth tables start at 0 for the root's features.
  RolloutSearch(SearchSpace& space, std::unique_ptr<Node> root,
                RolloutOptions options, std::mt19937_64& rng);

  Node& root() { return *root_; }
  std::unique_ptr<Node> release_root() { return std::move(root_); }
  const RolloutStats& stats() const { return stats_; }
  std::uint64_t feature_capacity() const { return capacity_; }

  /// Depth table of a partition, or null if it was never created.
  const DepthTable* table(int key) const;
  std::vector<int> partitions() const;

  /// One rollout from the root. Requires an unsolved root.
  RolloutTrace rollout();
  /// Rollouts until the root is solved, the budget runs out, or
  /// max_rollouts is reached.
  const RolloutStats& run();

 private:
  FeatureSet lifted(const FeatureSet& s) const;
  int partition(const Node& n) const;
  DepthTable& table_for(const Node& n);
  std::size_t solve(Node& n);

  SearchSpace& space_;
  std::unique_ptr<Node> root_;
  RolloutOptions options_;
  std::mt19937_64& rng_;
  std::uint64_t capacity_;
  std::map<int, DepthTable> tables_;
  RolloutStats stats_;
};

struct RolloutResult {
  std::unique_ptr<Node> root;
  RolloutStats stats;
};

RolloutResult generate_lookahead_tree(SearchSpace& space, std::unique_ptr<Node> root,
                                      const RolloutOptions& options,
                                      std::mt19937_64& rng);

/// Detaches the child reached by `executed` as a new root: depths rebased,
/// every node unfilled and its flags cleared, the shape kept so that
/// refilling through a re-rooted caching simulator costs no calls. Returns
/// null when that child was never filled.
std::unique_ptr<Node> reuse_subtree(std::unique_ptr<Node> root, Action executed);

}  // namespace iwpix
