#pragma once

// Lookahead-tree nodes and the glue every planner uses to materialize them:
// budgets, reward shaping, and node filling through the caching simulator.

#include <chrono>
#include <cstdint>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "iwpix/caching_simulator.hpp"
#include "iwpix/featurizer.hpp"
#include "iwpix/features.hpp"

namespace iwpix {

/// Per-decision planning budget.
struct Budget {
  enum class Kind { kCalls, kSeconds, kUnlimited };

  Kind kind = Kind::kUnlimited;
  std::uint64_t calls = 0;
  double seconds = 0.0;

  static Budget simulator_calls(std::uint64_t n);
  static Budget wall_clock(double s);
  static Budget unlimited() { return {}; }

  std::string to_string() const;
};

/// Tracks one decision's consumption against a Budget. Simulator calls are
/// measured on the inner simulator's counter from construction on.
class BudgetTracker {
 public:
  BudgetTracker(Budget budget, const Simulator& sim);

  /// True once no further simulator call may start.
  bool exhausted() const;
  std::uint64_t calls_used() const { return sim_.calls() - start_calls_; }
  double elapsed_seconds() const;
  const Budget& budget() const { return budget_; }

 private:
  Budget budget_;
  const Simulator& sim_;
  std::uint64_t start_calls_;
  std::chrono::steady_clock::time_point start_;
};

struct RewardShaping {
  bool risk_averse = false;
  double alpha = 50'000.0;
  double death_penalty = -500'000.0;
};

/// Risk-averse shaping: negative rewards scaled by alpha, plus the death
/// penalty when a life was lost. Identity when not risk averse.
double shape_reward(double raw, bool death, const RewardShaping& shaping);

/// Lookahead-tree node shared by the breadth-first and rollout planners.
struct Node {
  Node* parent = nullptr;
  Action action = -1;  // edge from the parent; -1 at the root
  Depth depth = 0;

  bool filled = false;
  StepOutcome outcome;       // raw
  double reward = 0.0;       // shaped edge reward
  double path_reward = 0.0;  // shaped, summed from the root
  FeatureSet observation;
  FeatureSet features;
  bool terminal = false;

  bool pruned = false;  // breadth-first: generated but not novel
  bool visited = false;
  bool solved = false;

  /// Empty until expanded; afterwards one slot per action.
  std::vector<std::unique_ptr<Node>> children;

  bool expanded() const { return !children.empty(); }
  std::vector<Action> path() const;
};

struct TreeSummary {
  std::size_t filled_nodes = 0;
  Depth max_depth = 0;  // deepest filled node
};

TreeSummary summarize(const Node& root);

/// Writes one line per filled node in pre-order, children in action order:
///   <path> <depth> <reward> <pruned>
/// where <path> is the comma-separated action sequence ("-" for the root),
/// <reward> the shaped edge reward, and <pruned> 0 or 1.
void dump_tree(std::ostream& out, const Node& root);

/// Everything one search needs to create and fill nodes. Installs a call
/// gate on the caching simulator for its lifetime so no simulator call
/// starts once the budget is spent.
class SearchSpace {
 public:
  SearchSpace(CachingSimulator& sim, const Featurizer& featurizer,
              RewardShaping shaping, BudgetTracker& budget);
  ~SearchSpace();
  SearchSpace(const SearchSpace&) = delete;
  SearchSpace& operator=(const SearchSpace&) = delete;

  const Featurizer& featurizer() const { return featurizer_; }
  const RewardShaping& shaping() const { return shaping_; }
  BudgetTracker& budget() { return budget_; }
  int action_count() const { return sim_.action_count(); }
  CachingSimulator& simulator() { return sim_; }

  /// A filled root for the caching simulator's root state.
  std::unique_ptr<Node> make_root(const FeatureSet* prev_observation) const;
  /// Re-fills an existing root (for example a retained subtree) in place.
  void fill_root(Node& root, const FeatureSet* prev_observation) const;
  /// One unfilled child per action. No simulator calls.
  void expand(Node& node) const;
  /// Materializes `node` from its parent. Returns false, leaving the node
  /// unfilled, when the budget refuses the required simulator call.
  bool fill(Node& node);

 private:
  CachingSimulator& sim_;
  const Featurizer& featurizer_;
  RewardShaping shaping_;
  BudgetTracker& budget_;
};

}  // namespace iwpix
