#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "iwpix/simulator.hpp"

namespace iwpix {

/// How one lookahead edge is produced from its parent state.
struct FillPolicy {
  int frameskip = 1;
  /// Re-apply the action for another `frameskip` frames when the first
  /// application changed nothing: same observation, zero reward, and not
  /// terminal.
  bool extend_on_no_change = false;
  /// Observation equality used by the extension rule. Defaults to pixel
  /// equality when unset.
  std::function<bool(const Screen&, const Screen&)> same_observation;
};

struct FillResult {
  StepOutcome outcome;
  int applications = 0;
  bool refused = false;  // the extension was needed but `may_call` said no
};

/// Applies `action` to `sim` (which must be in the parent state whose screen
/// is `parent_screen`) under `policy`. The optional extension application
/// only happens if `may_call` allows it.
FillResult fill_with_extension(Simulator& sim, const Screen& parent_screen,
                               Action action, const FillPolicy& policy,
                               const std::function<bool()>& may_call = {});

/// Cached state for one action path from the decision root.
struct StepRecord {
  StepOutcome outcome;  // of the edge into this state; zero at the root
  int applications = 0;
  Screen screen;
  StateHandle handle;
  std::optional<std::uint64_t> fingerprint;
};

struct CachedStep {
  const StepRecord* record = nullptr;
  bool replayed = false;  // served entirely from the cache
  std::uint64_t inner_calls = 0;
};

/// Simulator front-end that remembers every state reached within the current
/// lookahead tree, keyed by action path from the decision root. A lookup
/// restores the longest cached prefix and simulates only the missing suffix.
/// The cache never changes what a path yields, only what it costs.
class CachingSimulator {
 public:
  /// Roots the cache at `inner`'s current state.
  CachingSimulator(Simulator& inner, FillPolicy policy);

  Simulator& inner() { return inner_; }
  const FillPolicy& policy() const { return policy_; }
  int action_count() const { return inner_.action_count(); }
  const StepRecord& root() const { return root_->record; }

  /// Consulted before every inner apply(); a refusal for a required step
  /// makes cached_apply return nullopt.
  void set_call_gate(std::function<bool()> gate) { gate_ = std::move(gate); }

  std::optional<CachedStep> cached_apply(std::span<const Action> path);
  bool contains(std::span<const Action> path) const;

  /// Keeps only the records under `executed`, re-rooted one level up. With
  /// no such record the cache is re-rooted at `inner`'s current state.
  void advance_root(Action executed);
  /// Drops every record and re-roots at `inner`'s current state.
  void reset_root();
  /// Puts `inner` back into the root state.
  void restore_root() { inner_.restore(root_->record.handle); }

  /// Records below the root.
  std::size_t record_count() const;
  std::uint64_t hits() const { return hits_; }
  std::uint64_t misses() const { return misses_; }

 private:
  struct Entry {
    StepRecord record;
    std::map<Action, std::unique_ptr<Entry>> children;
  };

  std::unique_ptr<Entry> snapshot_inner() const;

  Simulator& inner_;
  FillPolicy policy_;
  std::function<bool()> gate_;
  std::unique_ptr<Entry> root_;
  std::uint64_t hits_ = 0;
  std::uint64_t misses_ = 0;
};

}  // namespace iwpix
