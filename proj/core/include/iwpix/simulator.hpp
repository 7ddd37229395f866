#pragma once

#include <any>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>

#include "iwpix/screen.hpp"

namespace iwpix {

using Action = int;

/// Result of applying one action for some number of frames.
struct StepOutcome {
  double reward = 0.0;  // raw, summed over frames
  bool terminal = false;
  bool death = false;  // a life was lost; independent of reward and terminal
  int frames = 0;

  /// Sequential composition: rewards and frames add, flags or together.
  StepOutcome& operator+=(const StepOutcome& next) {
    reward += next.reward;
    terminal = terminal || next.terminal;
    death = death || next.death;
    frames += next.frames;
    return *this;
  }

  friend bool operator==(const StepOutcome&, const StepOutcome&) = default;
};

/// Raised when the simulator is driven outside its contract (stepping a
/// terminal state, restoring a foreign handle).
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Opaque snapshot of a simulator's full state.
class StateHandle {
 public:
  StateHandle() = default;
  explicit StateHandle(std::any state) : state_(std::move(state)) {}

  bool empty() const { return !state_.has_value(); }
  template <typename T>
  const T& as() const {
    const T* p = std::any_cast<T>(&state_);
    if (p == nullptr) throw UsageError("state handle of a different simulator");
    return *p;
  }

 private:
  std::any state_;
};

/// Deterministic environment. Identical (state, action sequence) pairs give
/// identical outcomes and screens; save/restore round-trips exactly.
///
/// Every call to apply() counts as one simulator call regardless of how many
/// frames it emulates. restore() and screen() are free.
class Simulator {
 public:
  virtual ~Simulator() = default;

  virtual int action_count() const = 0;
  virtual const Screen& screen() const = 0;
  virtual StateHandle save() const = 0;
  virtual void restore(const StateHandle& handle) = 0;
  virtual bool terminal() const = 0;
  virtual std::unique_ptr<Simulator> clone() const = 0;
  /// Tiling the environment's screens are meant to be featurized with.
  virtual TilingConfig tiling() const = 0;
  /// Hash of the complete hidden state, when the environment can provide
  /// one. Used by exhaustive test oracles for duplicate detection.
  virtual std::optional<std::uint64_t> fingerprint() const {
    return std::nullopt;
  }

  const Screen& reset();
  /// Emulates `frames` frames holding `action`, stopping early if the game
  /// ends. Throws UsageError when already terminal and std::out_of_range for
  /// an invalid action.
  StepOutcome apply(Action action, int frames);

  std::uint64_t calls() const { return calls_; }

 protected:
  virtual void do_reset() = 0;
  /// One emulation frame. frames in the returned outcome is ignored.
  virtual StepOutcome step_frame(Action action) = 0;

 private:
  std::uint64_t calls_ = 0;
};

}  // namespace iwpix
