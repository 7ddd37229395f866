#pragma once

// Small deterministic pixel games standing in for Atari titles. One agent
// pixel moves on a grid; cells may hold one-shot reward items, hazards that
// cost a life, or walls. An optional HUD row on top lights pixel i once
// item i has been collected.
//
// Palette: 0 floor, 1 agent, 2 item, 3 hazard, 4 wall / HUD marker. The
// palette size is one more than the largest color the layout can show.

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "iwpix/simulator.hpp"

namespace iwpix {

namespace toy_color {
inline constexpr ColorId kFloor = 0;
inline constexpr ColorId kAgent = 1;
inline constexpr ColorId kItem = 2;
inline constexpr ColorId kHazard = 3;
inline constexpr ColorId kMarker = 4;
}  // namespace toy_color

struct GridCell {
  int x = 0;
  int y = 0;
  friend bool operator==(const GridCell&, const GridCell&) = default;
};

struct RewardItem {
  GridCell cell;
  double value = 1.0;
  bool terminal = false;
};

/// Declarative toy environment definition.
struct ToyEnvSpec {
  std::string name = "toy";
  int width = 1;
  int height = 1;
  GridCell start;
  /// Movement actions, in action-id order, drawn from "u", "d", "l", "r".
  std::string moves = "lr";
  /// Extra actions that leave the agent in place, numbered after the moves.
  int noop_actions = 0;
  /// Reward per frame spent on a no-op action; no-ops never change the screen.
  double noop_reward = 0.0;
  /// Frames a move must be held before the agent advances one cell.
  int move_period = 1;
  std::vector<RewardItem> items;
  std::vector<GridCell> hazards;
  std::vector<GridCell> walls;
  int lives = 1;
  /// Game over after this many frames; 0 disables the cap.
  int max_frames = 0;
  bool end_when_cleared = false;
  bool hud = false;

  /// Throws std::invalid_argument describing the first inconsistency.
  void validate() const;
  int palette_size() const;
  int action_count() const {
    return static_cast<int>(moves.size()) + noop_actions;
  }
};

ToyEnvSpec toy_spec_from_json(const nlohmann::json& j);
nlohmann::json toy_spec_to_json(const ToyEnvSpec& spec);
ToyEnvSpec load_toy_spec(const std::string& path);

/// 1 x length corridor, agent at the left end, reward 1 at the right end
/// (terminal).
ToyEnvSpec pixel_chain(int length, int noop_actions = 0, int move_period = 1);
/// Chain whose agent only advances after a move is held for
/// `latch_frames` frames.
ToyEnvSpec latched_chain(int length, int latch_frames);
/// width x height grid with `items` reward-1 items at fixed pseudo-random
/// cells; the game ends when all are collected.
ToyEnvSpec collector_grid(int width, int height, int items);
/// Corridor with a 0.5 bonus next to the start, a hazard in the second to
/// last cell and a 1.0 reward behind it.
ToyEnvSpec hazard_corridor(int length);
/// Parses "name(arg, ...)" for the built-in families above.
ToyEnvSpec builtin_toy_spec(const std::string& text);

class ToyEnv final : public Simulator {
 public:
  explicit ToyEnv(ToyEnvSpec spec);

  const ToyEnvSpec& spec() const { return spec_; }
  int action_count() const override { return spec_.action_count(); }
  const Screen& screen() const override { return screen_; }
  StateHandle save() const override;
  void restore(const StateHandle& handle) override;
  bool terminal() const override { return state_.terminal; }
  std::unique_ptr<Simulator> clone() const override;
  TilingConfig tiling() const override;
  std::optional<std::uint64_t> fingerprint() const override;

  GridCell agent() const { return state_.agent; }
  int lives() const { return state_.lives; }

 protected:
  void do_reset() override;
  StepOutcome step_frame(Action action) override;

 private:
  struct State {
    GridCell agent;
    std::vector<bool> collected;
    int lives = 1;
    int frame = 0;
    int hold = 0;
    Action held = -1;
    bool terminal = false;
  };

  bool blocked(GridCell c) const;
  void render();

  ToyEnvSpec spec_;
  State state_;
  Screen screen_;
};

}  // namespace iwpix
