#include "iwpix/toy_env.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace iwpix {

namespace {

GridCell step_toward(GridCell c, char move) {
  switch (move) {
    case 'u': return {c.x, c.y - 1};
    case 'd': return {c.x, c.y + 1};
    case 'l': return {c.x - 1, c.y};
    case 'r': return {c.x + 1, c.y};
  }
  return c;
}

bool inside(const ToyEnvSpec& s, GridCell c) {
  return c.x >= 0 && c.y >= 0 && c.x < s.width && c.y < s.height;
}

bool contains(const std::vector<GridCell>& cells, GridCell c) {
  return std::find(cells.begin(), cells.end(), c) != cells.end();
}

void fnv(std::uint64_t& h, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    h ^= (v >> (8 * i)) & 0xff;
    h *= 0x100000001b3ULL;
  }
}

GridCell cell_from_json(const nlohmann::json& j) {
  if (j.is_array()) return {j.at(0).get<int>(), j.at(1).get<int>()};
  return {j.at("x").get<int>(), j.at("y").get<int>()};
}

nlohmann::json cell_to_json(GridCell c) { return nlohmann::json::array({c.x, c.y}); }

}  // namespace

void ToyEnvSpec::validate() const {
  auto fail = [this](const std::string& what) {
    throw std::invalid_argument("toy env '" + name + "': " + what);
  };
  if (width < 1 || height < 1) fail("grid must be at least 1x1");
  if (!inside(*this, start)) fail("start outside grid");
  if (moves.find_first_not_of("udlr") != std::string::npos) {
    fail("moves may only contain u, d, l, r");
  }
  if (noop_actions < 0) fail("negative noop_actions");
  if (action_count() < 1) fail("no actions");
  if (move_period < 1) fail("move_period must be >= 1");
  if (lives < 1) fail("lives must be >= 1");
  if (max_frames < 0) fail("negative max_frames");
  if (hud && static_cast<int>(items.size()) > width) {
    fail("HUD needs one column per item");
  }
  if (contains(walls, start)) fail("start on a wall");
  for (const auto& it : items) {
    if (!inside(*this, it.cell)) fail("item outside grid");
    if (contains(walls, it.cell) || contains(hazards, it.cell)) {
      fail("item shares a cell with a wall or hazard");
    }
  }
  for (const auto& c : hazards) {
    if (!inside(*this, c)) fail("hazard outside grid");
  }
  for (const auto& c : walls) {
    if (!inside(*this, c)) fail("wall outside grid");
  }
}

int ToyEnvSpec::palette_size() const {
  int top = toy_color::kAgent;
  if (!items.empty()) top = toy_color::kItem;
  if (!hazards.empty()) top = toy_color::kHazard;
  if (!walls.empty() || hud) top = toy_color::kMarker;
  return top + 1;
}

ToyEnvSpec toy_spec_from_json(const nlohmann::json& j) {
  ToyEnvSpec s;
  s.name = j.value("name", s.name);
  s.width = j.at("width").get<int>();
  s.height = j.value("height", 1);
  if (j.contains("start")) s.start = cell_from_json(j.at("start"));
  s.moves = j.value("moves", s.moves);
  s.noop_actions = j.value("noop_actions", 0);
  s.noop_reward = j.value("noop_reward", 0.0);
  s.move_period = j.value("move_period", 1);
  s.lives = j.value("lives", 1);
  s.max_frames = j.value("max_frames", 0);
  s.end_when_cleared = j.value("end_when_cleared", false);
  s.hud = j.value("hud", false);
  for (const auto& it : j.value("items", nlohmann::json::array())) {
    RewardItem item;
    item.cell = cell_from_json(it.at("cell"));
    item.value = it.value("value", 1.0);
    item.terminal = it.value("terminal", false);
    s.items.push_back(item);
  }
  for (const auto& c : j.value("hazards", nlohmann::json::array())) {
    s.hazards.push_back(cell_from_json(c));
  }
  for (const auto& c : j.value("walls", nlohmann::json::array())) {
    s.walls.push_back(cell_from_json(c));
  }
  s.validate();
  return s;
}

nlohmann::json toy_spec_to_json(const ToyEnvSpec& s) {
  nlohmann::json j;
  j["name"] = s.name;
  j["width"] = s.width;
  j["height"] = s.height;
  j["start"] = cell_to_json(s.start);
  j["moves"] = s.moves;
  j["noop_actions"] = s.noop_actions;
  j["noop_reward"] = s.noop_reward;
  j["move_period"] = s.move_period;
  j["lives"] = s.lives;
  j["max_frames"] = s.max_frames;
  j["end_when_cleared"] = s.end_when_cleared;
  j["hud"] = s.hud;
  j["items"] = nlohmann::json::array();
  for (const auto& it : s.items) {
    j["items"].push_back({{"cell", cell_to_json(it.cell)},
                          {"value", it.value},
                          {"terminal", it.terminal}});
  }
  j["hazards"] = nlohmann::json::array();
  for (const auto& c : s.hazards) j["hazards"].push_back(cell_to_json(c));
  j["walls"] = nlohmann::json::array();
  for (const auto& c : s.walls) j["walls"].push_back(cell_to_json(c));
  return j;
}

ToyEnvSpec load_toy_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open env config: " + path);
  return toy_spec_from_json(nlohmann::json::parse(in));
}

ToyEnvSpec pixel_chain(int length, int noop_actions, int move_period) {
  ToyEnvSpec s;
  s.name = "pixel_chain";
  s.width = length;
  s.height = 1;
  s.moves = "lr";
  s.noop_actions = noop_actions;
  s.move_period = move_period;
  if (length > 1) s.items.push_back({{length - 1, 0}, 1.0, true});
  s.validate();
  return s;
}

ToyEnvSpec latched_chain(int length, int latch_frames) {
  ToyEnvSpec s = pixel_chain(length, 0, latch_frames);
  s.name = "latched_chain";
  return s;
}

ToyEnvSpec collector_grid(int width, int height, int items) {
  ToyEnvSpec s;
  s.name = "collector_grid";
  s.width = width;
  s.height = height;
  s.moves = "udlr";
  s.end_when_cleared = true;
  if (items < 0 || items > width * height - 1) {
    throw std::invalid_argument("collector_grid: too many items for the grid");
  }
  auto free_cell = [&](GridCell c) {
    return !(c == s.start) &&
           std::none_of(s.items.begin(), s.items.end(),
                        [&](const RewardItem& it) { return it.cell == c; });
  };
  // Fixed probe sequence, then scan order once the probe starts cycling.
  for (int k = 0; k < width * height && static_cast<int>(s.items.size()) < items;
       ++k) {
    const GridCell c{(3 + 7 * k) % width, (2 + 5 * k) % height};
    if (free_cell(c)) s.items.push_back({c, 1.0, false});
  }
  for (int i = 0; i < width * height && static_cast<int>(s.items.size()) < items;
       ++i) {
    const GridCell c{i % width, i / width};
    if (free_cell(c)) s.items.push_back({c, 1.0, false});
  }
  s.hud = items <= width;
  s.validate();
  return s;
}

ToyEnvSpec hazard_corridor(int length) {
  if (length < 4) throw std::invalid_argument("hazard_corridor needs length >= 4");
  ToyEnvSpec s;
  s.name = "hazard_corridor";
  s.width = length;
  s.height = 1;
  s.moves = "lr";
  s.lives = 3;
  s.items.push_back({{1, 0}, 0.5, false});
  s.items.push_back({{length - 1, 0}, 1.0, true});
  s.hazards.push_back({length - 2, 0});
  s.validate();
  return s;
}

ToyEnvSpec builtin_toy_spec(const std::string& text) {
  std::string name = text;
  std::vector<int> args;
  if (const auto open = text.find('('); open != std::string::npos) {
    const auto close = text.rfind(')');
    if (close == std::string::npos || close < open) {
      throw std::invalid_argument("malformed env spec: " + text);
    }
    name = text.substr(0, open);
    std::stringstream ss(text.substr(open + 1, close - open - 1));
    std::string part;
    while (std::getline(ss, part, ',')) {
      try {
        args.push_back(std::stoi(part));
      } catch (const std::exception&) {
        throw std::invalid_argument("non-integer env argument in: " + text);
      }
    }
  }
  auto arg = [&](std::size_t i, int fallback) {
    return i < args.size() ? args[i] : fallback;
  };
  if (name == "pixel_chain") return pixel_chain(arg(0, 5), arg(1, 0), arg(2, 1));
  if (name == "latched_chain") return latched_chain(arg(0, 5), arg(1, 2));
  if (name == "collector_grid") {
    return collector_grid(arg(0, 5), arg(1, 5), arg(2, 2));
  }
  if (name == "hazard_corridor") return hazard_corridor(arg(0, 6));
  throw std::invalid_argument("unknown toy env: " + name);
}

ToyEnv::ToyEnv(ToyEnvSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  do_reset();
}

void ToyEnv::do_reset() {
  state_ = State{};
  state_.agent = spec_.start;
  state_.collected.assign(spec_.items.size(), false);
  state_.lives = spec_.lives;
  render();
}

bool ToyEnv::blocked(GridCell c) const {
  return !inside(spec_, c) || contains(spec_.walls, c);
}

StepOutcome ToyEnv::step_frame(Action action) {
  StepOutcome out;
  const auto n_moves = static_cast<Action>(spec_.moves.size());
  if (action < n_moves) {
    if (state_.held == action) {
      ++state_.hold;
    } else {
      state_.held = action;
      state_.hold = 1;
    }
    if (state_.hold >= spec_.move_period) {
      state_.hold = 0;
      const GridCell next =
          step_toward(state_.agent, spec_.moves[static_cast<std::size_t>(action)]);
      if (!blocked(next)) {
        state_.agent = next;
        if (contains(spec_.hazards, next)) {
          out.death = true;
          if (--state_.lives == 0) state_.terminal = true;
        }
        for (std::size_t i = 0; i < spec_.items.size(); ++i) {
          if (!state_.collected[i] && spec_.items[i].cell == next) {
            state_.collected[i] = true;
            out.reward += spec_.items[i].value;
            if (spec_.items[i].terminal) state_.terminal = true;
          }
        }
        if (spec_.end_when_cleared &&
            std::all_of(state_.collected.begin(), state_.collected.end(),
                        [](bool b) { return b; })) {
          state_.terminal = true;
        }
      }
    }
  } else {
    state_.held = -1;
    state_.hold = 0;
    out.reward += spec_.noop_reward;
  }
  ++state_.frame;
  if (spec_.max_frames > 0 && state_.frame >= spec_.max_frames) {
    state_.terminal = true;
  }
  out.terminal = state_.terminal;
  render();
  return out;
}

void ToyEnv::render() {
  const int top = spec_.hud ? 1 : 0;
  Screen s(spec_.width, spec_.height + top, spec_.palette_size(),
           toy_color::kFloor);
  for (const auto& w : spec_.walls) s.set(w.x, w.y + top, toy_color::kMarker);
  for (const auto& h : spec_.hazards) s.set(h.x, h.y + top, toy_color::kHazard);
  for (std::size_t i = 0; i < spec_.items.size(); ++i) {
    const auto& c = spec_.items[i].cell;
    if (!state_.collected[i]) s.set(c.x, c.y + top, toy_color::kItem);
    if (spec_.hud && state_.collected[i]) {
      s.set(static_cast<int>(i), 0, toy_color::kMarker);
    }
  }
  s.set(state_.agent.x, state_.agent.y + top, toy_color::kAgent);
  screen_ = std::move(s);
}

StateHandle ToyEnv::save() const { return StateHandle(state_); }

void ToyEnv::restore(const StateHandle& handle) {
  state_ = handle.as<State>();
  render();
}

std::unique_ptr<Simulator> ToyEnv::clone() const {
  return std::make_unique<ToyEnv>(*this);
}

TilingConfig ToyEnv::tiling() const {
  return TilingConfig::covering(screen_.width(), screen_.height(), 1, 1);
}

std::optional<std::uint64_t> ToyEnv::fingerprint() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  fnv(h, static_cast<std::uint64_t>(state_.agent.x));
  fnv(h, static_cast<std::uint64_t>(state_.agent.y));
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < state_.collected.size(); ++i) {
    if (state_.collected[i]) bits |= std::uint64_t{1} << (i % 64);
    if (i % 64 == 63) {
      fnv(h, bits);
      bits = 0;
    }
  }
  fnv(h, bits);
  fnv(h, static_cast<std::uint64_t>(state_.lives));
  fnv(h, static_cast<std::uint64_t>(spec_.max_frames > 0 ? state_.frame : 0));
  if (spec_.move_period > 1) {
    fnv(h, static_cast<std::uint64_t>(state_.hold));
    fnv(h, static_cast<std::uint64_t>(state_.held + 1));
  }
  fnv(h, state_.terminal ? 1 : 0);
  return h;
}

}  // namespace iwpix
