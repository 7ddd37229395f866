#include "iwpix/episode.hpp"

#include <algorithm>
#include <chrono>
#include <future>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "iwpix/bprost.hpp"
#include "iwpix/caching_simulator.hpp"
#include "iwpix/iw.hpp"
#include "iwpix/rollout.hpp"

namespace iwpix {

namespace {

struct PlannerName {
  PlannerKind kind;
  const char* name;
};

constexpr PlannerName kPlannerNames[] = {
    {PlannerKind::kIw1, "iw1"},
    {PlannerKind::kIwk, "iwk"},
    {PlannerKind::kIwg, "iwg"},
    {PlannerKind::kIws, "iws"},
    {PlannerKind::kRollout, "rollout"},
    {PlannerKind::kRaRollout, "ra-rollout"},
    {PlannerKind::kRasRollout, "ras-rollout"},
};

}  // namespace

PlannerKind parse_planner(const std::string& name) {
  for (const auto& p : kPlannerNames) {
    if (name == p.name) return p.kind;
  }
  throw std::invalid_argument("unknown planner: " + name);
}

std::string to_string(PlannerKind kind) {
  for (const auto& p : kPlannerNames) {
    if (kind == p.kind) return p.name;
  }
  return "?";
}

bool is_rollout(PlannerKind kind) {
  return kind == PlannerKind::kRollout || kind == PlannerKind::kRaRollout ||
         kind == PlannerKind::kRasRollout;
}

RewardShaping EpisodeConfig::shaping() const {
  RewardShaping s;
  s.risk_averse =
      planner == PlannerKind::kRaRollout || planner == PlannerKind::kRasRollout;
  s.alpha = alpha;
  s.death_penalty = death_penalty.value_or(-10.0 * alpha);
  return s;
}

void EpisodeConfig::validate() const {
  if (frameskip < 1) throw std::invalid_argument("frameskip must be >= 1");
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("gamma must lie in (0, 1)");
  }
  if (budget.kind == Budget::Kind::kCalls && budget.calls == 0) {
    throw std::invalid_argument("call budget must be positive");
  }
  if (budget.kind == Budget::Kind::kSeconds && !(budget.seconds > 0.0)) {
    throw std::invalid_argument("time budget must be positive");
  }
  if (width < 1) throw std::invalid_argument("width must be >= 1");
  if (calibration_actions < 0) {
    throw std::invalid_argument("calibration_actions must be >= 0");
  }
  if (planner == PlannerKind::kIwg && goals.empty()) {
    throw std::invalid_argument("iwg needs at least one goal feature");
  }
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::kGameOver: return "game_over";
    case Termination::kFrameCap: return "frame_cap";
    case Termination::kError: return "error";
  }
  return "?";
}

std::uint64_t EpisodeResult::simulator_calls() const {
  std::uint64_t n = 0;
  for (const auto& d : decisions) n += d.simulator_calls;
  return n;
}

namespace {

double node_value(const Node& n, double gamma) {
  double best = 0.0;
  bool any = false;
  for (const auto& c : n.children) {
    if (!c || !c->filled) continue;
    const double v = node_value(*c, gamma);
    if (!any || v > best) best = v;
    any = true;
  }
  return n.reward + (any ? gamma * best : 0.0);
}

}  // namespace

std::vector<std::optional<double>> backup_values(const Node& root, double gamma) {
  std::vector<std::optional<double>> values(root.children.size());
  for (std::size_t a = 0; a < root.children.size(); ++a) {
    const auto& c = root.children[a];
    if (c && c->filled) values[a] = node_value(*c, gamma);
  }
  return values;
}

std::optional<Action> select_action(const std::vector<std::optional<double>>& values,
                                    std::mt19937_64& rng) {
  std::vector<Action> best;
  double best_value = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < values.size(); ++a) {
    if (!values[a]) continue;
    if (*values[a] > best_value) {
      best_value = *values[a];
      best.clear();
    }
    if (*values[a] == best_value) best.push_back(static_cast<Action>(a));
  }
  if (best.empty()) return std::nullopt;
  std::uniform_int_distribution<std::size_t> pick(0, best.size() - 1);
  return best[pick(rng)];
}

namespace {

nlohmann::json decision_json(std::size_t index, const DecisionRecord& d) {
  return {{"type", "decision"},      {"index", index},
          {"action", d.selected},    {"fallback", d.fallback},
          {"raw_reward", d.raw_reward}, {"frames", d.frames},
          {"nodes", d.lookahead_nodes}, {"rollouts", d.rollouts},
          {"calls", d.simulator_calls}, {"elapsed", d.elapsed},
          {"depth", d.tree_depth_max}};
}

// One decision's plan. Returns the tree root, which the caller may retain.
std::unique_ptr<Node> plan(SearchSpace& space, std::unique_ptr<Node> root,
                           const EpisodeConfig& cfg, const FeatureSet& goals,
                           std::mt19937_64& rng, DecisionRecord& record) {
  switch (cfg.planner) {
    case PlannerKind::kIw1:
    case PlannerKind::kIwk: {
      const int k = cfg.planner == PlannerKind::kIw1 ? 1 : cfg.width;
      return iw_search(space, std::move(root), k).root;
    }
    case PlannerKind::kIwg:
      return iwg_search(space, std::move(root), goals).root;
    case PlannerKind::kIws:
      return iws_search(space, std::move(root)).root;
    case PlannerKind::kRollout:
    case PlannerKind::kRaRollout:
    case PlannerKind::kRasRollout: {
      RolloutOptions options;
      options.width = cfg.width;
      options.subscoring = cfg.planner == PlannerKind::kRasRollout;
      auto result = generate_lookahead_tree(space, std::move(root), options, rng);
      record.rollouts = result.stats.rollouts;
      return std::move(result.root);
    }
  }
  throw std::logic_error("unhandled planner");
}

}  // namespace

EpisodeResult run_episode(Simulator& env, const EpisodeConfig& cfg,
                          std::ostream* log) {
  cfg.validate();
  EpisodeResult result;
  auto finish = [&]() {
    if (log != nullptr) {
      nlohmann::json summary = {{"type", "summary"},
                                {"schema", "iwpix.episode/1"},
                                {"planner", to_string(cfg.planner)},
                                {"budget", cfg.budget.to_string()},
                                {"seed", cfg.seed},
                                {"score", result.total_raw_score},
                                {"frames", result.frames},
                                {"decisions", result.decisions.size()},
                                {"calls", result.simulator_calls()},
                                {"terminated_by", to_string(result.terminated_by)}};
      if (!result.error.empty()) summary["error"] = result.error;
      *log << summary.dump() << '\n';
    }
    return result;
  };
  if (cfg.max_frames == 0) {
    result.terminated_by = Termination::kFrameCap;
    return finish();
  }

  try {
    std::mt19937_64 rng(cfg.seed);
    BackgroundMap background =
        calibrate_background(env, cfg.calibration_actions, rng(), cfg.frameskip);
    const TilingConfig tiling = cfg.tiling.value_or(env.tiling());
    const FeatureLayout layout(tiling, env.screen().palette_size());
    const BprostFeaturizer featurizer(layout, background, cfg.families);
    const FeatureSet goals(featurizer.capacity(), cfg.goals);

    FillPolicy policy;
    policy.frameskip = cfg.frameskip;
    policy.extend_on_no_change = cfg.extend_on_no_change;
    policy.same_observation = [&featurizer](const Screen& a, const Screen& b) {
      return featurizer.observe(a) == featurizer.observe(b);
    };
    CachingSimulator csim(env, policy);
    const RewardShaping shaping = cfg.shaping();

    std::optional<FeatureSet> prev_observation;
    std::unique_ptr<Node> retained;
    while (!env.terminal()) {
      if (result.frames >= cfg.max_frames) break;
      DecisionRecord record;
      const auto started = std::chrono::steady_clock::now();
      const std::uint64_t calls_before = env.calls();
      std::unique_ptr<Node> root;
      {
        BudgetTracker tracker(cfg.budget, env);
        SearchSpace space(csim, featurizer, shaping, tracker);
        const FeatureSet* prev = prev_observation ? &*prev_observation : nullptr;
        if (retained) {
          root = std::move(retained);
          space.fill_root(*root, prev);
        } else {
          root = space.make_root(prev);
        }
        root = plan(space, std::move(root), cfg, goals, rng, record);
      }
      record.simulator_calls = env.calls() - calls_before;
      if (log != nullptr && cfg.log_trees) {
        std::ostringstream tree;
        dump_tree(tree, *root);
        *log << nlohmann::json{{"type", "tree"},
                               {"index", result.decisions.size()},
                               {"dump", tree.str()}}
                    .dump()
             << '\n';
      }
      const TreeSummary summary = summarize(*root);
      record.lookahead_nodes = summary.filled_nodes;
      record.tree_depth_max = summary.max_depth;

      const auto values = backup_values(*root, cfg.gamma);
      std::optional<Action> chosen = select_action(values, rng);
      if (!chosen) {
        std::uniform_int_distribution<Action> pick(0, env.action_count() - 1);
        chosen = pick(rng);
        record.fallback = true;
      }
      record.selected = *chosen;

      // The executed step is a plain frameskip application, which matches
      // the cached edge only when that edge was not extended.
      const Action a = *chosen;
      const std::vector<Action> edge{a};
      const bool reusable = cfg.caching && csim.contains(edge) &&
                            csim.cached_apply(edge)->record->applications == 1;
      csim.restore_root();
      prev_observation = featurizer.observe(env.screen());
      const StepOutcome outcome = env.apply(a, cfg.frameskip);
      background.update(env.screen());
      if (reusable) {
        csim.advance_root(a);
        retained = reuse_subtree(std::move(root), a);
      } else {
        csim.reset_root();
      }

      record.raw_reward = outcome.reward;
      record.frames = outcome.frames;
      record.elapsed = std::chrono::duration<double>(
                           std::chrono::steady_clock::now() - started)
                           .count();
      result.total_raw_score += outcome.reward;
      result.frames += static_cast<std::uint64_t>(outcome.frames);
      if (log != nullptr) {
        *log << decision_json(result.decisions.size(), record).dump() << '\n';
      }
      result.decisions.push_back(record);
    }
    result.terminated_by =
        env.terminal() ? Termination::kGameOver : Termination::kFrameCap;
  } catch (const std::exception& e) {
    result.terminated_by = Termination::kError;
    result.error = e.what();
  }
  return finish();
}

std::uint64_t run_seed(std::uint64_t base, std::uint64_t i) {
  // splitmix64 finalizer
  std::uint64_t z = base + (i + 1) * 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

BatchResult run_batch(const std::function<std::unique_ptr<Simulator>()>& make_env,
                      const EpisodeConfig& cfg, int n_runs, int jobs,
                      std::vector<std::string>* logs) {
  if (n_runs < 1) throw std::invalid_argument("n_runs must be >= 1");
  cfg.validate();
  BatchResult batch;
  batch.runs.resize(static_cast<std::size_t>(n_runs));
  for (int i = 0; i < n_runs; ++i) {
    batch.seeds.push_back(run_seed(cfg.seed, static_cast<std::uint64_t>(i)));
  }
  if (logs != nullptr) logs->assign(batch.runs.size(), std::string());
  auto one = [&](std::size_t i) {
    EpisodeConfig run_cfg = cfg;
    run_cfg.seed = batch.seeds[i];
    auto env = make_env();
    env->reset();
    if (logs == nullptr) {
      batch.runs[i] = run_episode(*env, run_cfg);
      return;
    }
    std::ostringstream log;
    batch.runs[i] = run_episode(*env, run_cfg, &log);
    (*logs)[i] = log.str();
  };
  const std::size_t width = static_cast<std::size_t>(std::max(1, jobs));
  for (std::size_t start = 0; start < batch.runs.size(); start += width) {
    std::vector<std::future<void>> pending;
    const std::size_t stop = std::min(batch.runs.size(), start + width);
    for (std::size_t i = start; i < stop; ++i) {
      pending.push_back(std::async(width == 1 ? std::launch::deferred : std::launch::async,
                                   one, i));
    }
    for (auto& f : pending) f.get();
  }
  double sum = 0.0;
  for (const auto& r : batch.runs) sum += r.total_raw_score;
  batch.mean_score = sum / static_cast<double>(n_runs);
  return batch;
}

}  // namespace iwpix
