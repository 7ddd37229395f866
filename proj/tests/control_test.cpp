#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "iwpix/bprost.hpp"
#include "iwpix/episode.hpp"
#include "iwpix/toy_env.hpp"

namespace iwpix {
namespace {

TEST(ShapeReward, IdentityUnlessRiskAverse) {
  RewardShaping plain;
  EXPECT_DOUBLE_EQ(shape_reward(-2.0, true, plain), -2.0);
  EXPECT_DOUBLE_EQ(shape_reward(3.0, false, plain), 3.0);
}

TEST(ShapeReward, RiskAverseScalesLossesAndPunishesDeath) {
  RewardShaping ra{true, 10.0, -100.0};
  EXPECT_DOUBLE_EQ(shape_reward(-2.0, false, ra), -20.0);
  EXPECT_DOUBLE_EQ(shape_reward(3.0, false, ra), 3.0);
  EXPECT_DOUBLE_EQ(shape_reward(0.0, true, ra), -100.0);
  EXPECT_DOUBLE_EQ(shape_reward(-1.0, true, ra), -110.0);
}

TEST(EpisodeConfig, ShapingFollowsPlanner) {
  EpisodeConfig cfg;
  cfg.alpha = 7.0;
  EXPECT_FALSE(cfg.shaping().risk_averse);
  cfg.planner = PlannerKind::kRaRollout;
  EXPECT_TRUE(cfg.shaping().risk_averse);
  EXPECT_DOUBLE_EQ(cfg.shaping().death_penalty, -70.0);
  cfg.death_penalty = -3.0;
  EXPECT_DOUBLE_EQ(cfg.shaping().death_penalty, -3.0);
  cfg.planner = PlannerKind::kRasRollout;
  EXPECT_TRUE(cfg.shaping().risk_averse);
}

TEST(EpisodeConfig, Validation) {
  auto bad = [](auto mutate) {
    EpisodeConfig cfg;
    EXPECT_THROW(
        {
          mutate(cfg);
          cfg.validate();
        },
        std::invalid_argument);
  };
  bad([](EpisodeConfig& c) { c.frameskip = 0; });
  bad([](EpisodeConfig& c) { c.gamma = 1.0; });
  bad([](EpisodeConfig& c) { c.budget = Budget::simulator_calls(0); });
  bad([](EpisodeConfig& c) { c.budget = Budget::wall_clock(0.0); });
  bad([](EpisodeConfig& c) { c.width = 0; });
  bad([](EpisodeConfig& c) { c.calibration_actions = -1; });
  bad([](EpisodeConfig& c) { c.planner = PlannerKind::kIwg; });
  EXPECT_NO_THROW(EpisodeConfig{}.validate());
}

TEST(Planner, NamesRoundTrip) {
  for (const char* name :
       {"iw1", "iwk", "iwg", "iws", "rollout", "ra-rollout", "ras-rollout"}) {
    EXPECT_EQ(to_string(parse_planner(name)), name);
  }
  EXPECT_THROW(parse_planner("bfs"), std::invalid_argument);
  EXPECT_TRUE(is_rollout(PlannerKind::kRasRollout));
  EXPECT_FALSE(is_rollout(PlannerKind::kIws));
}

// root -a0-> n1 -> n2 -> n3(reward 1), and root -a1-> leaf(reward 0.5).
std::unique_ptr<Node> sample_tree() {
  auto root = std::make_unique<Node>();
  root->filled = true;
  auto add = [](Node& parent, Action a, double reward) -> Node& {
    if (parent.children.size() <= static_cast<std::size_t>(a)) {
      parent.children.resize(static_cast<std::size_t>(a) + 1);
    }
    auto c = std::make_unique<Node>();
    c->parent = &parent;
    c->action = a;
    c->depth = parent.depth + 1;
    c->filled = true;
    c->reward = reward;
    Node& ref = *c;
    parent.children[static_cast<std::size_t>(a)] = std::move(c);
    return ref;
  };
  Node& n1 = add(*root, 0, 0.0);
  Node& n2 = add(n1, 0, 0.0);
  add(n2, 0, 1.0);
  add(*root, 1, 0.5);
  root->children.resize(3);
  root->children[2] = std::make_unique<Node>();  // generated slot, never filled
  return root;
}

TEST(Backup, DiscountsAlongTheBestBranch) {
  const auto root = sample_tree();
  const auto v = backup_values(*root, 0.99);
  ASSERT_EQ(v.size(), 3u);
  EXPECT_DOUBLE_EQ(*v[0], 0.9801);
  EXPECT_DOUBLE_EQ(*v[1], 0.5);
  EXPECT_FALSE(v[2].has_value());
}

TEST(Backup, PrunedNodesAreLeaves) {
  auto root = sample_tree();
  root->children[1]->pruned = true;
  EXPECT_DOUBLE_EQ(*backup_values(*root, 0.5)[1], 0.5);
  EXPECT_DOUBLE_EQ(*backup_values(*root, 0.5)[0], 0.25);
}

TEST(SelectAction, ArgmaxAndEmpty) {
  std::mt19937_64 rng(1);
  EXPECT_EQ(select_action({0.1, 0.7, std::nullopt, 0.3}, rng), 1);
  EXPECT_EQ(select_action({std::nullopt, std::nullopt}, rng), std::nullopt);
  EXPECT_EQ(select_action({}, rng), std::nullopt);
  EXPECT_EQ(select_action({std::nullopt, -4.0}, rng), 1);
}

TEST(SelectAction, TiesAreUniform) {
  std::mt19937_64 rng(2);
  const std::vector<std::optional<double>> values{1.0, 0.0, 1.0, 1.0};
  std::array<int, 4> count{};
  const int n = 10'000;
  for (int i = 0; i < n; ++i) ++count[static_cast<std::size_t>(*select_action(values, rng))];
  EXPECT_EQ(count[1], 0);
  const double p = 1.0 / 3.0;
  const double sigma = std::sqrt(n * p * (1 - p));
  for (int a : {0, 2, 3}) {
    EXPECT_LE(std::abs(count[static_cast<std::size_t>(a)] - n * p), 3 * sigma) << a;
  }
}

TEST(SelectAction, InvariantUnderPositiveAffineMaps) {
  std::mt19937_64 values_rng(3);
  std::uniform_int_distribution<int> level(0, 3);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::optional<double>> v, w;
    for (int a = 0; a < 5; ++a) {
      const double x = level(values_rng);
      v.push_back(x);
      w.push_back(2.0 * x + 5.0);
    }
    std::mt19937_64 r1(trial), r2(trial);
    EXPECT_EQ(select_action(v, r1), select_action(w, r2));
  }
}

EpisodeConfig chain_config(PlannerKind planner) {
  EpisodeConfig cfg;
  cfg.frameskip = 1;
  cfg.budget = Budget::simulator_calls(200);
  cfg.planner = planner;
  cfg.max_frames = 200;
  cfg.seed = 4;
  return cfg;
}

TEST(RunEpisode, EveryPlannerSolvesTheChain) {
  for (PlannerKind p : {PlannerKind::kIw1, PlannerKind::kIwk, PlannerKind::kIws,
                        PlannerKind::kRollout, PlannerKind::kRaRollout,
                        PlannerKind::kRasRollout}) {
    ToyEnv env(pixel_chain(5));
    EpisodeConfig cfg = chain_config(p);
    cfg.width = 2;
    const EpisodeResult r = run_episode(env, cfg);
    EXPECT_EQ(r.terminated_by, Termination::kGameOver) << to_string(p);
    EXPECT_DOUBLE_EQ(r.total_raw_score, 1.0) << to_string(p);
    EXPECT_LE(r.decisions.size(), 10u) << to_string(p);
  }
}

TEST(RunEpisode, IwgWithAGoal) {
  ToyEnv env(pixel_chain(5));
  EpisodeConfig cfg = chain_config(PlannerKind::kIwg);
  cfg.families = FeatureFamilies::basic_only();
  const FeatureLayout layout(env.tiling(), env.screen().palette_size());
  cfg.goals = {layout.basic(0, 4, toy_color::kAgent)};
  const EpisodeResult r = run_episode(env, cfg);
  EXPECT_DOUBLE_EQ(r.total_raw_score, 1.0);
}

TEST(RunEpisode, BudgetIsNeverExceeded) {
  for (std::uint64_t budget : {1u, 5u, 50u}) {
    ToyEnv env(collector_grid(5, 4, 3));
    EpisodeConfig cfg = chain_config(PlannerKind::kRollout);
    cfg.budget = Budget::simulator_calls(budget);
    cfg.max_frames = 40;
    const EpisodeResult r = run_episode(env, cfg);
    ASSERT_NE(r.terminated_by, Termination::kError) << r.error;
    for (const auto& d : r.decisions) EXPECT_LE(d.simulator_calls, budget);
  }
}

TEST(RunEpisode, RiskAversionAvoidsTheHazard) {
  EpisodeConfig cfg = chain_config(PlannerKind::kRollout);
  cfg.max_frames = 30;
  cfg.budget = Budget::simulator_calls(500);
  ToyEnv plain_env(hazard_corridor(6));
  const EpisodeResult plain = run_episode(plain_env, cfg);
  EXPECT_DOUBLE_EQ(plain.total_raw_score, 1.5);
  EXPECT_EQ(plain_env.lives(), 2);

  cfg.planner = PlannerKind::kRaRollout;
  ToyEnv ra_env(hazard_corridor(6));
  const EpisodeResult ra = run_episode(ra_env, cfg);
  EXPECT_DOUBLE_EQ(ra.total_raw_score, 0.5);
  EXPECT_EQ(ra_env.lives(), 3);
  EXPECT_EQ(ra.terminated_by, Termination::kFrameCap);
}

TEST(RunEpisode, ZeroFrameCapReturnsImmediately) {
  ToyEnv env(pixel_chain(5));
  EpisodeConfig cfg = chain_config(PlannerKind::kRollout);
  cfg.max_frames = 0;
  const EpisodeResult r = run_episode(env, cfg);
  EXPECT_EQ(r.terminated_by, Termination::kFrameCap);
  EXPECT_TRUE(r.decisions.empty());
  EXPECT_EQ(env.calls(), 0u);
}

TEST(RunEpisode, FailuresEndWithError) {
  ToyEnv env(pixel_chain(5));
  EpisodeConfig cfg = chain_config(PlannerKind::kIwg);
  cfg.goals = {1u << 30};
  const EpisodeResult r = run_episode(env, cfg);
  EXPECT_EQ(r.terminated_by, Termination::kError);
  EXPECT_FALSE(r.error.empty());
}

TEST(RunEpisode, LogIsOneJsonObjectPerLine) {
  ToyEnv env(pixel_chain(4));
  std::ostringstream log;
  const EpisodeResult r = run_episode(env, chain_config(PlannerKind::kRollout), &log);
  std::istringstream in(log.str());
  std::string line;
  std::vector<nlohmann::json> lines;
  while (std::getline(in, line)) lines.push_back(nlohmann::json::parse(line));
  ASSERT_EQ(lines.size(), r.decisions.size() + 1);
  for (std::size_t i = 0; i + 1 < lines.size(); ++i) {
    EXPECT_EQ(lines[i]["type"], "decision");
    EXPECT_EQ(lines[i]["index"], i);
  }
  const auto& summary = lines.back();
  EXPECT_EQ(summary["schema"], "iwpix.episode/1");
  EXPECT_EQ(summary["score"], r.total_raw_score);
  EXPECT_EQ(summary["terminated_by"], "game_over");
}

TEST(RunEpisode, RetainingTheTreeSavesCalls) {
  EpisodeConfig cfg = chain_config(PlannerKind::kRollout);
  cfg.budget = Budget::simulator_calls(10'000);
  ToyEnv cached(pixel_chain(8));
  const EpisodeResult with = run_episode(cached, cfg);
  cfg.caching = false;
  ToyEnv uncached(pixel_chain(8));
  const EpisodeResult without = run_episode(uncached, cfg);
  EXPECT_DOUBLE_EQ(with.total_raw_score, 1.0);
  EXPECT_DOUBLE_EQ(without.total_raw_score, 1.0);
  EXPECT_LT(with.simulator_calls(), without.simulator_calls());
}

TEST(RunSeed, DistinctAndStable) {
  EXPECT_EQ(run_seed(0, 0), run_seed(0, 0));
  EXPECT_NE(run_seed(0, 0), run_seed(0, 1));
  EXPECT_NE(run_seed(0, 0), run_seed(1, 0));
}

TEST(RunBatch, DeterministicAcrossJobCounts) {
  auto make = [] { return std::make_unique<ToyEnv>(collector_grid(5, 4, 3)); };
  EpisodeConfig cfg = chain_config(PlannerKind::kRollout);
  cfg.budget = Budget::simulator_calls(100);
  cfg.max_frames = 60;
  const BatchResult a = run_batch(make, cfg, 4, 1);
  const BatchResult b = run_batch(make, cfg, 4, 3);
  ASSERT_EQ(a.runs.size(), 4u);
  EXPECT_EQ(a.seeds, b.seeds);
  double sum = 0.0;
  for (std::size_t i = 0; i < a.runs.size(); ++i) {
    EXPECT_EQ(a.runs[i].total_raw_score, b.runs[i].total_raw_score);
    EXPECT_EQ(a.runs[i].simulator_calls(), b.runs[i].simulator_calls());
    sum += a.runs[i].total_raw_score;
  }
  EXPECT_DOUBLE_EQ(a.mean_score, sum / 4.0);
}

TEST(RunBatch, SingleRunAndBadCount) {
  auto make = [] { return std::make_unique<ToyEnv>(pixel_chain(4)); };
  const EpisodeConfig cfg = chain_config(PlannerKind::kRollout);
  const BatchResult one = run_batch(make, cfg, 1);
  ASSERT_EQ(one.runs.size(), 1u);
  EXPECT_EQ(one.seeds[0], run_seed(cfg.seed, 0));
  EXPECT_DOUBLE_EQ(one.mean_score, one.runs[0].total_raw_score);
  EXPECT_THROW(run_batch(make, cfg, 0), std::invalid_argument);
}

}  // namespace
}  // namespace iwpix
