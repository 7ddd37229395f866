#include <gtest/gtest.h>

#include <random>

#include "iwpix/caching_simulator.hpp"
#include "iwpix/toy_env.hpp"

namespace iwpix {
namespace {

const std::string kFixtures = IWPIX_FIXTURE_DIR;

constexpr Action kLeft = 0;
constexpr Action kRight = 1;

TEST(ToyEnv, ChainStepMovesAgentOneCell) {
  ToyEnv env(pixel_chain(5));
  EXPECT_EQ(env.screen().at(0, 0), toy_color::kAgent);
  const auto out = env.apply(kRight, 1);
  EXPECT_EQ(out, (StepOutcome{0.0, false, false, 1}));
  EXPECT_EQ(env.agent().x, 1);
  EXPECT_EQ(env.screen().at(1, 0), toy_color::kAgent);
  EXPECT_EQ(env.screen().at(0, 0), toy_color::kFloor);
  EXPECT_EQ(env.calls(), 1u);
}

TEST(ToyEnv, ChainEndIsRewardedAndTerminal) {
  ToyEnv env(pixel_chain(5));
  StepOutcome total;
  for (int i = 0; i < 4; ++i) total += env.apply(kRight, 1);
  EXPECT_EQ(total.reward, 1.0);
  EXPECT_TRUE(total.terminal);
  EXPECT_THROW(env.apply(kRight, 1), UsageError);
}

TEST(ToyEnv, ApplyStopsAtTerminalFrame) {
  ToyEnv env(pixel_chain(3));
  const auto out = env.apply(kRight, 10);
  EXPECT_TRUE(out.terminal);
  EXPECT_EQ(out.frames, 2);
  EXPECT_EQ(env.calls(), 1u);
}

TEST(ToyEnv, HazardCostsALife) {
  ToyEnv env(hazard_corridor(6));
  StepOutcome total;
  for (int i = 0; i < 4; ++i) total += env.apply(kRight, 1);
  EXPECT_TRUE(total.death);
  EXPECT_FALSE(total.terminal);
  EXPECT_EQ(total.reward, 0.5);
  EXPECT_EQ(env.lives(), 2);
}

TEST(ToyEnv, LastLifeEndsTheGame) {
  ToyEnvSpec spec = hazard_corridor(6);
  spec.lives = 1;
  ToyEnv env(spec);
  env.apply(kRight, 4);
  EXPECT_TRUE(env.terminal());
}

TEST(ToyEnv, InvalidUse) {
  ToyEnv env(pixel_chain(4));
  EXPECT_THROW(env.apply(2, 1), std::out_of_range);
  EXPECT_THROW(env.apply(kRight, 0), std::invalid_argument);
  EXPECT_EQ(env.calls(), 0u);
}

TEST(ToyEnv, MovePeriodDelaysMotion) {
  ToyEnv env(latched_chain(5, 3));
  env.apply(kRight, 2);
  EXPECT_EQ(env.agent().x, 0);
  env.apply(kRight, 1);
  EXPECT_EQ(env.agent().x, 1);
  env.apply(kLeft, 2);  // switching direction restarts the count
  EXPECT_EQ(env.agent().x, 1);
}

TEST(ToyEnv, CollectorHudLightsPerItem) {
  const auto spec = collector_grid(6, 5, 3);
  ToyEnv env(spec);
  EXPECT_EQ(env.screen().height(), 6);
  const GridCell target = spec.items[0].cell;
  const Action down = 1, right = 3;
  StepOutcome total;
  for (int x = 0; x < target.x; ++x) total += env.apply(right, 1);
  for (int y = 0; y < target.y; ++y) total += env.apply(down, 1);
  EXPECT_GE(total.reward, 1.0);
  EXPECT_EQ(env.screen().at(0, 0), toy_color::kMarker);
}

TEST(ToyEnv, SaveRestoreRoundTrip) {
  ToyEnv env(collector_grid(5, 5, 2));
  std::mt19937_64 rng(3);
  for (int i = 0; i < 5; ++i) env.apply(static_cast<Action>(rng() % 4), 1);
  const StateHandle h = env.save();
  std::vector<Action> script;
  for (int i = 0; i < 20; ++i) script.push_back(static_cast<Action>(rng() % 4));

  auto play = [&](Simulator& sim) {
    std::vector<std::pair<StepOutcome, Screen>> out;
    for (Action a : script) {
      if (sim.terminal()) break;
      const auto o = sim.apply(a, 1);
      out.emplace_back(o, sim.screen());
    }
    return out;
  };
  auto clone = env.clone();
  const auto direct = play(*clone);
  for (int i = 0; i < 7; ++i) env.apply(static_cast<Action>(rng() % 4), 1);
  env.restore(h);
  EXPECT_EQ(play(env), direct);
}

TEST(ToyEnv, ForeignHandleIsRejected) {
  ToyEnv env(pixel_chain(4));
  EXPECT_THROW(env.restore(StateHandle(std::any(42))), UsageError);
}

TEST(ToySpec, JsonRoundTrip) {
  for (const auto& spec : {pixel_chain(6, 2, 3), collector_grid(7, 4, 3),
                           hazard_corridor(8)}) {
    const auto j = toy_spec_to_json(spec);
    EXPECT_EQ(toy_spec_to_json(toy_spec_from_json(j)), j);
  }
}

TEST(ToySpec, LoadsFixture) {
  const auto spec = load_toy_spec(kFixtures + "/walled_room.json");
  EXPECT_EQ(spec.name, "walled_room");
  EXPECT_EQ(spec.action_count(), 5);
  EXPECT_EQ(spec.palette_size(), 5);
  ToyEnv env(spec);
  env.apply(0, 1);
  env.apply(0, 1);
  EXPECT_EQ(env.agent().y, 1);
}

TEST(ToySpec, RejectsInconsistentSpecs) {
  ToyEnvSpec s = pixel_chain(4);
  s.moves = "lx";
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s = pixel_chain(4);
  s.start = {9, 0};
  EXPECT_THROW(s.validate(), std::invalid_argument);
  EXPECT_THROW(toy_spec_from_json(nlohmann::json::parse(R"({"height": 2})")),
               nlohmann::json::exception);
  EXPECT_THROW(load_toy_spec(kFixtures + "/missing.json"), std::invalid_argument);
}

TEST(ToySpec, BuiltinNames) {
  EXPECT_EQ(builtin_toy_spec("pixel_chain(7)").width, 7);
  EXPECT_EQ(builtin_toy_spec("collector_grid(4,3,2)").items.size(), 2u);
  EXPECT_EQ(builtin_toy_spec("hazard_corridor").width, 6);
  EXPECT_THROW(builtin_toy_spec("pacman"), std::invalid_argument);
  EXPECT_THROW(builtin_toy_spec("pixel_chain(x)"), std::invalid_argument);
}

FillPolicy plain(int frameskip) {
  FillPolicy p;
  p.frameskip = frameskip;
  return p;
}

TEST(CachingSimulator, ExactHitCostsNothing) {
  ToyEnv env(pixel_chain(6));
  CachingSimulator cs(env, plain(1));
  const std::vector<Action> path{kRight, kRight};
  EXPECT_EQ(cs.cached_apply(path)->inner_calls, 2u);
  const auto again = cs.cached_apply(path);
  EXPECT_TRUE(again->replayed);
  EXPECT_EQ(again->inner_calls, 0u);
  EXPECT_EQ(env.calls(), 2u);
}

TEST(CachingSimulator, PrefixIsReused) {
  ToyEnv env(pixel_chain(6));
  CachingSimulator cs(env, plain(1));
  cs.cached_apply(std::vector<Action>{kRight});
  const auto step = cs.cached_apply(std::vector<Action>{kRight, kLeft});
  EXPECT_FALSE(step->replayed);
  EXPECT_EQ(step->inner_calls, 1u);
}

TEST(CachingSimulator, ColdPathCostsItsLength) {
  ToyEnv env(pixel_chain(6));
  CachingSimulator cs(env, plain(1));
  EXPECT_EQ(cs.cached_apply(std::vector<Action>{kRight, kRight, kLeft})->inner_calls,
            3u);
  EXPECT_EQ(cs.record_count(), 3u);
  EXPECT_EQ(cs.misses(), 1u);
}

TEST(CachingSimulator, AdvanceRootKeepsOnlyTheExecutedSubtree) {
  ToyEnv env(collector_grid(5, 5, 1));
  CachingSimulator cs(env, plain(1));
  const auto r1 = cs.cached_apply(std::vector<Action>{3, 1})->record->screen;
  cs.cached_apply(std::vector<Action>{1});
  cs.cached_apply(std::vector<Action>{3});
  EXPECT_EQ(cs.record_count(), 3u);
  cs.restore_root();
  env.apply(3, 1);
  cs.advance_root(3);
  EXPECT_EQ(cs.record_count(), 1u);
  EXPECT_TRUE(cs.contains(std::vector<Action>{1}));
  EXPECT_FALSE(cs.contains(std::vector<Action>{3, 1}));
  EXPECT_EQ(cs.hits(), 0u);
  const auto hit = cs.cached_apply(std::vector<Action>{1});
  EXPECT_TRUE(hit->replayed);
  EXPECT_EQ(hit->record->screen, r1);
  EXPECT_EQ(cs.root().screen, env.screen());
}

TEST(CachingSimulator, AdvanceOnEmptyCache) {
  ToyEnv env(pixel_chain(6));
  CachingSimulator cs(env, plain(1));
  env.apply(kRight, 1);
  cs.advance_root(kRight);
  EXPECT_EQ(cs.record_count(), 0u);
  EXPECT_EQ(cs.root().screen, env.screen());
}

TEST(CachingSimulator, ChainAdvanceIsAllHits) {
  ToyEnv env(pixel_chain(8));
  CachingSimulator cs(env, plain(1));
  const std::vector<Action> chain(6, kRight);
  cs.cached_apply(chain);
  const auto calls = env.calls();
  for (int i = 1; i <= 5; ++i) {
    cs.restore_root();
    // The executed step replays through the cache as well.
    cs.cached_apply(std::vector<Action>{kRight});
    env.restore(cs.cached_apply(std::vector<Action>{kRight})->record->handle);
    cs.advance_root(kRight);
    const std::vector<Action> rest(static_cast<std::size_t>(6 - i), kRight);
    const auto step = cs.cached_apply(rest);
    EXPECT_TRUE(step->replayed);
  }
  EXPECT_EQ(env.calls(), calls);
}

TEST(CachingSimulator, TransparentToQueryOrder) {
  const auto spec = collector_grid(5, 4, 2);
  std::mt19937_64 rng(8);
  std::vector<std::vector<Action>> queries;
  for (int i = 0; i < 60; ++i) {
    std::vector<Action> q;
    for (int j = 0; j < 1 + static_cast<int>(rng() % 5); ++j) {
      q.push_back(static_cast<Action>(rng() % 4));
    }
    queries.push_back(q);
  }
  ToyEnv a_env(spec), b_env(spec);
  CachingSimulator a(a_env, plain(2)), b(b_env, plain(2));
  // b is warmed with the queries in reverse first.
  for (auto it = queries.rbegin(); it != queries.rend(); ++it) b.cached_apply(*it);
  for (const auto& q : queries) {
    const auto ra = a.cached_apply(q);
    const auto rb = b.cached_apply(q);
    ASSERT_TRUE(ra && rb);
    EXPECT_EQ(ra->record->outcome, rb->record->outcome);
    EXPECT_EQ(ra->record->screen, rb->record->screen);
    EXPECT_LE(ra->inner_calls, q.size());
  }
}

TEST(CachingSimulator, GateRefusalLeavesPathUncached) {
  ToyEnv env(pixel_chain(6));
  CachingSimulator cs(env, plain(1));
  int allowed = 1;
  cs.set_call_gate([&] { return allowed-- > 0; });
  EXPECT_FALSE(cs.cached_apply(std::vector<Action>{kRight, kRight}).has_value());
  EXPECT_EQ(env.calls(), 1u);
  EXPECT_TRUE(cs.contains(std::vector<Action>{kRight}));
  EXPECT_FALSE(cs.contains(std::vector<Action>{kRight, kRight}));
}

FillPolicy extending(int frameskip) {
  FillPolicy p;
  p.frameskip = frameskip;
  p.extend_on_no_change = true;
  return p;
}

TEST(FillWithExtension, ChangingStepIsApplied1Time) {
  ToyEnv env(pixel_chain(6));
  const Screen parent = env.screen();
  const auto r = fill_with_extension(env, parent, kRight, extending(1));
  EXPECT_EQ(r.applications, 1);
  EXPECT_EQ(r.outcome.frames, 1);
}

TEST(FillWithExtension, LatchedStepIsExtended) {
  const int frameskip = 4;
  ToyEnv env(latched_chain(6, 2 * frameskip));
  const Screen parent = env.screen();
  const auto r = fill_with_extension(env, parent, kRight, extending(frameskip));
  EXPECT_EQ(r.applications, 2);
  EXPECT_EQ(r.outcome.frames, 2 * frameskip);
  EXPECT_EQ(env.agent().x, 1);
  EXPECT_EQ(env.calls(), 2u);
}

TEST(FillWithExtension, RewardCountsAsChange) {
  ToyEnvSpec spec = pixel_chain(1, 1);
  spec.noop_reward = 1.0;
  ToyEnv env(spec);
  const Screen parent = env.screen();
  const auto r = fill_with_extension(env, parent, 2, extending(3));
  EXPECT_EQ(r.applications, 1);
  EXPECT_EQ(r.outcome.reward, 3.0);
}

TEST(FillWithExtension, DisabledRuleNeverExtends) {
  ToyEnv env(latched_chain(6, 4));
  const Screen parent = env.screen();
  EXPECT_EQ(fill_with_extension(env, parent, kRight, plain(2)).applications, 1);
}

TEST(FillWithExtension, RefusedExtensionIsReported) {
  ToyEnv env(latched_chain(6, 4));
  const Screen parent = env.screen();
  const auto r =
      fill_with_extension(env, parent, kRight, extending(2), [] { return false; });
  EXPECT_TRUE(r.refused);
  EXPECT_EQ(r.applications, 1);
}

}  // namespace
}  // namespace iwpix
