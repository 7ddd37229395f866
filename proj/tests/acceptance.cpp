// Acceptance checks. One PASS/FAIL line per criterion; exit status 1 if any
// fails.

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "harness.hpp"
#include "iwpix/cli.hpp"
#include "iwpix/episode.hpp"
#include "iwpix/iw.hpp"
#include "iwpix/rollout.hpp"

namespace {

using namespace iwpix;
using testing::Harness;
using testing::filled_nodes;
using testing::shallowest;
using testing::toy_suite;

struct Check {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Check feature_counts() {
  Check c;
  const auto t0 = Clock::now();
  const LayoutSizes s = layout_sizes(TilingConfig::atari(), 128);
  c.require(s.basic == 28'672, "basic " + std::to_string(s.basic));
  c.require(s.bpros == 6'856'768, "bpros " + std::to_string(s.bpros));
  c.require(s.bprot == 13'713'408, "bprot " + std::to_string(s.bprot));
  c.require(s.total == 20'598'848, "total " + std::to_string(s.total));
  c.require(seconds_since(t0) < 1.0, "slower than 1s");
  if (c.ok) c.detail = "total 20598848";
  return c;
}

Check logscore_suite() {
  Check c;
  const std::vector<double> in = {-5, 0, 0.25, 0.5, 1, 3, 4};
  const std::vector<int> want = {0, 0, -2, -1, 1, 2, 3};
  for (std::size_t i = 0; i < in.size(); ++i) {
    const int got = logscore(in[i]);
    c.require(got == want[i], "logscore(" + std::to_string(in[i]) + ") = " +
                                  std::to_string(got));
  }
  if (c.ok) c.detail = "7/7 exact";
  return c;
}

Check risk_arithmetic() {
  Check c;
  EpisodeConfig cfg;
  cfg.planner = PlannerKind::kRaRollout;
  const RewardShaping s = cfg.shaping();
  const double alive = shape_reward(-1.0, false, s);
  const double dead = shape_reward(0.0, true, s);
  c.require(alive == -50'000.0, "negative reward gave " + std::to_string(alive));
  c.require(dead == -500'000.0, "death gave " + std::to_string(dead));
  if (c.ok) c.detail = "-50000, -500000";
  return c;
}

constexpr std::uint64_t kSeeds = 20;

Check rollout_progress() {
  Check c;
  const auto t0 = Clock::now();
  std::uint64_t rollouts = 0;
  std::uint64_t violations = 0;
  for (const auto& entry : toy_suite()) {
    for (std::uint64_t seed = 0; seed < kSeeds; ++seed) {
      Harness h(entry.spec, entry.options);
      std::mt19937_64 rng(seed);
      RolloutOptions options;
      options.on_rollout = [&](const RolloutTrace& t) {
        ++rollouts;
        if (t.improved.empty() && t.newly_solved == 0) ++violations;
      };
      generate_lookahead_tree(h.space(), h.root(), options, rng);
    }
  }
  c.require(violations == 0, std::to_string(violations) + " rollouts made no progress");
  c.require(rollouts >= 1000, "only " + std::to_string(rollouts) + " rollouts");
  c.require(seconds_since(t0) < 60.0, "slower than 60s");
  if (c.ok) c.detail = std::to_string(rollouts) + " rollouts, 0 violations";
  return c;
}

Check rollout_termination() {
  Check c;
  const auto t0 = Clock::now();
  std::size_t runs = 0;
  for (const auto& entry : toy_suite()) {
    for (std::uint64_t seed = 0; seed < kSeeds; ++seed) {
      Harness h(entry.spec, entry.options);
      std::mt19937_64 rng(seed);
      const auto r = generate_lookahead_tree(h.space(), h.root(), {}, rng);
      const std::uint64_t F = h.capacity();
      const auto b = static_cast<std::uint64_t>(h.actions());
      const std::string at = entry.label + " seed " + std::to_string(seed);
      c.require(r.stats.solved, at + ": root not solved");
      c.require(r.stats.rollouts <= F * F * b, at + ": too many rollouts");
      c.require(r.stats.nodes <= F * F + 1, at + ": too many nodes");
      ++runs;
    }
  }
  c.require(seconds_since(t0) < 60.0, "slower than 60s");
  if (c.ok) c.detail = std::to_string(runs) + " runs solved within bounds";
  return c;
}

Check width1_optimality() {
  Check c;
  const auto t0 = Clock::now();
  std::size_t goals = 0;
  std::mt19937_64 order_rng(21);
  for (const auto& entry : toy_suite()) {
    Harness h(entry.spec, entry.options);
    const BfsOracle o = h.oracle();
    c.require(!o.capped(), entry.label + ": oracle capped");
    const auto certified = o.width1_features();
    goals += certified.size();
    std::vector<Action> order(static_cast<std::size_t>(h.actions()));
    std::iota(order.begin(), order.end(), 0);
    for (std::uint64_t trial = 0; trial < kSeeds; ++trial) {
      h.restart();
      BfsOptions options;
      options.action_order = order;
      auto bfs = iw_search(h.space(), h.root(), 1, options);
      std::shuffle(order.begin(), order.end(), order_rng);

      h.restart();
      std::mt19937_64 rng(trial);
      auto ro = generate_lookahead_tree(h.space(), h.root(), {}, rng);
      for (FeatureId g : certified) {
        const Depth want = o.optimal_depth(g);
        const auto a = shallowest(*bfs.root, g, true);
        const auto b = shallowest(*ro.root, g, false);
        const std::string at = entry.label + " feature " + std::to_string(g);
        c.require(a && *a == want, at + ": IW(1) depth off");
        c.require(b && *b == want, at + ": Rollout IW(1) depth off");
      }
    }
  }
  c.require(seconds_since(t0) < 60.0, "slower than 60s");
  if (c.ok) {
    c.detail = std::to_string(goals) + " certified goals x " + std::to_string(kSeeds) +
               " orders/seeds";
  }
  return c;
}

Check iw1_complexity() {
  Check c;
  for (const auto& entry : toy_suite()) {
    Harness h(entry.spec, entry.options);
    const auto r = iw_search(h.space(), h.root(), 1);
    const std::uint64_t F = h.capacity();
    const auto b = static_cast<std::uint64_t>(h.actions());
    c.require(r.expanded <= F, entry.label + ": expanded " + std::to_string(r.expanded));
    c.require(r.generated <= F * b,
              entry.label + ": generated " + std::to_string(r.generated));
  }
  if (c.ok) c.detail = std::to_string(toy_suite().size()) + " instances";
  return c;
}

// Depth of IW(1)'s deepest node on PixelChain(length) at 2|F| calls, and of
// Rollout IW(1)'s for each of 100 seeds.
struct ChainRace {
  std::uint64_t budget = 0;
  Depth iw = 0;
  std::vector<Depth> rollout;
};

ChainRace race_on_chain(int length) {
  Harness h(pixel_chain(length));
  ChainRace r;
  r.budget = 2 * h.capacity();
  h.restart(Budget::simulator_calls(r.budget));
  r.iw = summarize(*iw_search(h.space(), h.root(), 1).root).max_depth;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed);
    h.restart(Budget::simulator_calls(r.budget));
    r.rollout.push_back(
        summarize(*generate_lookahead_tree(h.space(), h.root(), {}, rng).root).max_depth);
  }
  return r;
}

Check anytime() {
  Check c;
  const auto t0 = Clock::now();
  // Look for a length whose goal (depth L-1) lies beyond IW(1)'s frontier.
  int length = 0;
  ChainRace race;
  for (int L : {5, 10, 20, 40, 80, 160, 320}) {
    length = L;
    race = race_on_chain(L);
    if (race.iw < static_cast<Depth>(L - 1)) break;
  }
  const auto deeper = std::count_if(race.rollout.begin(), race.rollout.end(),
                                    [&](Depth d) { return d > race.iw; });
  std::ostringstream d;
  d << "PixelChain(" << length << "), budget " << race.budget << ": IW(1) depth " << race.iw
    << ", goal depth " << length - 1 << ", rollout deeper in " << deeper << "/100";
  c.require(race.iw < static_cast<Depth>(length - 1),
            "no length puts the goal beyond IW(1)'s frontier; " + d.str());
  c.require(deeper >= 95, d.str());
  c.require(seconds_since(t0) < 60.0, "slower than 60s");
  if (c.ok) c.detail = d.str();
  return c;
}

Check partial_caching() {
  Check c;
  EpisodeConfig cfg;
  cfg.planner = PlannerKind::kIw1;
  cfg.frameskip = 1;
  cfg.budget = Budget::simulator_calls(100'000);
  cfg.seed = 11;
  cfg.max_frames = 10;
  cfg.calibration_actions = 0;
  // Large enough that no item is collected within ten moves, so the episode
  // lasts exactly ten decisions.
  const ToyEnvSpec spec = collector_grid(9, 7, 3);
  ToyEnv with_env(spec);
  const EpisodeResult with = run_episode(with_env, cfg);
  cfg.caching = false;
  ToyEnv without_env(spec);
  const EpisodeResult without = run_episode(without_env, cfg);
  c.require(with.decisions.size() == 10 && without.decisions.size() == 10,
            "episode length " + std::to_string(with.decisions.size()));
  bool same = with.decisions.size() == without.decisions.size();
  for (std::size_t i = 0; same && i < with.decisions.size(); ++i) {
    same = with.decisions[i].selected == without.decisions[i].selected;
  }
  c.require(same, "selected actions differ");
  c.require(with.simulator_calls() < without.simulator_calls(),
            "calls " + std::to_string(with.simulator_calls()) + " vs " +
                std::to_string(without.simulator_calls()));
  if (c.ok) {
    c.detail = "calls " + std::to_string(with.simulator_calls()) + " < " +
               std::to_string(without.simulator_calls()) + ", actions identical";
  }
  return c;
}

Check no_change_extension() {
  Check c;
  constexpr int kFrameskip = 15;
  testing::HarnessOptions options;
  options.frameskip = kFrameskip;
  options.extend = true;
  Harness h(latched_chain(6, 2 * kFrameskip), options);
  auto root = h.root();
  h.space().expand(*root);
  Node& right = *root->children[1];
  const std::uint64_t calls_before = h.env().calls();
  c.require(h.space().fill(right), "fill refused");
  c.require(right.outcome.frames == 2 * kFrameskip,
            "fill used " + std::to_string(right.outcome.frames) + " frames");
  c.require(h.env().calls() - calls_before == 2, "expected two simulator calls");
  c.require(right.observation != root->observation, "the agent did not move");
  if (c.ok) c.detail = "30 frames over 2 calls";
  return c;
}

Check iwg_separation() {
  Check c;
  Harness h(load_toy_spec(IWPIX_FIXTURE_DIR "/two_goal_corridor.json"));
  const FeatureId g0 = h.layout().basic(0, 0, toy_color::kMarker);
  const FeatureId g1 = h.layout().basic(0, 1, toy_color::kMarker);
  auto most_goals = [&](const Node& root) {
    int best = 0;
    for (const Node* n : filled_nodes(root)) {
      best = std::max(best, static_cast<int>(n->features.contains(g0)) +
                                static_cast<int>(n->features.contains(g1)));
    }
    return best;
  };
  const int plain = most_goals(*iw_search(h.space(), h.root(), 1).root);
  h.restart();
  const FeatureSet goals(h.capacity(), {g0, g1});
  const auto r = iwg_search(h.space(), h.root(), goals);
  const int with_goals = most_goals(*r.root);
  const std::uint64_t bound = h.capacity() * goals.size();
  c.require(plain <= 1, "IW(1) reached both goals");
  c.require(with_goals == 2, "IW_G(1) reached " + std::to_string(with_goals) + " goals");
  c.require(r.expanded <= bound, "IW_G expanded " + std::to_string(r.expanded));
  if (c.ok) {
    c.detail = "IW(1) " + std::to_string(plain) + " goal, IW_G(1) 2 goals, expanded " +
               std::to_string(r.expanded) + " <= " + std::to_string(bound);
  }
  return c;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

Check pipeline_determinism() {
  Check c;
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "iwpix_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  auto run = [&](const std::string& name) {
    const std::string out = (dir / name).string();
    const std::vector<std::string> args = {
        "iwpix",  "run",          "--env",        "collector_grid(6,5,3)", "--planner",
        "rollout", "--budget-calls", "150",       "--runs",               "3",
        "--seed", "29",           "--max-frames", "200",                  "--out",
        out};
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream sink;
    return cli::main(static_cast<int>(argv.size()), argv.data(), sink, sink);
  };
  c.require(run("a.csv") == 0 && run("b.csv") == 0, "run failed");
  const std::string a = slurp(dir / "a.csv");
  const std::string b = slurp(dir / "b.csv");
  c.require(!a.empty() && a == b, "result files differ");
  if (c.ok) c.detail = std::to_string(a.size()) + " identical bytes";
  fs::remove_all(dir);
  return c;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Check()>>> checks = {
      {"feature_counts", feature_counts},
      {"logscore", logscore_suite},
      {"risk_arithmetic", risk_arithmetic},
      {"rollout_progress", rollout_progress},
      {"rollout_termination", rollout_termination},
      {"width1_optimality", width1_optimality},
      {"iw1_complexity", iw1_complexity},
      {"anytime", anytime},
      {"partial_caching", partial_caching},
      {"no_change_extension", no_change_extension},
      {"iwg_separation", iwg_separation},
      {"pipeline_determinism", pipeline_determinism},
  };
  int failed = 0;
  for (const auto& [name, fn] : checks) {
    Check c;
    try {
      c = fn();
    } catch (const std::exception& e) {
      c.ok = false;
      c.detail = std::string("threw: ") + e.what();
    }
    std::cout << (c.ok ? "PASS " : "FAIL ") << name << ": " << c.detail << '\n';
    failed += c.ok ? 0 : 1;
  }
  std::cout << (checks.size() - static_cast<std::size_t>(failed)) << '/' << checks.size()
            << " passed\n";
  return failed == 0 ? 0 : 1;
}
