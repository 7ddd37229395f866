#include "iwpix/cli.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "iwpix/bprost.hpp"

namespace iwpix::cli {

namespace {

std::string format_number(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + '"';
}

std::string sanitize(const std::string& s) {
  std::string out;
  for (char c : s) {
    out += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out;
}

// Options shared by run and sweep. Budget and planner are handled per
// subcommand since sweep takes lists of them.
struct CommonOptions {
  RunConfig cfg;
  std::string features = "bprost";
  bool no_caching = false;
  bool no_extension = false;
};

void add_common(CLI::App& app, CommonOptions& o) {
  app.add_option("--frameskip", o.cfg.episode.frameskip, "Frames per action")
      ->capture_default_str();
  app.add_option("--gamma", o.cfg.episode.gamma, "Discount factor")->capture_default_str();
  app.add_option("--alpha", o.cfg.episode.alpha, "Risk-averse loss scale")
      ->capture_default_str();
  app.add_option("--width", o.cfg.episode.width, "k for iwk, lifting for rollouts")
      ->capture_default_str();
  app.add_option("--max-frames", o.cfg.episode.max_frames, "Episode frame cap")
      ->capture_default_str();
  app.add_option("--calibration", o.cfg.episode.calibration_actions,
                 "Random actions used to find background pixels")
      ->capture_default_str();
  app.add_option("--features", o.features, "basic, bpros or bprost")
      ->check(CLI::IsMember({"basic", "bpros", "bprost"}))
      ->capture_default_str();
  app.add_flag("--no-caching", o.no_caching, "Do not carry the tree across decisions");
  app.add_flag("--no-extension", o.no_extension,
               "Never re-apply an action that changed nothing");
  app.add_option("--runs", o.cfg.runs, "Episodes per configuration")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--seed", o.cfg.episode.seed, "Base seed")->capture_default_str();
  app.add_option("--jobs", o.cfg.jobs, "Episodes run concurrently")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

void finish_common(CommonOptions& o) {
  o.cfg.episode.caching = !o.no_caching;
  o.cfg.episode.extend_on_no_change = !o.no_extension;
  if (o.features == "basic") {
    o.cfg.episode.families = FeatureFamilies::basic_only();
  } else if (o.features == "bpros") {
    o.cfg.episode.families = {true, true, false};
  } else {
    o.cfg.episode.families = FeatureFamilies::all();
  }
}

Budget parse_budget(std::optional<std::uint64_t> calls, std::optional<double> seconds) {
  if (seconds) return Budget::wall_clock(*seconds);
  return Budget::simulator_calls(calls.value_or(1000));
}

struct BatchOutcome {
  BatchResult batch;
  std::vector<std::string> logs;
  std::size_t errors = 0;
};

BatchOutcome run_config(const RunConfig& cfg) {
  const ToyEnvSpec spec = resolve_env(cfg);
  EpisodeConfig episode = cfg.episode;
  if (episode.planner == PlannerKind::kIwg && episode.goals.empty()) {
    episode.goals = hud_goals(spec);
    if (episode.goals.empty()) {
      throw std::invalid_argument("iwg needs an environment with a HUD row");
    }
  }
  episode.log_trees = cfg.trace_trees;
  BatchOutcome outcome;
  outcome.batch = run_batch([&spec] { return std::make_unique<ToyEnv>(spec); },
                            episode, cfg.runs, cfg.jobs,
                            cfg.trace.empty() ? nullptr : &outcome.logs);
  for (const auto& r : outcome.batch.runs) {
    if (r.terminated_by == Termination::kError) ++outcome.errors;
  }
  return outcome;
}

void write_trace(const std::string& path, const BatchOutcome& o) {
  std::ofstream trace(path);
  if (!trace) throw std::runtime_error("cannot write trace file: " + path);
  for (std::size_t i = 0; i < o.logs.size(); ++i) {
    trace << nlohmann::json{{"type", "run"}, {"index", i}, {"seed", o.batch.seeds[i]}}
                 .dump()
          << '\n'
          << o.logs[i];
  }
}

void print_summary(std::ostream& out, const RunConfig& cfg, const BatchOutcome& o) {
  out << env_label(cfg) << ' ' << to_string(cfg.episode.planner) << ' '
      << cfg.episode.budget.to_string() << ": mean score "
      << format_number(o.batch.mean_score) << " over " << o.batch.runs.size()
      << " run(s)";
  if (o.errors > 0) out << ", " << o.errors << " failed";
  out << '\n';
  for (std::size_t i = 0; i < o.batch.runs.size(); ++i) {
    const auto& r = o.batch.runs[i];
    if (r.terminated_by == Termination::kError) {
      out << "  run " << i << " failed: " << r.error << '\n';
    }
  }
}

int cmd_run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  BatchOutcome o;
  try {
    o = run_config(cfg);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  if (cfg.out.empty()) {
    write_results(out, cfg, o.batch);
  } else {
    std::ofstream file(cfg.out);
    if (!file) {
      err << "error: cannot write results file: " << cfg.out << '\n';
      return 1;
    }
    write_results(file, cfg, o.batch);
  }
  if (!cfg.trace.empty()) write_trace(cfg.trace, o);
  print_summary(cfg.out.empty() ? err : out, cfg, o);
  return o.errors == 0 ? 0 : 1;
}

struct FeaturesArgs {
  std::string fixture;
  std::string tile;
  bool no_background = false;
};

int cmd_features(const FeaturesArgs& args, std::ostream& out, std::ostream& err) {
  try {
    const auto screens = read_screen_file(args.fixture);
    if (screens.empty() || screens.size() > 2) {
      throw FormatError("expected one or two screens, found " +
                        std::to_string(screens.size()));
    }
    const Screen& first = screens.front();
    const Screen& last = screens.back();
    if (first.width() != last.width() || first.height() != last.height() ||
        first.palette_size() != last.palette_size()) {
      throw FormatError("screens of a pair must share dimensions and palette");
    }
    TilingConfig tiling;
    if (!args.tile.empty()) {
      int tw = 0, th = 0;
      char x = 0;
      std::istringstream in(args.tile);
      if (!(in >> tw >> x >> th) || x != 'x') {
        throw std::invalid_argument("--tile expects WxH, got " + args.tile);
      }
      tiling = TilingConfig::covering(first.width(), first.height(), tw, th);
    } else if (first.width() == 160 && first.height() == 210) {
      tiling = TilingConfig::atari();
    } else {
      tiling = TilingConfig::covering(first.width(), first.height(), 1, 1);
    }
    const FeatureLayout layout(tiling, first.palette_size());
    const BackgroundMap bg =
        args.no_background
            ? BackgroundMap::none(first.width(), first.height())
            : BackgroundMap::uniform(first.width(), first.height(), 0);
    const FeatureSet active = extract_bprost(
        screens.size() == 2 ? &first : nullptr, last, bg, layout);
    const auto& sz = layout.sizes();
    out << "screen " << first.width() << 'x' << first.height() << " palette "
        << first.palette_size() << '\n'
        << "tiles " << tiling.tile_cols << 'x' << tiling.tile_rows << " of "
        << tiling.tile_w << 'x' << tiling.tile_h << '\n'
        << "basic " << sz.basic << '\n'
        << "bpros " << sz.bpros << '\n'
        << "bprot " << sz.bprot << '\n'
        << "total " << sz.total << '\n'
        << "active " << active.size() << '\n';
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << args.fixture << ": " << e.what() << '\n';
    return 1;
  }
}

struct SweepArgs {
  CommonOptions common;
  std::vector<std::string> envs;
  std::vector<std::string> planners;
  std::vector<std::uint64_t> budget_calls;
  std::vector<double> budget_seconds;
  std::string out = "sweep";
};

int cmd_sweep(SweepArgs& args, std::ostream& out, std::ostream& err) {
  std::vector<Budget> budgets;
  for (auto c : args.budget_calls) budgets.push_back(Budget::simulator_calls(c));
  for (auto s : args.budget_seconds) budgets.push_back(Budget::wall_clock(s));
  std::vector<PlannerKind> planners;
  try {
    for (const auto& p : args.planners) planners.push_back(parse_planner(p));
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  if (budgets.empty() || planners.empty() || args.envs.empty()) {
    out << "empty sweep, nothing to do\n";
    return 0;
  }
  std::filesystem::create_directories(args.out);

  // (env, budget) -> planner -> mean score, or nullopt for a failed cell.
  std::map<std::pair<std::size_t, std::size_t>,
           std::map<std::size_t, std::optional<double>>>
      table;
  std::size_t failed = 0;
  for (std::size_t e = 0; e < args.envs.size(); ++e) {
    for (std::size_t b = 0; b < budgets.size(); ++b) {
      for (std::size_t p = 0; p < planners.size(); ++p) {
        RunConfig cfg = args.common.cfg;
        cfg.env = args.envs[e];
        cfg.episode.planner = planners[p];
        cfg.episode.budget = budgets[b];
        const std::string name = sanitize(cfg.env) + "_" + sanitize(to_string(planners[p])) +
                                 "_" + sanitize(budgets[b].to_string()) + ".csv";
        std::optional<double> mean;
        try {
          const BatchOutcome o = run_config(cfg);
          std::ofstream file(std::filesystem::path(args.out) / name);
          write_results(file, cfg, o.batch);
          if (o.errors == 0) mean = o.batch.mean_score;
          else err << "cell " << name << ": " << o.errors << " run(s) failed\n";
        } catch (const std::exception& ex) {
          err << "cell " << name << " failed: " << ex.what() << '\n';
        }
        if (!mean) ++failed;
        table[{e, b}][p] = mean;
      }
    }
  }

  std::ofstream combined(std::filesystem::path(args.out) / "combined.csv");
  combined << "# schema " << kResultsSchema << " sweep\nenv,budget";
  out << "env\tbudget";
  for (auto p : planners) {
    combined << ',' << to_string(p);
    out << '\t' << to_string(p);
  }
  combined << '\n';
  out << '\n';
  for (const auto& [key, row] : table) {
    combined << csv_field(args.envs[key.first]) << ',' << budgets[key.second].to_string();
    out << args.envs[key.first] << '\t' << budgets[key.second].to_string();
    for (const auto& [p, mean] : row) {
      const std::string cell = mean ? format_number(*mean) : "failed";
      combined << ',' << cell;
      out << '\t' << cell;
    }
    combined << '\n';
    out << '\n';
  }
  return failed == 0 ? 0 : 1;
}

}  // namespace

ToyEnvSpec resolve_env(const RunConfig& cfg) {
  ToyEnvSpec spec =
      cfg.env_file.empty() ? builtin_toy_spec(cfg.env) : load_toy_spec(cfg.env_file);
  spec.move_period *= cfg.episode.frameskip;
  spec.validate();
  return spec;
}

std::string env_label(const RunConfig& cfg) {
  return cfg.env_file.empty() ? cfg.env : cfg.env_file;
}

std::vector<FeatureId> hud_goals(const ToyEnvSpec& spec) {
  std::vector<FeatureId> goals;
  if (!spec.hud) return goals;
  const ToyEnv env(spec);
  const FeatureLayout layout(env.tiling(), env.screen().palette_size());
  for (std::size_t i = 0; i < spec.items.size(); ++i) {
    goals.push_back(layout.basic(0, static_cast<int>(i), toy_color::kMarker));
  }
  return goals;
}

void write_results(std::ostream& out, const RunConfig& cfg, const BatchResult& batch) {
  const std::string prefix = csv_field(env_label(cfg)) + ',' +
                             to_string(cfg.episode.planner) + ',' +
                             cfg.episode.budget.to_string() + ',' +
                             std::to_string(cfg.episode.frameskip) + ',';
  out << "# schema " << kResultsSchema << '\n'
      << "kind,env,planner,budget,frameskip,seed,score,decisions,calls\n";
  double decisions = 0.0;
  double calls = 0.0;
  for (std::size_t i = 0; i < batch.runs.size(); ++i) {
    const auto& r = batch.runs[i];
    out << "run," << prefix << batch.seeds[i] << ',' << format_number(r.total_raw_score)
        << ',' << r.decisions.size() << ',' << r.simulator_calls() << '\n';
    decisions += static_cast<double>(r.decisions.size());
    calls += static_cast<double>(r.simulator_calls());
  }
  const double n = static_cast<double>(std::max<std::size_t>(1, batch.runs.size()));
  out << "mean," << prefix << cfg.episode.seed << ',' << format_number(batch.mean_score)
      << ',' << format_number(decisions / n) << ',' << format_number(calls / n) << '\n';
}

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Width-based lookahead planning over pixel features"};
  app.require_subcommand(1);
  app.set_config("--config", "", "INI file with [run] or [sweep] sections mirroring the flags");

  CommonOptions run_opts;
  std::string planner = "rollout";
  std::optional<std::uint64_t> budget_calls;
  std::optional<double> budget_seconds;
  auto* run = app.add_subcommand("run", "Play episodes and write a results table");
  run->fallthrough();
  run->add_option("--env", run_opts.cfg.env, "Built-in environment, e.g. pixel_chain(5)")
      ->capture_default_str();
  run->add_option("--env-file", run_opts.cfg.env_file, "JSON environment spec")
      ->check(CLI::ExistingFile);
  run->add_option("--planner", planner,
                  "iw1, iwk, iwg, iws, rollout, ra-rollout or ras-rollout")
      ->capture_default_str();
  auto* calls_opt =
      run->add_option("--budget-calls", budget_calls, "Simulator calls per decision (default 1000)")
          ->check(CLI::PositiveNumber);
  run->add_option("--budget-seconds", budget_seconds, "Wall-clock seconds per decision")
      ->check(CLI::PositiveNumber)
      ->excludes(calls_opt);
  run->add_option("--out", run_opts.cfg.out, "Results file (default stdout)");
  run->add_option("--trace", run_opts.cfg.trace, "Write per-decision JSONL logs here");
  run->add_flag("--trace-trees", run_opts.cfg.trace_trees,
                "Include every lookahead tree in the trace");
  add_common(*run, run_opts);

  FeaturesArgs feat;
  auto* features = app.add_subcommand("features", "Feature-space sizes for a screen fixture");
  features->add_option("fixture", feat.fixture, ".pxs file holding one screen or a pair")
      ->required();
  features->add_option("--tile", feat.tile, "Tile size WxH (default 1x1, Atari tiling at 160x210)");
  features->add_flag("--no-background", feat.no_background,
                     "Count every pixel instead of masking color 0");

  SweepArgs sweep_args;
  auto* sweep = app.add_subcommand("sweep", "Run every env x budget x planner cell");
  sweep->fallthrough();
  sweep->add_option("--env", sweep_args.envs, "Built-in environments");
  sweep->add_option("--planner", sweep_args.planners, "Planners");
  sweep->add_option("--budget-calls", sweep_args.budget_calls, "Call budgets");
  sweep->add_option("--budget-seconds", sweep_args.budget_seconds, "Time budgets");
  sweep->add_option("--out", sweep_args.out, "Output directory")->capture_default_str();
  add_common(*sweep, sweep_args.common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  if (run->parsed()) {
    finish_common(run_opts);
    try {
      run_opts.cfg.episode.planner = parse_planner(planner);
      run_opts.cfg.episode.budget = parse_budget(budget_calls, budget_seconds);
      const ToyEnvSpec spec = resolve_env(run_opts.cfg);
      if (run_opts.cfg.episode.planner == PlannerKind::kIwg) {
        run_opts.cfg.episode.goals = hud_goals(spec);
      }
      run_opts.cfg.episode.validate();
    } catch (const std::exception& e) {
      err << "error: " << e.what() << '\n' << run->help();
      return 2;
    }
    return cmd_run(run_opts.cfg, out, err);
  }
  if (features->parsed()) return cmd_features(feat, out, err);
  finish_common(sweep_args.common);
  return cmd_sweep(sweep_args, out, err);
}

}  // namespace iwpix::cli
