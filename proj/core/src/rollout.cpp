#include "iwpix/rollout.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>

#include "iwpix/iw.hpp"

namespace iwpix {

const char* to_string(RolloutCase c) {
  switch (c) {
    case RolloutCase::kNovel: return "novel";
    case RolloutCase::kNewNotNovel: return "new-not-novel";
    case RolloutCase::kRevisitedStale: return "revisited-stale";
    case RolloutCase::kRevisitedKnown: return "revisited-known";
    case RolloutCase::kTerminal: return "terminal";
  }
  return "?";
}

std::size_t solve_and_propagate(Node& n) {
  std::size_t changed = 0;
  if (!n.solved) {
    n.solved = true;
    ++changed;
  }
  for (Node* p = n.parent; p != nullptr; p = p->parent) {
    if (p->solved || !p->expanded()) break;
    const bool all = std::all_of(p->children.begin(), p->children.end(),
                                 [](const auto& c) { return c->filled && c->solved; });
    if (!all) break;
    p->solved = true;
    ++changed;
  }
  return changed;
}

RolloutSearch::RolloutSearch(SearchSpace& space, std::unique_ptr<Node> root,
                             RolloutOptions options, std::mt19937_64& rng)
    : space_(space),
      root_(std::move(root)),
      options_(std::move(options)),
      rng_(rng),
      capacity_(lifted_capacity(space.featurizer().capacity(), options_.width)) {
  if (!root_ || !root_->filled) {
    throw std::invalid_argument("rollout root must be filled");
  }
  if (options_.width < 1) throw std::invalid_argument("width must be >= 1");
  tables_.emplace(partition(*root_), DepthTable(capacity_));
  tables_.at(partition(*root_)).update(lifted(root_->features), 0);
  stats_.nodes = summarize(*root_).filled_nodes;
  if (root_->terminal) solve_and_propagate(*root_);
  stats_.solved = root_->solved;
}

FeatureSet RolloutSearch::lifted(const FeatureSet& s) const {
  return options_.width == 1 ? s : lift_conjunctions(s, options_.width);
}

int RolloutSearch::partition(const Node& n) const {
  return options_.subscoring ? logscore(n.path_reward) : 0;
}

DepthTable& RolloutSearch::table_for(const Node& n) {
  return tables_.try_emplace(partition(n), capacity_).first->second;
}

const DepthTable* RolloutSearch::table(int key) const {
  auto it = tables_.find(key);
  return it == tables_.end() ? nullptr : &it->second;
}

std::vector<int> RolloutSearch::partitions() const {
  std::vector<int> keys;
  for (const auto& [k, _] : tables_) keys.push_back(k);
  return keys;
}

RolloutTrace RolloutSearch::rollout() {
  if (root_->solved) throw std::logic_error("rollout from a solved root");
  RolloutTrace trace;
  Node* n = root_.get();
  std::vector<Node*> unsolved;
  while (!n->solved) {
    space_.expand(*n);
    unsolved.clear();
    for (auto& c : n->children) {
      if (!c->solved) unsolved.push_back(c.get());
    }
    assert(!unsolved.empty());
    std::uniform_int_distribution<std::size_t> pick(0, unsolved.size() - 1);
    Node* child = unsolved[pick(rng_)];
    if (!child->filled) {
      if (!space_.fill(*child)) {
        trace.truncated = true;
        break;
      }
      ++stats_.nodes;
    }
    n = child;

    RolloutStep step{n->depth, n->action, RolloutCase::kTerminal};
    if (n->terminal) {
      n->visited = true;
      trace.newly_solved += solve_and_propagate(*n);
      trace.steps.push_back(step);
      break;
    }
    const FeatureSet features = lifted(n->features);
    DepthTable& d = table_for(*n);
    // A node without features can improve nothing and matches nothing.
    const NoveltyKind kind = features.empty()
                                 ? NoveltyKind::kStale
                                 : classify_novelty(features, n->depth, d).kind;
    if (kind == NoveltyKind::kNovel) {
      step.kind = RolloutCase::kNovel;
      n->visited = true;
      const auto improved = d.update(features, n->depth);
      trace.improved.insert(trace.improved.end(), improved.begin(), improved.end());
      trace.steps.push_back(step);
    } else if (!n->visited) {
      step.kind = RolloutCase::kNewNotNovel;
      n->visited = true;
      trace.newly_solved += solve_and_propagate(*n);
      trace.steps.push_back(step);
      break;
    } else if (kind == NoveltyKind::kStale) {
      step.kind = RolloutCase::kRevisitedStale;
      trace.newly_solved += solve_and_propagate(*n);
      trace.steps.push_back(step);
      break;
    } else {
      step.kind = RolloutCase::kRevisitedKnown;
      trace.steps.push_back(step);
    }
  }
  std::sort(trace.improved.begin(), trace.improved.end());
  trace.improved.erase(std::unique(trace.improved.begin(), trace.improved.end()),
                       trace.improved.end());

  ++stats_.rollouts;
  stats_.max_rollout_length = std::max<Depth>(
      stats_.max_rollout_length, static_cast<Depth>(trace.steps.size()));
  stats_.solved = root_->solved;
  stats_.truncated = stats_.truncated || trace.truncated;
  if (options_.on_rollout) options_.on_rollout(trace);
  return trace;
}

const RolloutStats& RolloutSearch::run() {
  while (!root_->solved) {
    if (options_.max_rollouts != 0 && stats_.rollouts >= options_.max_rollouts) break;
    if (space_.budget().exhausted()) {
      stats_.truncated = true;
      break;
    }
    if (rollout().truncated) break;
  }
  stats_.solved = root_->solved;
  return stats_;
}

RolloutResult generate_lookahead_tree(SearchSpace& space, std::unique_ptr<Node> root,
                                      const RolloutOptions& options,
                                      std::mt19937_64& rng) {
  RolloutSearch search(space, std::move(root), options, rng);
  search.run();
  RolloutResult result;
  result.stats = search.stats();
  result.root = search.release_root();
  return result;
}

namespace {

void reset_retained(Node& n, Depth depth) {
  n.depth = depth;
  n.filled = false;
  n.pruned = false;
  n.visited = false;
  n.solved = false;
  n.terminal = false;
  for (auto& c : n.children) {
    if (c) reset_retained(*c, depth + 1);
  }
}

}  // namespace

std::unique_ptr<Node> reuse_subtree(std::unique_ptr<Node> root, Action executed) {
  if (!root || executed < 0 ||
      static_cast<std::size_t>(executed) >= root->children.size()) {
    return nullptr;
  }
  std::unique_ptr<Node> child = std::move(root->children[static_cast<std::size_t>(executed)]);
  if (!child || !child->filled) return nullptr;
  child->parent = nullptr;
  child->action = -1;
  reset_retained(*child, 0);
  return child;
}

}  // namespace iwpix
