#include "iwpix/search_space.hpp"

#include <algorithm>
#include <sstream>

namespace iwpix {

Budget Budget::simulator_calls(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("call budget must be positive");
  Budget b;
  b.kind = Kind::kCalls;
  b.calls = n;
  return b;
}

Budget Budget::wall_clock(double s) {
  if (!(s > 0.0)) throw std::invalid_argument("time budget must be positive");
  Budget b;
  b.kind = Kind::kSeconds;
  b.seconds = s;
  return b;
}

std::string Budget::to_string() const {
  std::ostringstream out;
  switch (kind) {
    case Kind::kCalls: out << calls << "calls"; break;
    case Kind::kSeconds: out << seconds << "s"; break;
    case Kind::kUnlimited: out << "unlimited"; break;
  }
  return out.str();
}

BudgetTracker::BudgetTracker(Budget budget, const Simulator& sim)
    : budget_(budget),
      sim_(sim),
      start_calls_(sim.calls()),
      start_(std::chrono::steady_clock::now()) {}

double BudgetTracker::elapsed_seconds() const {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
      .count();
}

bool BudgetTracker::exhausted() const {
  switch (budget_.kind) {
    case Budget::Kind::kCalls: return calls_used() >= budget_.calls;
    case Budget::Kind::kSeconds: return elapsed_seconds() >= budget_.seconds;
    case Budget::Kind::kUnlimited: return false;
  }
  return true;
}

double shape_reward(double raw, bool death, const RewardShaping& shaping) {
  if (!shaping.risk_averse) return raw;
  double shaped = raw < 0.0 ? raw * shaping.alpha : raw;
  if (death) shaped += shaping.death_penalty;
  return shaped;
}

std::vector<Action> Node::path() const {
  std::vector<Action> out;
  out.reserve(depth);
  for (const Node* n = this; n->parent != nullptr; n = n->parent) {
    out.push_back(n->action);
  }
  std::reverse(out.begin(), out.end());
  return out;
}

TreeSummary summarize(const Node& root) {
  TreeSummary s;
  std::vector<const Node*> stack{&root};
  while (!stack.empty()) {
    const Node* n = stack.back();
    stack.pop_back();
    if (!n->filled) continue;
    ++s.filled_nodes;
    s.max_depth = std::max(s.max_depth, n->depth);
    for (const auto& c : n->children) {
      if (c) stack.push_back(c.get());
    }
  }
  return s;
}

void dump_tree(std::ostream& out, const Node& root) {
  std::vector<const Node*> stack{&root};
  while (!stack.empty()) {
    const Node* n = stack.back();
    stack.pop_back();
    if (!n->filled) continue;
    const auto path = n->path();
    if (path.empty()) {
      out << '-';
    } else {
      for (std::size_t i = 0; i < path.size(); ++i) {
        if (i > 0) out << ',';
        out << path[i];
      }
    }
    out << ' ' << n->depth << ' ' << n->reward << ' ' << (n->pruned ? 1 : 0)
        << '\n';
    for (auto it = n->children.rbegin(); it != n->children.rend(); ++it) {
      if (*it) stack.push_back(it->get());
    }
  }
}

SearchSpace::SearchSpace(CachingSimulator& sim, const Featurizer& featurizer,
                         RewardShaping shaping, BudgetTracker& budget)
    : sim_(sim), featurizer_(featurizer), shaping_(shaping), budget_(budget) {
  sim_.set_call_gate([this] { return !budget_.exhausted(); });
}

SearchSpace::~SearchSpace() { sim_.set_call_gate({}); }

std::unique_ptr<Node> SearchSpace::make_root(
    const FeatureSet* prev_observation) const {
  auto root = std::make_unique<Node>();
  fill_root(*root, prev_observation);
  return root;
}

void SearchSpace::fill_root(Node& root, const FeatureSet* prev_observation) const {
  const StepRecord& rec = sim_.root();
  root.parent = nullptr;
  root.action = -1;
  root.depth = 0;
  root.outcome = StepOutcome{};
  root.reward = 0.0;
  root.path_reward = 0.0;
  root.observation = featurizer_.observe(rec.screen);
  root.features = featurizer_.state_features(prev_observation, root.observation);
  root.terminal = rec.outcome.terminal;
  root.filled = true;
}

void SearchSpace::expand(Node& node) const {
  if (node.expanded()) return;
  const int n = action_count();
  node.children.resize(static_cast<std::size_t>(n));
  for (int a = 0; a < n; ++a) {
    auto child = std::make_unique<Node>();
    child->parent = &node;
    child->action = a;
    child->depth = node.depth + 1;
    node.children[static_cast<std::size_t>(a)] = std::move(child);
  }
}

bool SearchSpace::fill(Node& node) {
  if (node.parent == nullptr || !node.parent->filled) {
    throw std::logic_error("fill: parent node is not filled");
  }
  const auto path = node.path();
  const auto step = sim_.cached_apply(path);
  if (!step) return false;
  const StepRecord& rec = *step->record;
  node.outcome = rec.outcome;
  node.terminal = rec.outcome.terminal;
  node.reward = shape_reward(rec.outcome.reward, rec.outcome.death, shaping_);
  node.path_reward = node.parent->path_reward + node.reward;
  node.observation = featurizer_.observe(rec.screen);
  node.features =
      featurizer_.state_features(&node.parent->observation, node.observation);
  node.filled = true;
  return true;
}

}  // namespace iwpix
