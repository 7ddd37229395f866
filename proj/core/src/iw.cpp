#include "iwpix/iw.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <numeric>

namespace iwpix {

int logscore(double r) {
  if (!(r > 0.0)) return 0;
  int exponent = 0;
  // r = m * 2^exponent with m in [0.5, 1), so floor(log2 r) = exponent - 1
  // exactly, without log2 rounding at powers of two.
  std::frexp(r, &exponent);
  const int floor_log2 = exponent - 1;
  return r < 1.0 ? floor_log2 : 1 + floor_log2;
}

int goals_achieved(const FeatureSet& features, const FeatureSet& goals) {
  int n = 0;
  for (FeatureId g : goals) {
    if (features.contains(g)) ++n;
  }
  return n;
}

namespace {

std::vector<Action> resolve_order(const BfsOptions& options, int n) {
  std::vector<Action> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  if (options.action_order.empty()) return order;
  std::vector<Action> given = options.action_order;
  std::vector<Action> sorted = given;
  std::sort(sorted.begin(), sorted.end());
  if (sorted != order) {
    throw std::invalid_argument("action_order must permute the action ids");
  }
  return given;
}

BfsResult breadth_first(SearchSpace& space, std::unique_ptr<Node> root,
                        int width,
                        const std::function<int(const Node&)>& partition,
                        const BfsOptions& options) {
  if (width < 1) throw std::invalid_argument("width must be >= 1");
  if (!root || !root->filled) {
    throw std::invalid_argument("search root must be filled");
  }
  const auto order = resolve_order(options, space.action_count());
  const std::uint64_t capacity =
      lifted_capacity(space.featurizer().capacity(), width);
  PartitionedTable tables(capacity);
  auto lifted = [width](const FeatureSet& s) {
    return width == 1 ? s : lift_conjunctions(s, width);
  };

  BfsResult result;
  tables.mark_and_test(partition(*root), lifted(root->features));

  std::deque<Node*> open;
  if (!root->terminal) open.push_back(root.get());
  while (!open.empty() && !result.truncated) {
    if (space.budget().exhausted()) {
      result.truncated = true;
      break;
    }
    Node* node = open.front();
    open.pop_front();
    space.expand(*node);
    ++result.expanded;
    for (Action a : order) {
      Node& child = *node->children[static_cast<std::size_t>(a)];
      if (!space.fill(child)) {
        result.truncated = true;
        break;
      }
      ++result.generated;
      if (!tables.mark_and_test(partition(child), lifted(child.features)).novel) {
        child.pruned = true;
        ++result.pruned;
        continue;
      }
      if (!child.terminal) open.push_back(&child);
    }
  }
  result.partitions = tables.keys();
  result.root = std::move(root);
  return result;
}

}  // namespace

BfsResult iw_search(SearchSpace& space, std::unique_ptr<Node> root, int width,
                    const BfsOptions& options) {
  return breadth_first(space, std::move(root), width,
                       [](const Node&) { return 0; }, options);
}

BfsResult iwg_search(SearchSpace& space, std::unique_ptr<Node> root,
                     const FeatureSet& goals, const BfsOptions& options) {
  if (goals.empty()) throw std::invalid_argument("IW_G needs at least one goal");
  return breadth_first(
      space, std::move(root), 1,
      [&goals](const Node& n) { return goals_achieved(n.features, goals); },
      options);
}

BfsResult iws_search(SearchSpace& space, std::unique_ptr<Node> root,
                     const BfsOptions& options) {
  return breadth_first(space, std::move(root), 1,
                       [](const Node& n) { return logscore(n.path_reward); },
                       options);
}

}  // namespace iwpix
