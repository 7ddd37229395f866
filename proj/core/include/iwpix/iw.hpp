#pragma once

// Breadth-first width-based planners. A generated node is kept iff its
// (k-lifted) features mark something new in the novelty table of its
// partition; everything else is pruned on generation and never expanded.
//
//   IW(k)   one table, features lifted to k-conjunctions
//   IW_G(1) one table per number of goal atoms true in the node
//   IW_S(1) one table per logscore of the shaped path reward

#include <cstdint>
#include <memory>
#include <vector>

#include "iwpix/features.hpp"
#include "iwpix/search_space.hpp"

namespace iwpix {

/// floor(log2 r) for r in (0, 1), 1 + floor(log2 r) for r >= 1, 0 otherwise.
int logscore(double r);

struct BfsOptions {
  /// Order in which a node's children are generated; empty means
  /// ascending action id. Must be a permutation of the action ids.
  std::vector<Action> action_order;
};

struct BfsResult {
  std::unique_ptr<Node> root;
  std::size_t expanded = 0;
  std::size_t generated = 0;
  std::size_t pruned = 0;
  bool truncated = false;  // stopped by the budget
  std::vector<int> partitions;  // keys of the novelty tables created
};

BfsResult iw_search(SearchSpace& space, std::unique_ptr<Node> root, int width,
                    const BfsOptions& options = {});
/// Throws std::invalid_argument for an empty goal set.
BfsResult iwg_search(SearchSpace& space, std::unique_ptr<Node> root,
                     const FeatureSet& goals, const BfsOptions& options = {});
BfsResult iws_search(SearchSpace& space, std::unique_ptr<Node> root,
                     const BfsOptions& options = {});

/// Number of goal atoms true in `features`.
int goals_achieved(const FeatureSet& features, const FeatureSet& goals);

}  // namespace iwpix
