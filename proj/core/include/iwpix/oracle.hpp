#pragma once

// Exhaustive breadth-first enumeration of a small environment, used as
// ground truth for optimal feature depths and width-1 goals.

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "iwpix/caching_simulator.hpp"
#include "iwpix/featurizer.hpp"
#include "iwpix/features.hpp"

namespace iwpix {

struct OracleLimits {
  Depth max_depth = 64;
  std::size_t max_nodes = 200'000;
};

struct OracleNode {
  std::optional<std::size_t> parent;
  Action action = -1;
  Depth depth = 0;
  FeatureSet observation;
  FeatureSet features;
  bool terminal = false;
  /// Successor node per action; empty for terminal or unexpanded nodes.
  std::vector<std::size_t> children;
};

/// Reachability graph over (parent state, state) pairs: features of a node
/// depend on both when they include temporal families. Pairs are identified
/// by simulator fingerprints; without fingerprints the graph is a tree.
class BfsOracle {
 public:
  const std::vector<OracleNode>& nodes() const { return nodes_; }
  /// Every layer up to and including this depth was enumerated in full.
  Depth complete_depth() const { return complete_depth_; }
  bool capped() const { return capped_; }

  /// Exact minimum depth of `f`, kInfiniteDepth if never reached within the
  /// complete layers.
  Depth optimal_depth(FeatureId f) const;
  const std::map<FeatureId, Depth>& optimal_depths() const { return optimal_; }

  /// True iff a chain f_0, ..., f_D = goal exists with optimal depths
  /// 0..D where every state optimal for f_i has a child containing f_{i+1}.
  bool is_width1(FeatureId goal) const;
  /// All width-1 features, ascending.
  std::vector<FeatureId> width1_features() const;

 private:
  friend BfsOracle plain_bfs_oracle(Simulator&, const Featurizer&,
                                    const FillPolicy&, const FeatureSet*,
                                    OracleLimits);
  std::vector<std::vector<FeatureId>> certified_layers() const;

  std::vector<OracleNode> nodes_;
  std::map<FeatureId, Depth> optimal_;
  Depth complete_depth_ = 0;
  bool capped_ = false;
};

/// Enumerates everything reachable from `sim`'s current state, which is
/// restored afterwards. `root_prev` is the observation preceding the root.
BfsOracle plain_bfs_oracle(Simulator& sim, const Featurizer& featurizer,
                           const FillPolicy& policy,
                           const FeatureSet* root_prev = nullptr,
                           OracleLimits limits = {});

}  // namespace iwpix
