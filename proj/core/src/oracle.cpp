#include "iwpix/oracle.hpp"

#include <algorithm>
#include <iterator>
#include <set>
#include <unordered_map>
#include <utility>

namespace iwpix {

namespace {

struct PairHash {
  std::size_t operator()(const std::pair<std::uint64_t, std::uint64_t>& p) const {
    return std::hash<std::uint64_t>{}(p.first * 0x9e3779b97f4a7c15ULL ^ p.second);
  }
};

struct Pending {
  std::size_t node;
  StateHandle handle;
  Screen screen;
  std::optional<std::uint64_t> fingerprint;
};

}  // namespace

Depth BfsOracle::optimal_depth(FeatureId f) const {
  auto it = optimal_.find(f);
  if (it == optimal_.end() || it->second > complete_depth_) return kInfiniteDepth;
  return it->second;
}

std::vector<std::vector<FeatureId>> BfsOracle::certified_layers() const {
  std::vector<std::vector<std::size_t>> by_depth(complete_depth_ + 1);
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].depth <= complete_depth_) by_depth[nodes_[i].depth].push_back(i);
  }
  auto features_at = [&](Depth d) {
    std::vector<FeatureId> out;
    for (const auto& [f, depth] : optimal_) {
      if (depth == d) out.push_back(f);
    }
    return out;
  };

  std::vector<std::vector<FeatureId>> layers(complete_depth_ + 1);
  if (nodes_.empty()) return layers;
  layers[0] = features_at(0);
  if (complete_depth_ >= 1) {
    // The root is the only depth-0 state, so every depth-1 feature extends
    // the empty prefix.
    layers[1] = features_at(1);
  }
  for (Depth d = 1; d < complete_depth_; ++d) {
    std::set<FeatureId> next;
    for (FeatureId f : layers[d]) {
      // Features with optimal depth d + 1 present in a child of every
      // depth-d state that contains f.
      std::optional<std::set<FeatureId>> common;
      for (std::size_t i : by_depth[d]) {
        const OracleNode& n = nodes_[i];
        if (!n.features.contains(f)) continue;
        std::set<FeatureId> reach;
        for (std::size_t c : n.children) {
          for (FeatureId g : nodes_[c].features) {
            auto it = optimal_.find(g);
            if (it != optimal_.end() && it->second == d + 1) reach.insert(g);
          }
        }
        if (!common) {
          common = std::move(reach);
        } else {
          std::set<FeatureId> kept;
          std::set_intersection(common->begin(), common->end(), reach.begin(),
                                reach.end(), std::inserter(kept, kept.end()));
          common = std::move(kept);
        }
        if (common->empty()) break;
      }
      if (common) next.insert(common->begin(), common->end());
    }
    layers[d + 1].assign(next.begin(), next.end());
  }
  return layers;
}

bool BfsOracle::is_width1(FeatureId goal) const {
  const Depth d = optimal_depth(goal);
  if (d == kInfiniteDepth) return false;
  const auto layers = certified_layers();
  return std::binary_search(layers[d].begin(), layers[d].end(), goal);
}

std::vector<FeatureId> BfsOracle::width1_features() const {
  std::vector<FeatureId> out;
  for (const auto& layer : certified_layers()) {
    out.insert(out.end(), layer.begin(), layer.end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

BfsOracle plain_bfs_oracle(Simulator& sim, const Featurizer& featurizer,
                           const FillPolicy& policy, const FeatureSet* root_prev,
                           OracleLimits limits) {
  BfsOracle oracle;
  const StateHandle start = sim.save();

  auto add_node = [&](std::optional<std::size_t> parent, Action a, Depth depth,
                      const FeatureSet* prev_obs, const Screen& screen,
                      bool terminal) {
    OracleNode n;
    n.parent = parent;
    n.action = a;
    n.depth = depth;
    n.observation = featurizer.observe(screen);
    n.features = featurizer.state_features(prev_obs, n.observation);
    n.terminal = terminal;
    for (FeatureId f : n.features) {
      auto [it, inserted] = oracle.optimal_.emplace(f, depth);
      if (!inserted) it->second = std::min(it->second, depth);
    }
    oracle.nodes_.push_back(std::move(n));
    return oracle.nodes_.size() - 1;
  };

  std::unordered_map<std::pair<std::uint64_t, std::uint64_t>, std::size_t,
                     PairHash>
      seen;
  std::vector<Pending> layer;
  const std::size_t root = add_node(std::nullopt, -1, 0, root_prev, sim.screen(),
                                    sim.terminal());
  if (!sim.terminal()) {
    layer.push_back({root, start, sim.screen(), sim.fingerprint()});
  }

  bool complete = true;
  Depth depth = 0;
  while (!layer.empty()) {
    if (depth >= limits.max_depth) {
      complete = false;
      break;
    }
    std::vector<Pending> next;
    for (Pending& p : layer) {
      std::vector<std::size_t> children;
      for (Action a = 0; a < sim.action_count(); ++a) {
        sim.restore(p.handle);
        const FillResult fill = fill_with_extension(sim, p.screen, a, policy);
        const auto fp = sim.fingerprint();
        if (fp && p.fingerprint) {
          auto it = seen.find({*p.fingerprint, *fp});
          if (it != seen.end()) {
            children.push_back(it->second);
            continue;
          }
        }
        if (oracle.nodes_.size() >= limits.max_nodes) {
          complete = false;
          break;
        }
        const FeatureSet parent_obs = oracle.nodes_[p.node].observation;
        const std::size_t c = add_node(p.node, a, depth + 1, &parent_obs,
                                       sim.screen(), fill.outcome.terminal);
        if (fp && p.fingerprint) seen.emplace(std::make_pair(*p.fingerprint, *fp), c);
        children.push_back(c);
        if (!fill.outcome.terminal) {
          next.push_back({c, sim.save(), sim.screen(), fp});
        }
      }
      if (!complete) break;
      oracle.nodes_[p.node].children = std::move(children);
    }
    if (!complete) break;
    ++depth;
    layer = std::move(next);
  }
  oracle.capped_ = !complete;
  // Layers 0..depth are fully generated in both cases; a cut-short layer
  // depth + 1 is never trusted.
  oracle.complete_depth_ = depth;
  sim.restore(start);
  return oracle;
}

}  // namespace iwpix
