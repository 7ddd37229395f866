#pragma once

// Boolean feature sets and the novelty bookkeeping shared by every width-based
// planner: first-reach marks for IW, minimum-depth tables for Rollout IW,
// per-partition tables for IW_G / IW_S, and k-conjunction lifting.

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <map>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace iwpix {

using FeatureId = std::uint64_t;
using Depth = std::uint32_t;

/// Reserved "unreached" depth. Strictly greater than any depth a rollout can
/// produce, since rollout length is bounded by the feature-space size and
/// feature spaces handled by depth tables stay below 2^32 - 1.
inline constexpr Depth kInfiniteDepth = std::numeric_limits<Depth>::max();

class CapacityError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Immutable sorted set of feature indices over a space of `capacity` features.
class FeatureSet {
 public:
  FeatureSet() = default;
  explicit FeatureSet(std::uint64_t capacity) : capacity_(capacity) {}
  /// Sorts and deduplicates `members`. Throws CapacityError if any member is
  /// not below `capacity`.
  FeatureSet(std::uint64_t capacity, std::vector<FeatureId> members);
  FeatureSet(std::uint64_t capacity, std::initializer_list<FeatureId> members)
      : FeatureSet(capacity, std::vector<FeatureId>(members)) {}
  /// Takes members that are already strictly increasing; checked in O(n).
  static FeatureSet from_sorted(std::uint64_t capacity,
                                std::vector<FeatureId> members);

  std::uint64_t capacity() const { return capacity_; }
  std::size_t size() const { return members_.size(); }
  bool empty() const { return members_.empty(); }
  bool contains(FeatureId f) const;

  std::span<const FeatureId> members() const { return members_; }
  auto begin() const { return members_.begin(); }
  auto end() const { return members_.end(); }

  friend bool operator==(const FeatureSet&, const FeatureSet&) = default;

 private:
  std::uint64_t capacity_ = 0;
  std::vector<FeatureId> members_;
};

/// Union of sets over the same space.
FeatureSet merge(const FeatureSet& a, const FeatureSet& b);

struct NoveltyResult {
  bool novel = false;
  std::size_t newly_marked = 0;

  friend bool operator==(const NoveltyResult&, const NoveltyResult&) = default;
};

/// Per-feature "reached" marks. Marks are never cleared.
///
/// Dense bit storage for spaces up to kDenseLimit features (this covers the
/// 20.6M B-PROST space at ~2.6MB); a hash set beyond that, which is what
/// lifted IW(k) tables need.
class NoveltyTable {
 public:
  static constexpr std::uint64_t kDenseLimit = std::uint64_t{1} << 28;

  explicit NoveltyTable(std::uint64_t capacity);

  std::uint64_t capacity() const { return capacity_; }
  bool is_marked(FeatureId f) const;
  std::size_t marked_count() const { return marked_; }

  /// Marks every member of `s`; novel iff at least one was unmarked before.
  /// Validates all members before touching the table.
  NoveltyResult mark_and_test(const FeatureSet& s);

 private:
  std::uint64_t capacity_;
  std::size_t marked_ = 0;
  std::vector<std::uint64_t> bits_;
  std::unordered_set<FeatureId> sparse_;
  bool dense_;
};

/// Minimum depth at which each feature has been reached, kInfiniteDepth when
/// unreached. Dense array for small spaces, hash map otherwise, so per-state
/// cost stays O(active features) on the B-PROST space.
class DepthTable {
 public:
  static constexpr std::uint64_t kDenseLimit = std::uint64_t{1} << 22;

  explicit DepthTable(std::uint64_t capacity);
  /// Table with the root's features at depth 0 and everything else unreached.
  static DepthTable rooted_at(const FeatureSet& root);

  std::uint64_t capacity() const { return capacity_; }
  Depth at(FeatureId f) const;
  /// Number of features with a finite depth.
  std::size_t reached_count() const { return reached_; }

  /// d[f] := min(d[f], depth) for f in s. Returns the features whose value
  /// strictly decreased, in ascending order.
  std::vector<FeatureId> update(const FeatureSet& s, Depth depth);

 private:
  void check(FeatureId f) const;

  std::uint64_t capacity_;
  std::size_t reached_ = 0;
  std::vector<Depth> dense_;
  std::unordered_map<FeatureId, Depth> sparse_;
  bool is_dense_;
};

enum class NoveltyKind { kNovel, kKnown, kStale };

struct NoveltyClass {
  NoveltyKind kind;
  FeatureId feature;

  friend bool operator==(const NoveltyClass&, const NoveltyClass&) = default;
};

/// Get-Novel-Feature: the lowest feature with depth < d[f] (Novel), else the
/// lowest with depth == d[f] (Known), else the lowest member (Stale).
/// Throws std::invalid_argument on an empty set.
NoveltyClass classify_novelty(const FeatureSet& s, Depth depth,
                              const DepthTable& d);

/// Free-function form of DepthTable::update.
inline std::vector<FeatureId> update_depths(DepthTable& d, const FeatureSet& s,
                                            Depth depth) {
  return d.update(s, depth);
}

/// Free-function form of NoveltyTable::mark_and_test.
inline NoveltyResult mark_and_test_novel1(NoveltyTable& table,
                                          const FeatureSet& s) {
  return table.mark_and_test(s);
}

/// Binomial coefficient, saturating at UINT64_MAX.
std::uint64_t binomial(std::uint64_t n, std::uint64_t k);

/// Size of the k-conjunction space over `capacity` features. Throws
/// std::overflow_error if it does not fit in 64 bits.
std::uint64_t lifted_capacity(std::uint64_t capacity, int k);

/// Rank of a strictly increasing k-combination in the combinatorial number
/// system: sum_i C(c_i, i + 1).
FeatureId combination_rank(std::span<const FeatureId> sorted_members);

/// Inverse of combination_rank for a given k.
std::vector<FeatureId> combination_unrank(FeatureId rank, int k);

/// All size-k subsets of `s`, each mapped to its combination rank, as a set
/// over lifted_capacity(s.capacity(), k). k == 1 is the identity; k > |s|
/// yields the empty set. Throws std::invalid_argument for k < 1.
FeatureSet lift_conjunctions(const FeatureSet& s, int k);

/// Novelty tables keyed by an integer partition value (goal count for IW_G,
/// logscore for IW_S). Tables are created on first use.
class PartitionedTable {
 public:
  explicit PartitionedTable(std::uint64_t capacity) : capacity_(capacity) {}

  NoveltyResult mark_and_test(int key, const FeatureSet& s);
  bool has_partition(int key) const { return tables_.contains(key); }
  std::size_t partition_count() const { return tables_.size(); }
  std::vector<int> keys() const;

 private:
  std::uint64_t capacity_;
  std::map<int, NoveltyTable> tables_;
};

inline NoveltyResult partition_mark_and_test(PartitionedTable& pt, int key,
                                             const FeatureSet& s) {
  return pt.mark_and_test(key, s);
}

}  // namespace iwpix
