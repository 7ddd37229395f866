#include "iwpix/features.hpp"

#include <algorithm>
#include <functional>
#include <string>

namespace iwpix {

namespace {

[[noreturn]] void throw_capacity(FeatureId f, std::uint64_t capacity) {
  throw CapacityError("feature " + std::to_string(f) +
                      " out of range for capacity " + std::to_string(capacity));
}

}  // namespace

FeatureSet::FeatureSet(std::uint64_t capacity, std::vector<FeatureId> members)
    : capacity_(capacity), members_(std::move(members)) {
  std::sort(members_.begin(), members_.end());
  members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
  if (!members_.empty() && members_.back() >= capacity_) {
    throw_capacity(members_.back(), capacity_);
  }
}

FeatureSet FeatureSet::from_sorted(std::uint64_t capacity,
                                   std::vector<FeatureId> members) {
  if (std::adjacent_find(members.begin(), members.end(),
                         std::greater_equal<FeatureId>()) != members.end()) {
    throw std::invalid_argument("from_sorted: members not strictly increasing");
  }
  if (!members.empty() && members.back() >= capacity) {
    throw_capacity(members.back(), capacity);
  }
  FeatureSet s(capacity);
  s.members_ = std::move(members);
  return s;
}

bool FeatureSet::contains(FeatureId f) const {
  return std::binary_search(members_.begin(), members_.end(), f);
}

FeatureSet merge(const FeatureSet& a, const FeatureSet& b) {
  if (a.capacity() != b.capacity()) {
    throw std::invalid_argument("merge: feature sets over different spaces");
  }
  std::vector<FeatureId> out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(),
                 std::back_inserter(out));
  return FeatureSet(a.capacity(), std::move(out));
}

NoveltyTable::NoveltyTable(std::uint64_t capacity)
    : capacity_(capacity), dense_(capacity <= kDenseLimit) {
  if (dense_) bits_.assign((capacity + 63) / 64, 0);
}

bool NoveltyTable::is_marked(FeatureId f) const {
  if (f >= capacity_) throw_capacity(f, capacity_);
  if (dense_) return (bits_[f >> 6] >> (f & 63)) & 1U;
  return sparse_.contains(f);
}

NoveltyResult NoveltyTable::mark_and_test(const FeatureSet& s) {
  if (!s.empty() && s.members().back() >= capacity_) {
    throw_capacity(s.members().back(), capacity_);
  }
  NoveltyResult result;
  for (FeatureId f : s) {
    bool fresh;
    if (dense_) {
      std::uint64_t& word = bits_[f >> 6];
      const std::uint64_t mask = std::uint64_t{1} << (f & 63);
      fresh = (word & mask) == 0;
      word |= mask;
    } else {
      fresh = sparse_.insert(f).second;
    }
    if (fresh) ++result.newly_marked;
  }
  marked_ += result.newly_marked;
  result.novel = result.newly_marked > 0;
  return result;
}

DepthTable::DepthTable(std::uint64_t capacity)
    : capacity_(capacity), is_dense_(capacity <= kDenseLimit) {
  if (is_dense_) dense_.assign(capacity, kInfiniteDepth);
}

DepthTable DepthTable::rooted_at(const FeatureSet& root) {
  DepthTable d(root.capacity());
  d.update(root, 0);
  return d;
}

void DepthTable::check(FeatureId f) const {
  if (f >= capacity_) throw_capacity(f, capacity_);
}

Depth DepthTable::at(FeatureId f) const {
  check(f);
  if (is_dense_) return dense_[f];
  auto it = sparse_.find(f);
  return it == sparse_.end() ? kInfiniteDepth : it->second;
}

std::vector<FeatureId> DepthTable::update(const FeatureSet& s, Depth depth) {
  if (depth == kInfiniteDepth) {
    throw std::invalid_argument("depth table: depth collides with sentinel");
  }
  if (!s.empty()) check(s.members().back());
  std::vector<FeatureId> improved;
  for (FeatureId f : s) {
    Depth* slot;
    if (is_dense_) {
      slot = &dense_[f];
    } else {
      slot = &sparse_.try_emplace(f, kInfiniteDepth).first->second;
    }
    if (depth < *slot) {
      if (*slot == kInfiniteDepth) ++reached_;
      *slot = depth;
      improved.push_back(f);
    }
  }
  return improved;
}

NoveltyClass classify_novelty(const FeatureSet& s, Depth depth,
                              const DepthTable& d) {
  if (s.empty()) {
    throw std::invalid_argument("classify_novelty: empty feature set");
  }
  // Members are sorted, so the first hit of each kind is the lowest id.
  const FeatureId* known = nullptr;
  for (const FeatureId& f : s) {
    const Depth best = d.at(f);
    if (depth < best) return {NoveltyKind::kNovel, f};
    if (depth == best && known == nullptr) known = &f;
  }
  if (known != nullptr) return {NoveltyKind::kKnown, *known};
  return {NoveltyKind::kStale, s.members().front()};
}

__extension__ using Wide = unsigned __int128;

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  Wide r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    r = r * (n - k + i) / i;
    if (r > std::numeric_limits<std::uint64_t>::max()) {
      return std::numeric_limits<std::uint64_t>::max();
    }
  }
  return static_cast<std::uint64_t>(r);
}

std::uint64_t lifted_capacity(std::uint64_t capacity, int k) {
  if (k < 1) throw std::invalid_argument("conjunction size must be >= 1");
  if (k == 1) return capacity;
  const std::uint64_t c = binomial(capacity, static_cast<std::uint64_t>(k));
  if (c == std::numeric_limits<std::uint64_t>::max()) {
    throw std::overflow_error("lifted feature space exceeds 64-bit indices");
  }
  return c;
}

FeatureId combination_rank(std::span<const FeatureId> sorted_members) {
  FeatureId rank = 0;
  for (std::size_t i = 0; i < sorted_members.size(); ++i) {
    rank += binomial(sorted_members[i], i + 1);
  }
  return rank;
}

std::vector<FeatureId> combination_unrank(FeatureId rank, int k) {
  std::vector<FeatureId> out(static_cast<std::size_t>(k));
  for (int i = k; i >= 1; --i) {
    // Largest c with C(c, i) <= rank; C(c, i) is increasing in c for c >= i-1.
    FeatureId lo = static_cast<FeatureId>(i - 1);
    FeatureId hi = lo + 1;
    while (binomial(hi, i) <= rank) hi *= 2;
    while (hi - lo > 1) {
      const FeatureId mid = lo + (hi - lo) / 2;
      if (binomial(mid, i) <= rank) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    out[static_cast<std::size_t>(i - 1)] = lo;
    rank -= binomial(lo, i);
  }
  return out;
}

FeatureSet lift_conjunctions(const FeatureSet& s, int k) {
  const std::uint64_t capacity = lifted_capacity(s.capacity(), k);
  if (k == 1) return s;
  const auto n = s.size();
  const auto width = static_cast<std::size_t>(k);
  if (width > n) return FeatureSet(capacity);

  std::vector<FeatureId> out;
  out.reserve(binomial(n, width));
  std::vector<std::size_t> pick(width);
  for (std::size_t i = 0; i < width; ++i) pick[i] = i;
  std::vector<FeatureId> tuple(width);
  const auto members = s.members();
  while (true) {
    for (std::size_t i = 0; i < width; ++i) tuple[i] = members[pick[i]];
    out.push_back(combination_rank(tuple));
    std::size_t i = width;
    while (i > 0 && pick[i - 1] == n - width + (i - 1)) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t j = i; j < width; ++j) pick[j] = pick[j - 1] + 1;
  }
  return FeatureSet(capacity, std::move(out));
}

NoveltyResult PartitionedTable::mark_and_test(int key, const FeatureSet& s) {
  auto it = tables_.try_emplace(key, capacity_).first;
  return it->second.mark_and_test(s);
}

std::vector<int> PartitionedTable::keys() const {
  std::vector<int> out;
  out.reserve(tables_.size());
  for (const auto& [key, table] : tables_) out.push_back(key);
  return out;
}

}  // namespace iwpix
