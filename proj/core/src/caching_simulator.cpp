#include "iwpix/caching_simulator.hpp"

namespace iwpix {

FillResult fill_with_extension(Simulator& sim, const Screen& parent_screen,
                               Action action, const FillPolicy& policy,
                               const std::function<bool()>& may_call) {
  FillResult result;
  result.outcome = sim.apply(action, policy.frameskip);
  result.applications = 1;
  if (!policy.extend_on_no_change || result.outcome.terminal ||
      result.outcome.reward != 0.0) {
    return result;
  }
  const bool unchanged = policy.same_observation
                             ? policy.same_observation(parent_screen, sim.screen())
                             : parent_screen == sim.screen();
  if (!unchanged) return result;
  if (may_call && !may_call()) {
    result.refused = true;
    return result;
  }
  result.outcome += sim.apply(action, policy.frameskip);
  result.applications = 2;
  return result;
}

CachingSimulator::CachingSimulator(Simulator& inner, FillPolicy policy)
    : inner_(inner), policy_(std::move(policy)), root_(snapshot_inner()) {}

std::unique_ptr<CachingSimulator::Entry> CachingSimulator::snapshot_inner()
    const {
  auto e = std::make_unique<Entry>();
  e->record.screen = inner_.screen();
  e->record.handle = inner_.save();
  e->record.fingerprint = inner_.fingerprint();
  e->record.outcome.terminal = inner_.terminal();
  return e;
}

std::optional<CachedStep> CachingSimulator::cached_apply(
    std::span<const Action> path) {
  Entry* e = root_.get();
  std::size_t i = 0;
  while (i < path.size()) {
    auto it = e->children.find(path[i]);
    if (it == e->children.end()) break;
    e = it->second.get();
    ++i;
  }
  if (i == path.size()) {
    ++hits_;
    return CachedStep{&e->record, true, 0};
  }
  ++misses_;
  CachedStep step;
  inner_.restore(e->record.handle);
  for (; i < path.size(); ++i) {
    if (gate_ && !gate_()) return std::nullopt;
    const std::uint64_t before = inner_.calls();
    FillResult fill =
        fill_with_extension(inner_, e->record.screen, path[i], policy_, gate_);
    step.inner_calls += inner_.calls() - before;
    // A half-extended edge is not the edge; leave it uncached.
    if (fill.refused) return std::nullopt;
    auto child = snapshot_inner();
    child->record.outcome = fill.outcome;
    child->record.applications = fill.applications;
    Entry* next = child.get();
    e->children[path[i]] = std::move(child);
    e = next;
  }
  step.record = &e->record;
  return step;
}

bool CachingSimulator::contains(std::span<const Action> path) const {
  const Entry* e = root_.get();
  for (Action a : path) {
    auto it = e->children.find(a);
    if (it == e->children.end()) return false;
    e = it->second.get();
  }
  return true;
}

void CachingSimulator::advance_root(Action executed) {
  auto it = root_->children.find(executed);
  if (it == root_->children.end()) {
    reset_root();
    return;
  }
  std::unique_ptr<Entry> next = std::move(it->second);
  next->record.outcome = StepOutcome{.terminal = next->record.outcome.terminal};
  next->record.applications = 0;
  root_ = std::move(next);
  hits_ = misses_ = 0;
}

void CachingSimulator::reset_root() {
  root_ = snapshot_inner();
  hits_ = misses_ = 0;
}

std::size_t CachingSimulator::record_count() const {
  std::size_t n = 0;
  std::vector<const Entry*> stack{root_.get()};
  while (!stack.empty()) {
    const Entry* e = stack.back();
    stack.pop_back();
    for (const auto& [a, child] : e->children) {
      ++n;
      stack.push_back(child.get());
    }
  }
  return n;
}

}  // namespace iwpix
