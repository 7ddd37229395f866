#pragma once

#include <cstdint>
#include <memory>

#include "iwpix/bprost.hpp"
#include "iwpix/features.hpp"
#include "iwpix/screen.hpp"

namespace iwpix {

/// Maps screens to planner features in two stages: a per-screen
/// observation, and the state features of a node given its parent's
/// observation (which is what makes non-Markovian features possible).
class Featurizer {
 public:
  virtual ~Featurizer() = default;

  virtual std::uint64_t capacity() const = 0;
  virtual FeatureSet observe(const Screen& screen) const = 0;
  /// `prev` is null when there is no previous decision point.
  virtual FeatureSet state_features(const FeatureSet* prev,
                                    const FeatureSet& cur) const = 0;
};

struct FeatureFamilies {
  bool basic = true;
  bool bpros = true;
  bool bprot = true;

  static FeatureFamilies all() { return {}; }
  static FeatureFamilies basic_only() { return {true, false, false}; }
  /// Parses "bprost", "basic", or a '+'-joined list like "basic+bpros".
  static FeatureFamilies parse(const std::string& text);
  std::string to_string() const;
};

/// B-PROST (or a subset of its families) over a background-masked screen.
/// Observations are Basic sets. Holds a reference to the background map,
/// which the caller may keep updating between decisions.
class BprostFeaturizer final : public Featurizer {
 public:
  BprostFeaturizer(FeatureLayout layout, const BackgroundMap& background,
                   FeatureFamilies families = FeatureFamilies::all());

  const FeatureLayout& layout() const { return layout_; }
  /// The full layout size, or the Basic size when only Basic is enabled.
  std::uint64_t capacity() const override;
  FeatureSet observe(const Screen& screen) const override;
  FeatureSet state_features(const FeatureSet* prev,
                            const FeatureSet& cur) const override;

 private:
  FeatureLayout layout_;
  const BackgroundMap& background_;
  FeatureFamilies families_;
};

/// Replaces every state feature set by its k-conjunctions.
class LiftedFeaturizer final : public Featurizer {
 public:
  LiftedFeaturizer(const Featurizer& base, int k);

  std::uint64_t capacity() const override { return capacity_; }
  FeatureSet observe(const Screen& screen) const override {
    return base_.observe(screen);
  }
  FeatureSet state_features(const FeatureSet* prev,
                            const FeatureSet& cur) const override;

 private:
  const Featurizer& base_;
  int k_;
  std::uint64_t capacity_;
};

}  // namespace iwpix
