#include "iwpix/featurizer.hpp"

#include <sstream>

namespace iwpix {

FeatureFamilies FeatureFamilies::parse(const std::string& text) {
  if (text == "bprost" || text == "all") return all();
  FeatureFamilies f{false, false, false};
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, '+')) {
    if (part == "basic") {
      f.basic = true;
    } else if (part == "bpros") {
      f.bpros = true;
    } else if (part == "bprot") {
      f.bprot = true;
    } else {
      throw std::invalid_argument("unknown feature family: " + part);
    }
  }
  if (!f.basic && !f.bpros && !f.bprot) {
    throw std::invalid_argument("no feature family selected");
  }
  return f;
}

std::string FeatureFamilies::to_string() const {
  if (basic && bpros && bprot) return "bprost";
  std::string out;
  auto add = [&](bool on, const char* name) {
    if (!on) return;
    if (!out.empty()) out += '+';
    out += name;
  };
  add(basic, "basic");
  add(bpros, "bpros");
  add(bprot, "bprot");
  return out;
}

BprostFeaturizer::BprostFeaturizer(FeatureLayout layout,
                                   const BackgroundMap& background,
                                   FeatureFamilies families)
    : layout_(std::move(layout)), background_(background), families_(families) {}

std::uint64_t BprostFeaturizer::capacity() const {
  if (!families_.bpros && !families_.bprot) return layout_.sizes().basic;
  return layout_.total();
}

FeatureSet BprostFeaturizer::observe(const Screen& screen) const {
  return extract_basic(screen, background_, layout_);
}

FeatureSet BprostFeaturizer::state_features(const FeatureSet* prev,
                                            const FeatureSet& cur) const {
  std::vector<FeatureId> all;
  if (families_.basic) all.assign(cur.begin(), cur.end());
  if (families_.bpros) {
    const FeatureSet pros = extract_bpros(cur, layout_);
    all.insert(all.end(), pros.begin(), pros.end());
  }
  if (families_.bprot && prev != nullptr) {
    const FeatureSet prot = extract_bprot(*prev, cur, layout_);
    all.insert(all.end(), prot.begin(), prot.end());
  }
  return FeatureSet(capacity(), std::move(all));
}

LiftedFeaturizer::LiftedFeaturizer(const Featurizer& base, int k)
    : base_(base), k_(k), capacity_(lifted_capacity(base.capacity(), k)) {}

FeatureSet LiftedFeaturizer::state_features(const FeatureSet* prev,
                                            const FeatureSet& cur) const {
  return lift_conjunctions(base_.state_features(prev, cur), k_);
}

}  // namespace iwpix
