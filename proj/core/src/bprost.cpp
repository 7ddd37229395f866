#include "iwpix/bprost.hpp"

#include <algorithm>
#include <bit>
#include <random>
#include <string>

namespace iwpix {

namespace {

struct BasicAtom {
  int row;
  int col;
  int color;
};

// Gathers ids from [lo, hi) with repeats. Large pair sets go through a
// bitmap over the range instead of a sort.
class IdCollector {
 public:
  IdCollector(FeatureId lo, FeatureId hi, std::uint64_t expected)
      : lo_(lo), dense_(expected > (hi - lo) / 64) {
    if (dense_) {
      bits_.assign((hi - lo + 63) / 64, 0);
    } else {
      ids_.reserve(expected);
    }
  }

  void add(FeatureId f) {
    if (dense_) {
      const FeatureId i = f - lo_;
      bits_[i / 64] |= std::uint64_t{1} << (i % 64);
    } else {
      ids_.push_back(f);
    }
  }

  std::vector<FeatureId> finish() {
    if (!dense_) {
      std::sort(ids_.begin(), ids_.end());
      ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
      return std::move(ids_);
    }
    std::vector<FeatureId> out;
    for (std::size_t w = 0; w < bits_.size(); ++w) {
      for (std::uint64_t word = bits_[w]; word != 0; word &= word - 1) {
        out.push_back(lo_ + w * 64 + static_cast<FeatureId>(std::countr_zero(word)));
      }
    }
    return out;
  }

 private:
  FeatureId lo_;
  bool dense_;
  std::vector<std::uint64_t> bits_;
  std::vector<FeatureId> ids_;
};

std::vector<BasicAtom> atoms_of(const FeatureSet& basic,
                                const FeatureLayout& layout) {
  const auto& t = layout.tiling();
  const auto p = static_cast<FeatureId>(layout.palette_size());
  const auto cols = static_cast<FeatureId>(t.tile_cols);
  std::vector<BasicAtom> atoms;
  atoms.reserve(basic.size());
  for (FeatureId f : basic) {
    if (f >= layout.sizes().basic) {
      throw std::invalid_argument("expected a Basic feature, got index " +
                                  std::to_string(f));
    }
    const FeatureId tile = f / p;
    atoms.push_back({static_cast<int>(tile / cols), static_cast<int>(tile % cols),
                     static_cast<int>(f % p)});
  }
  return atoms;
}

}  // namespace

LayoutSizes layout_sizes(const TilingConfig& tiling, int palette_size) {
  if (tiling.tile_cols <= 0 || tiling.tile_rows <= 0 || palette_size <= 0) {
    throw std::invalid_argument("layout needs a positive tiling and palette");
  }
  const std::uint64_t p = static_cast<std::uint64_t>(palette_size);
  const std::uint64_t v = 2 * static_cast<std::uint64_t>(tiling.tile_rows) - 1;
  const std::uint64_t h = 2 * static_cast<std::uint64_t>(tiling.tile_cols) - 1;
  LayoutSizes s;
  s.basic = static_cast<std::uint64_t>(tiling.tile_cols) *
            static_cast<std::uint64_t>(tiling.tile_rows) * p;
  s.bprot = v * h * p * p;
  s.bpros = (v * h * p * p - p) / 2 + p;
  s.total = s.basic + s.bpros + s.bprot;
  return s;
}

FeatureLayout::FeatureLayout(TilingConfig tiling, int palette_size)
    : tiling_(tiling),
      palette_(palette_size),
      sizes_(layout_sizes(tiling, palette_size)) {
  offsets_ = static_cast<std::uint64_t>(offset_rows()) *
             static_cast<std::uint64_t>(offset_cols());
  self_offsets_ = (offsets_ + 1) / 2;
}

void FeatureLayout::check_color(int c) const {
  if (c < 0 || c >= palette_) {
    throw std::out_of_range("color " + std::to_string(c) + " outside palette");
  }
}

int FeatureLayout::offset_index(int d_row, int d_col) const {
  const int r = tiling_.tile_rows - 1;
  const int c = tiling_.tile_cols - 1;
  if (d_row < -r || d_row > r || d_col < -c || d_col > c) {
    throw std::out_of_range("tile offset outside the screen");
  }
  return (d_row + r) * offset_cols() + (d_col + c);
}

FeatureId FeatureLayout::basic(int row, int col, int color) const {
  if (row < 0 || row >= tiling_.tile_rows || col < 0 ||
      col >= tiling_.tile_cols) {
    throw std::out_of_range("tile outside the tiling");
  }
  check_color(color);
  return (static_cast<FeatureId>(row) * tiling_.tile_cols + col) * palette_ +
         color;
}

FeatureId FeatureLayout::bpros(int d_row, int d_col, int color,
                               int color2) const {
  check_color(color);
  check_color(color2);
  if (color > color2) {
    std::swap(color, color2);
    d_row = -d_row;
    d_col = -d_col;
  }
  FeatureId l = static_cast<FeatureId>(offset_index(d_row, d_col));
  const FeatureId center = (offsets_ - 1) / 2;
  FeatureId local;
  if (color == color2) {
    if (l < center) l = offsets_ - 1 - l;
    local = static_cast<FeatureId>(color) * self_offsets_ + (l - center);
  } else {
    const auto p = static_cast<FeatureId>(palette_);
    const auto c = static_cast<FeatureId>(color);
    const FeatureId rank = c * p - c * (c + 1) / 2 +
                           (static_cast<FeatureId>(color2) - c - 1);
    local = p * self_offsets_ + rank * offsets_ + l;
  }
  return sizes_.basic + local;
}

FeatureId FeatureLayout::bprot(int d_row, int d_col, int prev_color,
                               int cur_color) const {
  check_color(prev_color);
  check_color(cur_color);
  const auto p = static_cast<FeatureId>(palette_);
  const auto l = static_cast<FeatureId>(offset_index(d_row, d_col));
  return sizes_.basic + sizes_.bpros +
         (l * p + static_cast<FeatureId>(prev_color)) * p +
         static_cast<FeatureId>(cur_color);
}

FeatureId FeatureLayout::encode(const BprostParams& p) const {
  switch (p.family) {
    case FeatureFamily::kBasic:
      return basic(p.row, p.col, p.color);
    case FeatureFamily::kBpros:
      return bpros(p.d_row, p.d_col, p.color, p.color2);
    case FeatureFamily::kBprot:
      return bprot(p.d_row, p.d_col, p.color, p.color2);
  }
  throw std::invalid_argument("unknown feature family");
}

FeatureFamily FeatureLayout::family_of(FeatureId index) const {
  if (index >= sizes_.total) {
    throw CapacityError("feature index outside the B-PROST space");
  }
  if (index < sizes_.basic) return FeatureFamily::kBasic;
  if (index < sizes_.basic + sizes_.bpros) return FeatureFamily::kBpros;
  return FeatureFamily::kBprot;
}

BprostParams FeatureLayout::decode(FeatureId index) const {
  const FeatureFamily family = family_of(index);
  const auto p = static_cast<FeatureId>(palette_);
  const auto h = static_cast<FeatureId>(offset_cols());
  BprostParams out;
  out.family = family;
  auto set_offset = [&](FeatureId l) {
    out.d_row = static_cast<int>(l / h) - (tiling_.tile_rows - 1);
    out.d_col = static_cast<int>(l % h) - (tiling_.tile_cols - 1);
  };
  switch (family) {
    case FeatureFamily::kBasic: {
      const FeatureId tile = index / p;
      out.color = static_cast<int>(index % p);
      out.row = static_cast<int>(tile / static_cast<FeatureId>(tiling_.tile_cols));
      out.col = static_cast<int>(tile % static_cast<FeatureId>(tiling_.tile_cols));
      break;
    }
    case FeatureFamily::kBpros: {
      const FeatureId local = index - sizes_.basic;
      if (local < p * self_offsets_) {
        out.color = out.color2 = static_cast<int>(local / self_offsets_);
        set_offset((offsets_ - 1) / 2 + local % self_offsets_);
      } else {
        const FeatureId rem = local - p * self_offsets_;
        FeatureId rank = rem / offsets_;
        set_offset(rem % offsets_);
        FeatureId c = 0;
        while (rank >= p - 1 - c) {
          rank -= p - 1 - c;
          ++c;
        }
        out.color = static_cast<int>(c);
        out.color2 = static_cast<int>(c + 1 + rank);
      }
      break;
    }
    case FeatureFamily::kBprot: {
      const FeatureId local = index - sizes_.basic - sizes_.bpros;
      out.color2 = static_cast<int>(local % p);
      out.color = static_cast<int>((local / p) % p);
      set_offset(local / (p * p));
      break;
    }
  }
  return out;
}

BackgroundMap::BackgroundMap(int width, int height, std::vector<ColorId> stored,
                             std::vector<bool> background)
    : width_(width),
      height_(height),
      stored_(std::move(stored)),
      background_(std::move(background)) {}

BackgroundMap::BackgroundMap(const Screen& first)
    : BackgroundMap(first.width(), first.height(),
                    {first.pixels().begin(), first.pixels().end()},
                    std::vector<bool>(first.pixel_count(), true)) {}

BackgroundMap BackgroundMap::uniform(int width, int height, ColorId color) {
  const auto n = static_cast<std::size_t>(width) * height;
  return BackgroundMap(width, height, std::vector<ColorId>(n, color),
                       std::vector<bool>(n, true));
}

BackgroundMap BackgroundMap::none(int width, int height) {
  const auto n = static_cast<std::size_t>(width) * height;
  return BackgroundMap(width, height, std::vector<ColorId>(n, 0),
                       std::vector<bool>(n, false));
}

std::size_t BackgroundMap::background_count() const {
  return static_cast<std::size_t>(
      std::count(background_.begin(), background_.end(), true));
}

std::size_t BackgroundMap::update(const Screen& screen) {
  if (screen.width() != width_ || screen.height() != height_) {
    throw std::invalid_argument("background map and screen sizes differ");
  }
  const auto px = screen.pixels();
  std::size_t changed = 0;
  for (std::size_t i = 0; i < px.size(); ++i) {
    if (background_[i] && px[i] != stored_[i]) {
      background_[i] = false;
      ++changed;
    }
  }
  return changed;
}

FeatureSet extract_basic(const Screen& screen, const BackgroundMap& bg,
                         const FeatureLayout& layout) {
  const auto& t = layout.tiling();
  t.check(screen);
  if (bg.width() != screen.width() || bg.height() != screen.height()) {
    throw std::invalid_argument("background map and screen sizes differ");
  }
  if (screen.palette_size() > layout.palette_size()) {
    throw std::invalid_argument("screen palette exceeds layout palette");
  }
  const int p = layout.palette_size();
  std::vector<bool> seen(layout.sizes().basic, false);
  const auto px = screen.pixels();
  std::size_t i = 0;
  for (int y = 0; y < screen.height(); ++y) {
    const int row = y / t.tile_h;
    for (int x = 0; x < screen.width(); ++x, ++i) {
      if (bg.masks(i, px[i])) continue;
      const int col = x / t.tile_w;
      seen[(static_cast<std::size_t>(row) * t.tile_cols + col) * p + px[i]] =
          true;
    }
  }
  std::vector<FeatureId> members;
  for (std::size_t f = 0; f < seen.size(); ++f) {
    if (seen[f]) members.push_back(f);
  }
  return FeatureSet(layout.total(), std::move(members));
}

FeatureSet extract_bpros(const FeatureSet& basic, const FeatureLayout& layout) {
  const auto atoms = atoms_of(basic, layout);
  const auto& sz = layout.sizes();
  IdCollector out(sz.basic, sz.basic + sz.bpros,
                  atoms.size() * (atoms.size() + 1) / 2);
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    for (std::size_t j = i; j < atoms.size(); ++j) {
      out.add(layout.bpros(atoms[j].row - atoms[i].row,
                           atoms[j].col - atoms[i].col, atoms[i].color,
                           atoms[j].color));
    }
  }
  return FeatureSet::from_sorted(layout.total(), out.finish());
}

FeatureSet extract_bprot(const FeatureSet& prev_basic,
                         const FeatureSet& cur_basic,
                         const FeatureLayout& layout) {
  const auto prev = atoms_of(prev_basic, layout);
  const auto cur = atoms_of(cur_basic, layout);
  const auto& sz = layout.sizes();
  IdCollector out(sz.basic + sz.bpros, sz.total, prev.size() * cur.size());
  for (const auto& a : prev) {
    for (const auto& b : cur) {
      out.add(layout.bprot(b.row - a.row, b.col - a.col, a.color, b.color));
    }
  }
  return FeatureSet::from_sorted(layout.total(), out.finish());
}

FeatureSet bprost_from_basic(const FeatureSet* prev_basic,
                             const FeatureSet& cur_basic,
                             const FeatureLayout& layout) {
  const FeatureSet pros = extract_bpros(cur_basic, layout);
  std::vector<FeatureId> all(cur_basic.begin(), cur_basic.end());
  all.insert(all.end(), pros.begin(), pros.end());
  if (prev_basic != nullptr) {
    const FeatureSet prot = extract_bprot(*prev_basic, cur_basic, layout);
    all.insert(all.end(), prot.begin(), prot.end());
  }
  // The three families occupy consecutive id ranges.
  return FeatureSet::from_sorted(layout.total(), std::move(all));
}

FeatureSet extract_bprost(const Screen* prev, const Screen& cur,
                          const BackgroundMap& bg,
                          const FeatureLayout& layout) {
  const FeatureSet cur_basic = extract_basic(cur, bg, layout);
  if (prev == nullptr) return bprost_from_basic(nullptr, cur_basic, layout);
  const FeatureSet prev_basic = extract_basic(*prev, bg, layout);
  return bprost_from_basic(&prev_basic, cur_basic, layout);
}

BackgroundMap calibrate_background(Simulator& sim, int n_actions,
                                   std::uint64_t seed, int frames_per_action) {
  if (n_actions < 0) throw std::invalid_argument("negative calibration length");
  const StateHandle start = sim.save();
  BackgroundMap bg(sim.screen());
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Action> pick(0, sim.action_count() - 1);
  for (int i = 0; i < n_actions; ++i) {
    if (sim.terminal()) sim.restore(start);
    sim.apply(pick(rng), frames_per_action);
    bg.update(sim.screen());
  }
  sim.restore(start);
  return bg;
}

}  // namespace iwpix
