#pragma once

// B-PROST visual features over tiled screens.
//
// Index layout (all ranges contiguous and disjoint, in this order):
//
//   Basic   [0, B)            tile (row, col) holds color c
//   B-PROS  [B, B + S)        same-screen offset between two basic features
//   B-PROT  [B + S, total)    offset from a previous-screen basic feature to a
//                             current-screen one
//
// With R tile rows, C tile columns and p colors, offsets range over
// dr in [-(R-1), R-1] (V = 2R-1 values) and dc in [-(C-1), C-1]
// (H = 2C-1 values). For the Atari tiling, V = 27 runs along the 14-row axis
// and H = 31 along the 16-column axis. Offsets are linearized as
// L = (dr + R-1) * H + (dc + C-1), so L lies in [0, V*H) and L = (V*H-1)/2 is
// the zero offset.
//
//   Basic index   = (row * C + col) * p + c
//   B-PROT local  = (L * p + c_prev) * p + c_cur              (V*H*p^2 values)
//   B-PROS local  = canonical pair (dr, dc, c, c'):
//     c == c'   the offset with L >= (V*H-1)/2 is kept;
//               local = c * ((V*H+1)/2) + (L - (V*H-1)/2)
//     c <  c'   local = p*(V*H+1)/2 + rank(c, c') * V*H + L
//     c >  c'   stored as (-dr, -dc, c', c)
//   where rank enumerates unordered color pairs c < c' lexicographically. This
//   gives S = (V*H*p^2 - p)/2 + p features.

#include <cstdint>
#include <optional>
#include <vector>

#include "iwpix/features.hpp"
#include "iwpix/screen.hpp"
#include "iwpix/simulator.hpp"

namespace iwpix {

enum class FeatureFamily { kBasic, kBpros, kBprot };

struct LayoutSizes {
  std::uint64_t basic = 0;
  std::uint64_t bpros = 0;
  std::uint64_t bprot = 0;
  std::uint64_t total = 0;

  friend bool operator==(const LayoutSizes&, const LayoutSizes&) = default;
};

/// A B-PROST feature in parameter form. For Basic features only
/// (row, col, color) are meaningful; for pair features (row, col) is unused
/// and (d_row, d_col) is the offset from the `color` tile to the `color2`
/// tile.
struct BprostParams {
  FeatureFamily family = FeatureFamily::kBasic;
  int row = 0;
  int col = 0;
  int color = 0;
  int d_row = 0;
  int d_col = 0;
  int color2 = 0;

  friend bool operator==(const BprostParams&, const BprostParams&) = default;
};

/// Bijection between B-PROST feature parameters and global indices for one
/// tiling and palette size.
class FeatureLayout {
 public:
  FeatureLayout(TilingConfig tiling, int palette_size);

  const TilingConfig& tiling() const { return tiling_; }
  int palette_size() const { return palette_; }
  const LayoutSizes& sizes() const { return sizes_; }
  std::uint64_t total() const { return sizes_.total; }
  int offset_rows() const { return 2 * tiling_.tile_rows - 1; }
  int offset_cols() const { return 2 * tiling_.tile_cols - 1; }

  FeatureId basic(int row, int col, int color) const;
  /// Canonicalizes the pair; bpros(dr, dc, c, c') == bpros(-dr, -dc, c', c).
  FeatureId bpros(int d_row, int d_col, int color, int color2) const;
  FeatureId bprot(int d_row, int d_col, int prev_color, int cur_color) const;

  FeatureId encode(const BprostParams& p) const;
  /// B-PROS features decode to their canonical form.
  BprostParams decode(FeatureId index) const;
  FeatureFamily family_of(FeatureId index) const;

 private:
  int offset_index(int d_row, int d_col) const;
  void check_color(int c) const;

  TilingConfig tiling_;
  int palette_;
  LayoutSizes sizes_;
  std::uint64_t offsets_;       // V * H
  std::uint64_t self_offsets_;  // (V * H + 1) / 2
};

/// Basic / B-PROS / B-PROT counts for a tiling and palette.
LayoutSizes layout_sizes(const TilingConfig& tiling, int palette_size);

/// Per-pixel background status. A pixel is background while it has shown
/// only its stored color; once it deviates it is foreground for good.
class BackgroundMap {
 public:
  /// Every pixel background, stored color taken from `first`.
  explicit BackgroundMap(const Screen& first);
  /// Every pixel background with stored color `color`: masks exactly the
  /// pixels showing that color.
  static BackgroundMap uniform(int width, int height, ColorId color);
  /// No background at all; nothing is masked.
  static BackgroundMap none(int width, int height);

  int width() const { return width_; }
  int height() const { return height_; }
  bool is_background(int x, int y) const { return background_[index(x, y)]; }
  ColorId stored_color(int x, int y) const { return stored_[index(x, y)]; }
  std::size_t background_count() const;

  /// True when the pixel is dropped during extraction: it is background
  /// and currently shows its stored color.
  bool masks(std::size_t pixel, ColorId color) const {
    return background_[pixel] && stored_[pixel] == color;
  }

  /// Marks every pixel whose color differs from its stored color as
  /// foreground. Returns how many pixels flipped in this call.
  std::size_t update(const Screen& screen);

 private:
  BackgroundMap(int width, int height, std::vector<ColorId> stored,
                std::vector<bool> background);
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_;
  int height_;
  std::vector<ColorId> stored_;
  std::vector<bool> background_;
};

inline std::size_t background_update(BackgroundMap& bg, const Screen& screen) {
  return bg.update(screen);
}

/// Basic features of the non-masked pixels.
FeatureSet extract_basic(const Screen& screen, const BackgroundMap& bg,
                         const FeatureLayout& layout);
/// Canonical same-screen offsets between every pair of basic features,
/// including each feature with itself.
FeatureSet extract_bpros(const FeatureSet& basic, const FeatureLayout& layout);
/// Offsets from every previous-screen basic feature to every current one.
FeatureSet extract_bprot(const FeatureSet& prev_basic,
                         const FeatureSet& cur_basic,
                         const FeatureLayout& layout);
/// Basic + B-PROS of `cur` plus B-PROT against `prev`. A missing previous
/// screen contributes no B-PROT features.
FeatureSet extract_bprost(const Screen* prev, const Screen& cur,
                          const BackgroundMap& bg, const FeatureLayout& layout);
/// Same as extract_bprost from already extracted basic sets.
FeatureSet bprost_from_basic(const FeatureSet* prev_basic,
                             const FeatureSet& cur_basic,
                             const FeatureLayout& layout);

/// Observes the start screen and `n_actions` uniformly random actions of
/// `frames_per_action` frames each, then restores the simulator. A pixel is
/// background iff it kept its first color on every observed screen. If the
/// game ends during calibration the simulator is rewound to the start.
BackgroundMap calibrate_background(Simulator& sim, int n_actions,
                                   std::uint64_t seed,
                                   int frames_per_action = 1);

}  // namespace iwpix
