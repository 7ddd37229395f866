#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace iwpix {

using ColorId = std::uint8_t;

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Row-major grid of palette indices.
class Screen {
 public:
  Screen() = default;
  /// Filled with `fill`. Throws std::invalid_argument on zero dimensions,
  /// a palette outside [1, 256], or a fill color outside the palette.
  Screen(int width, int height, int palette_size, ColorId fill = 0);
  /// Throws std::invalid_argument if the pixel count or any color is invalid.
  Screen(int width, int height, int palette_size, std::vector<ColorId> pixels);

  int width() const { return width_; }
  int height() const { return height_; }
  int palette_size() const { return palette_size_; }
  std::size_t pixel_count() const { return pixels_.size(); }

  ColorId at(int x, int y) const { return pixels_[index(x, y)]; }
  void set(int x, int y, ColorId c);
  std::span<const ColorId> pixels() const { return pixels_; }

  friend bool operator==(const Screen&, const Screen&) = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  int palette_size_ = 0;
  std::vector<ColorId> pixels_;
};

/// Partition of a screen into equal rectangular tiles.
struct TilingConfig {
  int tile_cols = 0;
  int tile_rows = 0;
  int tile_w = 0;
  int tile_h = 0;

  /// 16 columns by 14 rows of 10x15-pixel tiles over a 160x210 screen.
  static TilingConfig atari() { return {16, 14, 10, 15}; }
  /// Tiles of the given size covering a width x height screen exactly.
  /// Throws std::invalid_argument if the sizes do not divide.
  static TilingConfig covering(int width, int height, int tile_w, int tile_h);

  int screen_width() const { return tile_cols * tile_w; }
  int screen_height() const { return tile_rows * tile_h; }
  /// Throws std::invalid_argument unless the tiling exactly covers `screen`.
  void check(const Screen& screen) const;

  friend bool operator==(const TilingConfig&, const TilingConfig&) = default;
};

// Screen file format, version 1. A file holds one or more records back to
// back; each record is
//
//   offset  size  field
//   0       3     magic "PXS"
//   3       1     version (0x01)
//   4       2     width, little-endian u16
//   6       2     height, little-endian u16
//   8       2     palette_size, little-endian u16 (1..256)
//   10      w*h   pixels, row-major, one byte per pixel, each < palette_size
inline constexpr std::uint8_t kScreenFormatVersion = 1;

void write_screen(std::ostream& out, const Screen& screen);
/// Reads every record until end of stream. Throws FormatError on a bad
/// magic, an unknown version, truncation, or an out-of-palette pixel.
std::vector<Screen> read_screens(std::istream& in);
std::vector<Screen> read_screen_file(const std::string& path);
void write_screen_file(const std::string& path, std::span<const Screen> screens);

}  // namespace iwpix
