#include "iwpix/screen.hpp"

#include <array>
#include <fstream>

namespace iwpix {

namespace {

void check_dims(int width, int height, int palette_size) {
  if (width <= 0 || height <= 0) {
    throw std::invalid_argument("screen dimensions must be positive");
  }
  if (palette_size < 1 || palette_size > 256) {
    throw std::invalid_argument("palette size must be in [1, 256]");
  }
}

void put_u16(std::ostream& out, int v) {
  const std::array<char, 2> b{static_cast<char>(v & 0xff),
                              static_cast<char>((v >> 8) & 0xff)};
  out.write(b.data(), 2);
}

bool get_u16(std::istream& in, int& v) {
  std::array<unsigned char, 2> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), 2)) return false;
  v = b[0] | (b[1] << 8);
  return true;
}

}  // namespace

Screen::Screen(int width, int height, int palette_size, ColorId fill)
    : width_(width), height_(height), palette_size_(palette_size) {
  check_dims(width, height, palette_size);
  if (fill >= palette_size) {
    throw std::invalid_argument("fill color outside palette");
  }
  pixels_.assign(static_cast<std::size_t>(width) * height, fill);
}

Screen::Screen(int width, int height, int palette_size,
               std::vector<ColorId> pixels)
    : width_(width),
      height_(height),
      palette_size_(palette_size),
      pixels_(std::move(pixels)) {
  check_dims(width, height, palette_size);
  if (pixels_.size() != static_cast<std::size_t>(width) * height) {
    throw std::invalid_argument("pixel count does not match dimensions");
  }
  for (ColorId c : pixels_) {
    if (c >= palette_size) throw std::invalid_argument("pixel outside palette");
  }
}

void Screen::set(int x, int y, ColorId c) {
  if (x < 0 || y < 0 || x >= width_ || y >= height_) {
    throw std::out_of_range("pixel coordinate outside screen");
  }
  if (c >= palette_size_) throw std::invalid_argument("color outside palette");
  pixels_[index(x, y)] = c;
}

TilingConfig TilingConfig::covering(int width, int height, int tile_w,
                                    int tile_h) {
  if (tile_w <= 0 || tile_h <= 0 || width <= 0 || height <= 0 ||
      width % tile_w != 0 || height % tile_h != 0) {
    throw std::invalid_argument("tile size does not divide the screen");
  }
  return {width / tile_w, height / tile_h, tile_w, tile_h};
}

void TilingConfig::check(const Screen& screen) const {
  if (tile_cols <= 0 || tile_rows <= 0 || tile_w <= 0 || tile_h <= 0) {
    throw std::invalid_argument("tiling has non-positive dimensions");
  }
  if (screen.width() != screen_width() || screen.height() != screen_height()) {
    throw std::invalid_argument(
        "screen " + std::to_string(screen.width()) + "x" +
        std::to_string(screen.height()) + " does not match tiling " +
        std::to_string(screen_width()) + "x" + std::to_string(screen_height()));
  }
}

void write_screen(std::ostream& out, const Screen& screen) {
  if (screen.width() > 0xffff || screen.height() > 0xffff) {
    throw FormatError("screen too large for format");
  }
  out.write("PXS", 3);
  out.put(static_cast<char>(kScreenFormatVersion));
  put_u16(out, screen.width());
  put_u16(out, screen.height());
  put_u16(out, screen.palette_size());
  const auto px = screen.pixels();
  out.write(reinterpret_cast<const char*>(px.data()),
            static_cast<std::streamsize>(px.size()));
}

std::vector<Screen> read_screens(std::istream& in) {
  std::vector<Screen> screens;
  while (true) {
    std::array<char, 4> magic{};
    in.read(magic.data(), 4);
    if (in.gcount() == 0) break;
    if (in.gcount() != 4 || magic[0] != 'P' || magic[1] != 'X' ||
        magic[2] != 'S') {
      throw FormatError("bad screen record magic");
    }
    if (static_cast<std::uint8_t>(magic[3]) != kScreenFormatVersion) {
      throw FormatError("unsupported screen format version " +
                        std::to_string(static_cast<unsigned char>(magic[3])));
    }
    int w = 0, h = 0, p = 0;
    if (!get_u16(in, w) || !get_u16(in, h) || !get_u16(in, p)) {
      throw FormatError("truncated screen header");
    }
    if (w == 0 || h == 0 || p < 1 || p > 256) {
      throw FormatError("invalid screen header values");
    }
    std::vector<ColorId> px(static_cast<std::size_t>(w) * h);
    if (!in.read(reinterpret_cast<char*>(px.data()),
                 static_cast<std::streamsize>(px.size()))) {
      throw FormatError("truncated pixel data");
    }
    for (ColorId c : px) {
      if (c >= p) throw FormatError("pixel outside palette");
    }
    screens.emplace_back(w, h, p, std::move(px));
  }
  return screens;
}

std::vector<Screen> read_screen_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open screen file: " + path);
  return read_screens(in);
}

void write_screen_file(const std::string& path,
                       std::span<const Screen> screens) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write screen file: " + path);
  for (const auto& s : screens) write_screen(out, s);
}

}  // namespace iwpix
