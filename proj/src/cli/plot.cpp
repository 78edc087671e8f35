#include <algorithm>
#include <array>
#include <csetjmp>
#include <cmath>
#include <cstdio>
#include <vector>

#include <png.h>

#include "zonekit/cli.hpp"
#include "zonekit/error.hpp"

namespace zonekit::cli {

namespace {

// Piecewise-linear ramp, dark blue through teal to yellow.
std::array<unsigned char, 3> ramp(double t) {
  static constexpr std::array<std::array<double, 3>, 5> stops{{
      {68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}}};
  t = std::clamp(t, 0.0, 1.0) * (stops.size() - 1);
  const auto i = std::min<std::size_t>(static_cast<std::size_t>(t), stops.size() - 2);
  const double f = t - static_cast<double>(i);
  std::array<unsigned char, 3> c{};
  for (std::size_t k = 0; k < 3; ++k) {
    c[k] = static_cast<unsigned char>(std::lround(stops[i][k] + f * (stops[i + 1][k] - stops[i][k])));
  }
  return c;
}

struct PngWriter {
  std::FILE* file = nullptr;
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngWriter() {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
    if (file) std::fclose(file);
  }
};

}  // namespace

void write_png(const std::string& path, const Surface& surface, double lo, double hi, unsigned scale) {
  if (scale == 0) throw ConfigError("plot scale must be positive");
  const auto stats = summarize(surface);
  if (stats.count == 0) throw DataError("nothing to plot: surface has no values");
  if (!(hi > lo)) {
    lo = stats.min;
    hi = stats.max;
  }
  const double span = hi > lo ? hi - lo : 1.0;
  const auto& g = surface.grid;
  const std::size_t width = g.ncols * scale;
  const std::size_t height = g.nrows * scale;

  std::vector<unsigned char> pixels(width * height * 4, 0);
  for (std::size_t r = 0; r < g.nrows; ++r) {
    for (std::size_t c = 0; c < g.ncols; ++c) {
      const double v = surface[r * g.ncols + c];
      if (is_missing(v)) continue;
      const auto rgb = ramp((v - lo) / span);
      const std::size_t top = (g.nrows - 1 - r) * scale;  // north up
      for (std::size_t dy = 0; dy < scale; ++dy) {
        for (std::size_t dx = 0; dx < scale; ++dx) {
          unsigned char* px = &pixels[((top + dy) * width + c * scale + dx) * 4];
          px[0] = rgb[0];
          px[1] = rgb[1];
          px[2] = rgb[2];
          px[3] = 255;
        }
      }
    }
  }

  PngWriter w;
  w.file = std::fopen(path.c_str(), "wb");
  if (!w.file) throw IoError("cannot write " + path);
  w.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!w.png) throw IoError("libpng initialisation failed");
  w.info = png_create_info_struct(w.png);
  if (!w.info) throw IoError("libpng initialisation failed");
  if (setjmp(png_jmpbuf(w.png))) throw IoError("PNG encoding failed for " + path);
  png_init_io(w.png, w.file);
  png_set_IHDR(w.png, w.info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
               PNG_COLOR_TYPE_RGBA, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(w.png, w.info);
  for (std::size_t y = 0; y < height; ++y) png_write_row(w.png, &pixels[y * width * 4]);
  png_write_end(w.png, nullptr);
}

}  // namespace zonekit::cli
