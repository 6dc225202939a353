#include "hrlc/render.hpp"

#include <cmath>
#include <string>

#include "hrlc/error.hpp"

namespace hrlc {

namespace {

std::uint8_t to_byte(double c) { return static_cast<std::uint8_t>(std::floor(c * 255.0 + 0.5)); }

Rgb hsv_to_rgb(double h, double s, double v) {
  const double h6 = h * 6.0;
  const int sector = static_cast<int>(std::floor(h6)) % 6;
  const double f = h6 - std::floor(h6);
  const double p = v * (1.0 - s);
  const double q = v * (1.0 - s * f);
  const double t = v * (1.0 - s * (1.0 - f));
  double r = v, g = t, b = p;
  switch (sector) {
    case 0: r = v; g = t; b = p; break;
    case 1: r = q; g = v; b = p; break;
    case 2: r = p; g = v; b = t; break;
    case 3: r = p; g = q; b = v; break;
    case 4: r = t; g = p; b = v; break;
    default: r = v; g = p; b = q; break;
  }
  return {to_byte(r), to_byte(g), to_byte(b)};
}

constexpr std::size_t kSeparator = 2;

}  // namespace

Palette make_palette(std::size_t n) {
  if (n < 1) throw RangeError("make_palette: need at least one color");
  Palette palette;
  palette.colors.reserve(n);
  palette.colors.push_back(kReservedColor);
  for (std::size_t i = 1; i < n; ++i) {
    const double scaled = static_cast<double>(i) * 0.6180339887;
    palette.colors.push_back(hsv_to_rgb(scaled - std::floor(scaled), 0.70, 0.95));
  }
  return palette;
}

RgbImage render_labels(const LabelGrid& map, const Palette& palette) {
  RgbImage image(map.height, map.width);
  for (std::size_t i = 0; i < map.values.size(); ++i) {
    const auto label = map.values[i];
    if (label >= palette.size()) {
      throw RangeError("render_labels: label " + std::to_string(label) + " outside a palette of " +
                       std::to_string(palette.size()) + " colors");
    }
    image.values[i] = palette.colors[label];
  }
  return image;
}

void render_labels(const LabelGrid& map, const Palette& palette, const std::filesystem::path& path) {
  write_rgb_png(render_labels(map, palette), path);
}

RgbImage contact_sheet(std::span<const RgbImage> frames) {
  if (frames.empty()) throw RangeError("contact_sheet: no frames");
  const std::size_t height = frames.front().height;
  std::size_t width = 0;
  for (const auto& f : frames) {
    if (f.height != height) throw ShapeError("contact_sheet: frame heights differ");
    width += f.width;
  }
  width += kSeparator * (frames.size() - 1);

  RgbImage sheet(height, width, Rgb{0, 0, 0});
  std::size_t x0 = 0;
  for (const auto& f : frames) {
    for (std::size_t y = 0; y < height; ++y) {
      for (std::size_t x = 0; x < f.width; ++x) sheet.at(y, x0 + x) = f.at(y, x);
    }
    x0 += f.width + kSeparator;
  }
  return sheet;
}

}  // namespace hrlc
