#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "hrlc/tensor_io.hpp"

namespace hrlc {

struct Palette {
  std::vector<Rgb> colors;

  std::size_t size() const noexcept { return colors.size(); }
  bool operator==(const Palette&) const = default;
};

inline constexpr Rgb kReservedColor{40, 40, 40};

// Color 0 is kReservedColor; color i steps the hue by the golden ratio
// conjugate at saturation 0.70 and value 0.95.
Palette make_palette(std::size_t n);

RgbImage render_labels(const LabelGrid& map, const Palette& palette);
void render_labels(const LabelGrid& map, const Palette& palette, const std::filesystem::path& path);

// Frames side by side, separated by 2px black columns. Heights must agree.
RgbImage contact_sheet(std::span<const RgbImage> frames);

}  // namespace hrlc
