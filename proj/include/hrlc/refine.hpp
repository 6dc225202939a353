#pragma once

#include <cstddef>

#include "hrlc/tensor_io.hpp"

namespace hrlc {

struct RefineConfig {
  std::size_t target_height = 0;
  std::size_t target_width = 0;
  std::size_t smooth_radius = 2;
  std::size_t smooth_passes = 1;
};

// Nearest-neighbour upsampling with pixel-centre alignment:
// fine (y, x) reads coarse (floor((y + 0.5) * H / H'), floor((x + 0.5) * W / W')).
LabelGrid upsample_labels(const LabelGrid& coarse, std::size_t target_height, std::size_t target_width);

// Modal label of the clipped (2r+1)^2 window, smallest label on ties.
LabelGrid majority_smooth(const LabelGrid& map, std::size_t radius, std::size_t passes);

// upsample then smooth.
LabelGrid refine_labels(const LabelGrid& coarse, const RefineConfig& cfg);
LabelMapSequence refine_sequence(const LabelMapSequence& coarse, const RefineConfig& cfg);

}  // namespace hrlc
