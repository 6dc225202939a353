#include "hrlc/refine.hpp"

#include <algorithm>
#include <string>
#include <utility>

#include "hrlc/error.hpp"
#include "hrlc/parallel.hpp"

namespace hrlc {

LabelGrid upsample_labels(const LabelGrid& coarse, std::size_t target_height, std::size_t target_width) {
  if (target_height < coarse.height || target_width < coarse.width) {
    throw RangeError("upsample_labels: target " + std::to_string(target_height) + "x" + std::to_string(target_width) +
                     " is smaller than the source " + std::to_string(coarse.height) + "x" +
                     std::to_string(coarse.width));
  }
  LabelGrid fine(target_height, target_width);
  std::vector<std::size_t> src_x(target_width);
  for (std::size_t x = 0; x < target_width; ++x) src_x[x] = ((2 * x + 1) * coarse.width) / (2 * target_width);
  parallel_for(target_height, [&](std::size_t y) {
    const std::size_t sy = ((2 * y + 1) * coarse.height) / (2 * target_height);
    for (std::size_t x = 0; x < target_width; ++x) fine.at(y, x) = coarse.at(sy, src_x[x]);
  });
  return fine;
}

namespace {

LabelGrid smooth_once(const LabelGrid& in, std::size_t radius) {
  LabelGrid out(in.height, in.width);
  parallel_for(in.height, [&](std::size_t y) {
    std::vector<std::pair<std::uint32_t, std::size_t>> tally;
    const std::size_t y0 = y >= radius ? y - radius : 0;
    const std::size_t y1 = std::min(in.height - 1, y + radius);
    for (std::size_t x = 0; x < in.width; ++x) {
      const std::size_t x0 = x >= radius ? x - radius : 0;
      const std::size_t x1 = std::min(in.width - 1, x + radius);
      tally.clear();
      for (std::size_t wy = y0; wy <= y1; ++wy) {
        for (std::size_t wx = x0; wx <= x1; ++wx) {
          const auto label = in.at(wy, wx);
          auto it = std::find_if(tally.begin(), tally.end(), [&](const auto& e) { return e.first == label; });
          if (it == tally.end()) {
            tally.emplace_back(label, 1);
          } else {
            ++it->second;
          }
        }
      }
      auto best = tally.front();
      for (const auto& e : tally) {
        if (e.second > best.second || (e.second == best.second && e.first < best.first)) best = e;
      }
      out.at(y, x) = best.first;
    }
  });
  return out;
}

}  // namespace

LabelGrid majority_smooth(const LabelGrid& map, std::size_t radius, std::size_t passes) {
  if (radius == 0 || map.values.empty()) return map;
  LabelGrid current = map;
  for (std::size_t p = 0; p < passes; ++p) current = smooth_once(current, radius);
  return current;
}

LabelGrid refine_labels(const LabelGrid& coarse, const RefineConfig& cfg) {
  return majority_smooth(upsample_labels(coarse, cfg.target_height, cfg.target_width), cfg.smooth_radius,
                         cfg.smooth_passes);
}

LabelMapSequence refine_sequence(const LabelMapSequence& coarse, const RefineConfig& cfg) {
  LabelMapSequence out;
  out.num_labels = coarse.num_labels;
  out.maps.reserve(coarse.maps.size());
  for (const auto& m : coarse.maps) out.maps.push_back(refine_labels(m, cfg));
  return out;
}

}  // namespace hrlc
