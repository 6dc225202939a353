#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>

#include "hrlc/matrix.hpp"
#include "hrlc/pipeline.hpp"
#include "hrlc/tensor_io.hpp"

namespace hrlc {

// stripes: G static vertical stripes.
// drift:   the stripes shift left by one pixel per frame (cyclic).
// swap:    stripes of generators 0 and 1 trade places in every other
//          block of `swap_period` frames.
enum class SynthLayout { kStripes, kDrift, kSwap };

SynthLayout parse_layout(const std::string& name);
std::string to_string(SynthLayout layout);

struct SynthSpec {
  std::size_t n_frames = 8;
  std::size_t height = 64;
  std::size_t width = 64;
  Matrix<float> generators;  // G x D
  SynthLayout layout = SynthLayout::kStripes;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
  std::size_t swap_period = 4;

  std::size_t dims() const noexcept { return generators.cols(); }
  std::size_t num_generators() const noexcept { return generators.rows(); }
  // Throws RangeError on empty dims, G = 0, coincident generators or a
  // negative sigma.
  void validate() const;
};

// G orthonormal rows in D dims from seeded Gaussian draws (G <= D).
Matrix<float> orthonormal_generators(std::size_t count, std::size_t dims, std::uint64_t seed);
double min_generator_distance(const Matrix<float>& generators);

std::uint32_t layout_at(const SynthSpec& spec, std::size_t frame, std::size_t y, std::size_t x);

struct SynthOutput {
  FeatureSequence features;
  LabelMapSequence truth;  // generator id per pixel
};

// Pixel feature = generator row + N(0, sigma^2) per coordinate.
SynthOutput generate(const SynthSpec& spec);

// Adjusted Rand index over all pixels of both sequences.
double adjusted_rand_index(std::span<const LabelGrid> a, std::span<const LabelGrid> b);

// Among pixel pairs from different batches that share a ground-truth id,
// the fraction that also share a predicted label. 1 when no such pair exists.
double cross_batch_agreement(std::span<const LabelGrid> truth, std::span<const LabelGrid> pred,
                             const BatchPartition& part);

}  // namespace hrlc
