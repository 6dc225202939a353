#pragma once

#include <cstddef>
#include <filesystem>
#include <string>

#include "hrlc/metrics.hpp"
#include "hrlc/pipeline.hpp"
#include "hrlc/refine.hpp"
#include "hrlc/synth.hpp"

namespace hrlc {

// Synthetic fixture parameters as they appear in a config file. The
// generators themselves are derived from the run seed.
struct SynthConfig {
  std::size_t n_frames = 8;
  std::size_t height = 64;
  std::size_t width = 64;
  std::size_t dims = 256;
  std::size_t generators = 3;
  SynthLayout layout = SynthLayout::kStripes;
  double noise_sigma = 0.0;
  // When positive, overrides noise_sigma with noise_rel * min generator distance.
  double noise_rel = 0.0;
  std::size_t swap_period = 4;

  bool operator==(const SynthConfig&) const = default;
};

// Everything a run needs, read from a flat INI file:
//
//   [pipeline] batch_size intra_k inter_k pca_dim_intra pca_dim_inter seed pca_max_rows
//   [kmeans]   max_iters tol
//   [refine]   target_height target_width smooth_radius smooth_passes
//   [eval]     match_mode
//   [synth]    n_frames height width dims generators layout noise_sigma noise_rel swap_period
//
// Missing keys keep their defaults; unknown sections or keys are errors.
struct RunConfig {
  PipelineConfig pipeline;
  RefineConfig refine{0, 0, 2, 1};
  MatchMode match_mode = MatchMode::kMajority;
  SynthConfig synth;

  bool operator==(const RunConfig& o) const {
    return pipeline == o.pipeline && refine.target_height == o.refine.target_height &&
           refine.target_width == o.refine.target_width && refine.smooth_radius == o.refine.smooth_radius &&
           refine.smooth_passes == o.refine.smooth_passes && match_mode == o.match_mode && synth == o.synth;
  }
};

// Throws ConfigError on syntax errors, unknown keys or bad values.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);
std::string serialize_config(const RunConfig& cfg);

// Generator seed derived from the run seed.
inline constexpr std::uint64_t kGeneratorSeedMix = 0xD1B54A32D192ED03ULL;

SynthSpec make_synth_spec(const SynthConfig& cfg, std::uint64_t seed);

}  // namespace hrlc
