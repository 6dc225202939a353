#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "hrlc/kmeans.hpp"
#include "hrlc/pca.hpp"
#include "hrlc/tensor_io.hpp"

namespace hrlc {

struct PipelineConfig {
  std::size_t batch_size = 4;
  std::size_t intra_k = 6;
  std::size_t inter_k = 6;
  std::size_t pca_dim_intra = 20;
  std::size_t pca_dim_inter = 20;
  std::uint64_t seed = 0;
  KMeansParams kmeans;
  // Row cap for the intra-level PCA fit; 0 fits on every pixel.
  std::size_t pca_max_rows = 0;

  // Throws RangeError when a count is zero or a PCA dim exceeds `feature_dims`.
  void validate(std::size_t feature_dims) const;

  bool operator==(const PipelineConfig& o) const {
    return batch_size == o.batch_size && intra_k == o.intra_k && inter_k == o.inter_k &&
           pca_dim_intra == o.pca_dim_intra && pca_dim_inter == o.pca_dim_inter && seed == o.seed &&
           kmeans.max_iters == o.kmeans.max_iters && kmeans.tol == o.kmeans.tol && pca_max_rows == o.pca_max_rows;
  }
};

// Seed offset for the prototype-level k-means.
inline constexpr std::uint64_t kInterSeedMix = 0x9E3779B97F4A7C15ULL;

// Contiguous, ordered frame batches; only the last may be short.
struct BatchPartition {
  std::vector<std::vector<std::size_t>> batches;
  std::size_t batch_size = 0;

  std::size_t size() const noexcept { return batches.size(); }
  bool operator==(const BatchPartition&) const = default;
};

BatchPartition allocate_batches(std::size_t n, std::size_t batch_size);

struct IntraBatchResult {
  PcaModel pca;  // shared by every batch
  std::vector<Clustering> clusterings;  // one per batch, labels frame-major
  std::size_t frame_height = 0;
  std::size_t frame_width = 0;

  // Batch-local label of pixel (y, x) in the `local_frame`-th frame of batch `b`.
  std::uint32_t label(std::size_t b, std::size_t local_frame, std::size_t y, std::size_t x) const {
    return clusterings[b].labels[(local_frame * frame_height + y) * frame_width + x];
  }
};

IntraBatchResult intra_batch_cluster(const FeatureSequence& seq, const BatchPartition& part,
                                     const PipelineConfig& cfg);

struct PrototypeOrigin {
  std::size_t batch = 0;
  std::uint32_t cluster = 0;
  bool operator==(const PrototypeOrigin&) const = default;
};

struct PrototypeSet {
  static constexpr std::int32_t kUnassigned = -1;

  Matrix<float> prototypes;  // P x D, batch-major then cluster id
  std::vector<PrototypeOrigin> origin;
  std::vector<std::int32_t> global_of;  // kUnassigned until inter_batch_cluster
  std::uint32_t num_global = 0;

  std::size_t size() const noexcept { return origin.size(); }
  bool assigned() const;
};

// Means of the original (unreduced) features of every intra cluster.
PrototypeSet extract_prototypes(const FeatureSequence& seq, const BatchPartition& part,
                                const IntraBatchResult& intra);

// PCA target dims for the prototype level: min(pca_dim_inter, P - 1, D).
std::size_t effective_inter_dims(std::size_t prototypes, std::size_t dims, const PipelineConfig& cfg);

// Fresh PCA + k-means over the prototype rows; fills global_of.
PrototypeSet inter_batch_cluster(PrototypeSet protos, const PipelineConfig& cfg);

LabelMapSequence relabel_global(const BatchPartition& part, const IntraBatchResult& intra,
                                const PrototypeSet& protos);

struct PipelineResult {
  BatchPartition partition;
  IntraBatchResult intra;
  PrototypeSet prototypes;
  LabelMapSequence labels;
};

// allocate -> intra -> prototypes -> inter -> relabel, keeping every stage.
PipelineResult run_pipeline_detailed(const FeatureSequence& seq, const PipelineConfig& cfg);

LabelMapSequence run_pipeline(const FeatureSequence& seq, const PipelineConfig& cfg);

}  // namespace hrlc
