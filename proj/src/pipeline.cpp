#include "hrlc/pipeline.hpp"

#include <algorithm>
#include <string>

#include "hrlc/error.hpp"

namespace hrlc {

void PipelineConfig::validate(std::size_t feature_dims) const {
  if (batch_size < 1) throw RangeError("batch_size must be at least 1");
  if (intra_k < 1) throw RangeError("intra_k must be at least 1");
  if (inter_k < 1) throw RangeError("inter_k must be at least 1");
  if (pca_dim_intra < 1 || pca_dim_intra > feature_dims) {
    throw RangeError("pca_dim_intra " + std::to_string(pca_dim_intra) + " outside [1, " +
                     std::to_string(feature_dims) + "]");
  }
  if (pca_dim_inter < 1 || pca_dim_inter > feature_dims) {
    throw RangeError("pca_dim_inter " + std::to_string(pca_dim_inter) + " outside [1, " +
                     std::to_string(feature_dims) + "]");
  }
  if (kmeans.max_iters < 1) throw RangeError("kmeans max_iters must be at least 1");
  if (!(kmeans.tol >= 0.0)) throw RangeError("kmeans tol must be non-negative");
}

BatchPartition allocate_batches(std::size_t n, std::size_t batch_size) {
  if (n < 1) throw RangeError("allocate_batches: need at least one frame");
  if (batch_size < 1) throw RangeError("allocate_batches: batch_size must be at least 1");
  BatchPartition part;
  part.batch_size = batch_size;
  for (std::size_t first = 0; first < n; first += batch_size) {
    auto& batch = part.batches.emplace_back();
    for (std::size_t f = first; f < std::min(n, first + batch_size); ++f) batch.push_back(f);
  }
  return part;
}

IntraBatchResult intra_batch_cluster(const FeatureSequence& seq, const BatchPartition& part,
                                     const PipelineConfig& cfg) {
  if (seq.size() == 0) throw DataError("intra_batch_cluster: empty sequence");
  cfg.validate(seq.dims());
  const std::size_t pixels = seq.pixels_per_frame();
  for (std::size_t b = 0; b < part.size(); ++b) {
    if (part.batches[b].size() * pixels < cfg.intra_k) {
      throw RangeError("intra_batch_cluster: batch " + std::to_string(b) + " has " +
                       std::to_string(part.batches[b].size() * pixels) + " points, fewer than intra_k " +
                       std::to_string(cfg.intra_k));
    }
  }

  const auto all_rows = seq.rows();
  const std::size_t fit_dims = std::min(cfg.pca_dim_intra, all_rows.rows() - 1);
  if (fit_dims < 1) throw RangeError("intra_batch_cluster: need at least two pixels to fit PCA");
  PcaOptions options;
  options.clamp_to_rank = true;
  options.max_rows = cfg.pca_max_rows;
  options.seed = cfg.seed;

  IntraBatchResult result;
  result.frame_height = seq.height();
  result.frame_width = seq.width();
  result.pca = pca_fit(all_rows, fit_dims, options);
  const Matrix<float> reduced = pca_transform(result.pca, all_rows);

  result.clusterings.reserve(part.size());
  for (std::size_t b = 0; b < part.size(); ++b) {
    const auto& frames = part.batches[b];
    const auto rows = reduced.view().slice_rows(frames.front() * pixels, frames.size() * pixels);
    result.clusterings.push_back(kmeans_fit(rows, cfg.intra_k, cfg.seed ^ static_cast<std::uint64_t>(b), cfg.kmeans));
  }
  return result;
}

bool PrototypeSet::assigned() const {
  return global_of.size() == origin.size() &&
         std::none_of(global_of.begin(), global_of.end(), [](std::int32_t g) { return g == kUnassigned; });
}

PrototypeSet extract_prototypes(const FeatureSequence& seq, const BatchPartition& part,
                                const IntraBatchResult& intra) {
  if (intra.clusterings.size() != part.size()) {
    throw ShapeError("extract_prototypes: one clustering per batch expected");
  }
  const std::size_t dims = seq.dims();
  const std::size_t pixels = seq.pixels_per_frame();

  std::size_t total = 0;
  for (const auto& c : intra.clusterings) total += c.k();

  PrototypeSet set;
  set.prototypes = Matrix<float>(total, dims);
  set.origin.reserve(total);
  set.global_of.assign(total, PrototypeSet::kUnassigned);

  std::size_t row = 0;
  for (std::size_t b = 0; b < part.size(); ++b) {
    const auto& frames = part.batches[b];
    const auto& clustering = intra.clusterings[b];
    const auto features = seq.rows(frames.front(), frames.size());
    if (clustering.labels.size() != frames.size() * pixels) {
      throw ShapeError("extract_prototypes: labels of batch " + std::to_string(b) + " do not cover its pixels");
    }

    const std::size_t k = clustering.k();
    Matrix<double> sums(k, dims);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < features.rows(); ++i) {
      const auto label = clustering.labels[i];
      const auto x = features.row(i);
      auto s = sums.row(label);
      for (std::size_t j = 0; j < dims; ++j) s[j] += static_cast<double>(x[j]);
      ++counts[label];
    }
    for (std::size_t c = 0; c < k; ++c, ++row) {
      if (counts[c] == 0) {
        throw InternalError("extract_prototypes: cluster " + std::to_string(c) + " of batch " + std::to_string(b) +
                            " is empty");
      }
      const auto s = sums.row(c);
      auto dst = set.prototypes.row(row);
      for (std::size_t j = 0; j < dims; ++j) dst[j] = static_cast<float>(s[j] / static_cast<double>(counts[c]));
      set.origin.push_back({b, static_cast<std::uint32_t>(c)});
    }
  }
  return set;
}

std::size_t effective_inter_dims(std::size_t prototypes, std::size_t dims, const PipelineConfig& cfg) {
  return std::min({cfg.pca_dim_inter, prototypes > 0 ? prototypes - 1 : 0, dims});
}

PrototypeSet inter_batch_cluster(PrototypeSet protos, const PipelineConfig& cfg) {
  const std::size_t count = protos.size();
  if (count < cfg.inter_k) {
    throw RangeError("inter_batch_cluster: " + std::to_string(count) + " prototypes, fewer than inter_k " +
                     std::to_string(cfg.inter_k));
  }
  protos.num_global = static_cast<std::uint32_t>(cfg.inter_k);
  if (count == 1) {
    protos.global_of.assign(1, 0);
    return protos;
  }

  const std::size_t dims = effective_inter_dims(count, protos.prototypes.cols(), cfg);
  PcaOptions options;
  options.clamp_to_rank = true;
  const PcaModel model = pca_fit(protos.prototypes.view(), dims, options);
  const Matrix<float> reduced = pca_transform(model, protos.prototypes.view());
  const Clustering clustering = kmeans_fit(reduced.view(), cfg.inter_k, cfg.seed ^ kInterSeedMix, cfg.kmeans);
  protos.global_of.assign(clustering.labels.begin(), clustering.labels.end());
  return protos;
}

LabelMapSequence relabel_global(const BatchPartition& part, const IntraBatchResult& intra,
                                const PrototypeSet& protos) {
  if (!protos.assigned()) throw StateError("relabel_global: prototypes have no global labels yet");
  const std::size_t h = intra.frame_height;
  const std::size_t w = intra.frame_width;

  LabelMapSequence out;
  out.num_labels = protos.num_global;
  std::size_t offset = 0;
  for (std::size_t b = 0; b < part.size(); ++b) {
    const std::size_t k = intra.clusterings[b].k();
    if (offset + k > protos.size()) throw StateError("relabel_global: prototype set does not match the batches");
    for (std::size_t j = 0; j < k; ++j) {
      if (protos.origin[offset + j] != PrototypeOrigin{b, static_cast<std::uint32_t>(j)}) {
        throw StateError("relabel_global: prototype rows are not in batch-major order");
      }
    }
    for (std::size_t f = 0; f < part.batches[b].size(); ++f) {
      LabelGrid& grid = out.maps.emplace_back(h, w);
      for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
          grid.at(y, x) = static_cast<std::uint32_t>(protos.global_of[offset + intra.label(b, f, y, x)]);
        }
      }
    }
    offset += k;
  }
  return out;
}

PipelineResult run_pipeline_detailed(const FeatureSequence& seq, const PipelineConfig& cfg) {
  PipelineResult r;
  r.partition = allocate_batches(seq.size(), cfg.batch_size);
  r.intra = intra_batch_cluster(seq, r.partition, cfg);
  r.prototypes = inter_batch_cluster(extract_prototypes(seq, r.partition, r.intra), cfg);
  r.labels = relabel_global(r.partition, r.intra, r.prototypes);
  return r;
}

LabelMapSequence run_pipeline(const FeatureSequence& seq, const PipelineConfig& cfg) {
  return run_pipeline_detailed(seq, cfg).labels;
}

}  // namespace hrlc
