#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "hrlc/tensor_io.hpp"

namespace hrlc {

enum class MatchMode { kMajority, kBestIou };

// "majority" or "best-iou"; throws ConfigError otherwise.
MatchMode parse_match_mode(const std::string& name);
std::string to_string(MatchMode mode);

struct BinaryMetrics {
  double iou = 0.0;
  double f1 = 0.0;
  double recall = 0.0;
};

// Both empty scores 1 on every metric, exactly one empty scores 0.
BinaryMetrics binary_metrics_from_counts(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn);
// Nonzero pixels are foreground.
BinaryMetrics binary_metrics(const Grid<std::uint8_t>& pred, const Grid<std::uint8_t>& gt);

// Cluster -> ground-truth correspondence. `clusters_of[o]` lists the
// predicted ids forming the foreground of object `o` (possibly none).
struct ClusterMatching {
  MatchMode mode = MatchMode::kMajority;
  std::map<std::uint8_t, std::vector<std::uint32_t>> clusters_of;
  // Majority mode only: the ground-truth id (0 = background) each cluster maps to.
  std::map<std::uint32_t, std::uint8_t> object_of;
};

// Matching from pixel counts pooled over every frame.
ClusterMatching match_clusters(std::span<const LabelGrid> pred, std::span<const MaskImage> gt, MatchMode mode);
ClusterMatching match_clusters(const LabelGrid& pred, const MaskImage& gt, MatchMode mode);

struct FrameMetrics {
  std::string frame_id;
  double iou = 0.0;
  double f1 = 0.0;
  double recall = 0.0;
};

struct MetricsReport {
  std::string sequence;
  std::vector<FrameMetrics> per_frame;
  double mean_iou = 0.0;
  double mean_f1 = 0.0;
  double mean_recall = 0.0;
  ClusterMatching matching;
};

// Matches once over the whole sequence, scores every object per frame,
// averages objects within a frame, then frames. Frame ids default to the
// zero-padded frame index.
MetricsReport evaluate_sequence(const LabelMapSequence& pred, std::span<const MaskImage> gts, MatchMode mode,
                                const std::string& sequence = "sequence",
                                std::span<const std::string> frame_ids = {});

struct SequenceAverage {
  double iou = 0.0;
  double f1 = 0.0;
  double recall = 0.0;
};

// Arithmetic mean of the per-sequence values (the "Avg" row).
SequenceAverage average_reports(std::span<const MetricsReport> reports);

// Fixed-width table, 4 decimals; an "Avg" row is appended for two or more
// sequences.
std::string format_table(std::span<const MetricsReport> reports);

// One `key=value` line per frame plus a `frame=mean` summary line.
std::string format_report(const MetricsReport& report);

}  // namespace hrlc
