#include "hrlc/metrics.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <set>

#include "hrlc/error.hpp"

namespace hrlc {

MatchMode parse_match_mode(const std::string& name) {
  if (name == "majority") return MatchMode::kMajority;
  if (name == "best-iou") return MatchMode::kBestIou;
  throw ConfigError("unknown match mode '" + name + "' (expected majority or best-iou)");
}

std::string to_string(MatchMode mode) { return mode == MatchMode::kMajority ? "majority" : "best-iou"; }

BinaryMetrics binary_metrics_from_counts(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn) {
  const bool pred_empty = tp + fp == 0;
  const bool gt_empty = tp + fn == 0;
  if (pred_empty && gt_empty) return {1.0, 1.0, 1.0};
  if (pred_empty || gt_empty || tp == 0) return {0.0, 0.0, 0.0};
  const double t = static_cast<double>(tp);
  const double precision = t / static_cast<double>(tp + fp);
  const double recall = t / static_cast<double>(tp + fn);
  return {t / static_cast<double>(tp + fp + fn), 2.0 * precision * recall / (precision + recall), recall};
}

BinaryMetrics binary_metrics(const Grid<std::uint8_t>& pred, const Grid<std::uint8_t>& gt) {
  if (pred.height != gt.height || pred.width != gt.width) {
    throw ShapeError("binary_metrics: prediction " + std::to_string(pred.height) + "x" + std::to_string(pred.width) +
                     " vs ground truth " + std::to_string(gt.height) + "x" + std::to_string(gt.width));
  }
  std::uint64_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < pred.values.size(); ++i) {
    const bool p = pred.values[i] != 0;
    const bool g = gt.values[i] != 0;
    tp += p && g;
    fp += p && !g;
    fn += !p && g;
  }
  return binary_metrics_from_counts(tp, fp, fn);
}

namespace {

using GtCounts = std::array<std::uint64_t, 256>;

// counts[cluster][gt id] pooled over all frames.
std::map<std::uint32_t, GtCounts> contingency(std::span<const LabelGrid> pred, std::span<const MaskImage> gt) {
  if (pred.size() != gt.size()) {
    throw ShapeError("prediction has " + std::to_string(pred.size()) + " frames, ground truth " +
                     std::to_string(gt.size()));
  }
  std::map<std::uint32_t, GtCounts> counts;
  for (std::size_t f = 0; f < pred.size(); ++f) {
    if (pred[f].height != gt[f].height || pred[f].width != gt[f].width) {
      throw ShapeError("frame " + std::to_string(f) + ": prediction " + std::to_string(pred[f].height) + "x" +
                       std::to_string(pred[f].width) + " vs ground truth " + std::to_string(gt[f].height) + "x" +
                       std::to_string(gt[f].width));
    }
    for (std::size_t i = 0; i < pred[f].values.size(); ++i) {
      auto [it, inserted] = counts.try_emplace(pred[f].values[i]);
      if (inserted) it->second.fill(0);
      ++it->second[gt[f].values[i]];
    }
  }
  return counts;
}

}  // namespace

ClusterMatching match_clusters(std::span<const LabelGrid> pred, std::span<const MaskImage> gt, MatchMode mode) {
  const auto counts = contingency(pred, gt);
  GtCounts object_area{};
  for (const auto& [cluster, row] : counts) {
    for (std::size_t g = 0; g < row.size(); ++g) object_area[g] += row[g];
  }

  ClusterMatching matching;
  matching.mode = mode;
  for (std::size_t g = 1; g < object_area.size(); ++g) {
    if (object_area[g] > 0) matching.clusters_of[static_cast<std::uint8_t>(g)];
  }

  if (mode == MatchMode::kMajority) {
    for (const auto& [cluster, row] : counts) {
      // Strict comparison keeps background, then the lowest object id, on ties.
      std::size_t best = 0;
      for (std::size_t g = 1; g < row.size(); ++g) {
        if (row[g] > row[best]) best = g;
      }
      matching.object_of[cluster] = static_cast<std::uint8_t>(best);
      if (best != 0) matching.clusters_of[static_cast<std::uint8_t>(best)].push_back(cluster);
    }
    return matching;
  }

  for (auto& [object, clusters] : matching.clusters_of) {
    double best_iou = 0.0;
    std::uint32_t best_cluster = 0;
    for (const auto& [cluster, row] : counts) {
      const std::uint64_t overlap = row[object];
      std::uint64_t area = 0;
      for (auto v : row) area += v;
      const double iou =
          static_cast<double>(overlap) / static_cast<double>(area + object_area[object] - overlap);
      if (iou > best_iou) {
        best_iou = iou;
        best_cluster = cluster;
      }
    }
    if (best_iou > 0.0) clusters.push_back(best_cluster);
  }
  return matching;
}

ClusterMatching match_clusters(const LabelGrid& pred, const MaskImage& gt, MatchMode mode) {
  return match_clusters(std::span<const LabelGrid>(&pred, 1), std::span<const MaskImage>(&gt, 1), mode);
}

MetricsReport evaluate_sequence(const LabelMapSequence& pred, std::span<const MaskImage> gts, MatchMode mode,
                                const std::string& sequence, std::span<const std::string> frame_ids) {
  if (pred.maps.size() != gts.size()) {
    throw ShapeError("evaluate_sequence: " + std::to_string(pred.maps.size()) + " predicted frames vs " +
                     std::to_string(gts.size()) + " ground-truth frames");
  }
  if (!frame_ids.empty() && frame_ids.size() != gts.size()) {
    throw ShapeError("evaluate_sequence: frame id count does not match the frame count");
  }
  if (gts.empty()) throw DataError("evaluate_sequence: no frames");

  MetricsReport report;
  report.sequence = sequence;
  report.matching = match_clusters(pred.maps, gts, mode);
  if (report.matching.clusters_of.empty()) {
    throw DataError("evaluate_sequence: ground truth of '" + sequence + "' contains no object pixels");
  }

  for (std::size_t f = 0; f < gts.size(); ++f) {
    const auto& p = pred.maps[f];
    const auto& g = gts[f];
    double iou = 0.0, f1 = 0.0, recall = 0.0;
    for (const auto& [object, clusters] : report.matching.clusters_of) {
      const std::set<std::uint32_t> fg(clusters.begin(), clusters.end());
      std::uint64_t tp = 0, fp = 0, fn = 0;
      for (std::size_t i = 0; i < p.values.size(); ++i) {
        const bool in_pred = fg.contains(p.values[i]);
        const bool in_gt = g.values[i] == object;
        tp += in_pred && in_gt;
        fp += in_pred && !in_gt;
        fn += !in_pred && in_gt;
      }
      const auto m = binary_metrics_from_counts(tp, fp, fn);
      iou += m.iou;
      f1 += m.f1;
      recall += m.recall;
    }
    const double objects = static_cast<double>(report.matching.clusters_of.size());
    char id[32];
    std::snprintf(id, sizeof id, "%05zu", f);
    report.per_frame.push_back(
        {frame_ids.empty() ? std::string(id) : frame_ids[f], iou / objects, f1 / objects, recall / objects});
  }

  for (const auto& fm : report.per_frame) {
    report.mean_iou += fm.iou;
    report.mean_f1 += fm.f1;
    report.mean_recall += fm.recall;
  }
  const double frames = static_cast<double>(report.per_frame.size());
  report.mean_iou /= frames;
  report.mean_f1 /= frames;
  report.mean_recall /= frames;
  return report;
}

SequenceAverage average_reports(std::span<const MetricsReport> reports) {
  SequenceAverage avg;
  if (reports.empty()) return avg;
  for (const auto& r : reports) {
    avg.iou += r.mean_iou;
    avg.f1 += r.mean_f1;
    avg.recall += r.mean_recall;
  }
  const double n = static_cast<double>(reports.size());
  avg.iou /= n;
  avg.f1 /= n;
  avg.recall /= n;
  return avg;
}

namespace {

std::string table_row(const std::string& name, std::size_t name_width, double iou, double f1, double recall) {
  char values[96];
  std::snprintf(values, sizeof values, "  %6.4f  %6.4f  %6.4f\n", iou, f1, recall);
  std::string row = name;
  row.append(name_width - name.size(), ' ');
  return row + values;
}

}  // namespace

std::string format_table(std::span<const MetricsReport> reports) {
  std::size_t width = std::string("sequence").size();
  for (const auto& r : reports) width = std::max(width, r.sequence.size());

  std::string out = "sequence";
  out.append(width - out.size(), ' ');
  out += "     IOU      F1  Recall\n";
  for (const auto& r : reports) out += table_row(r.sequence, width, r.mean_iou, r.mean_f1, r.mean_recall);
  if (reports.size() > 1) {
    const auto avg = average_reports(reports);
    out += table_row("Avg", width, avg.iou, avg.f1, avg.recall);
  }
  return out;
}

std::string format_report(const MetricsReport& report) {
  std::string out;
  char line[512];
  auto emit = [&](const std::string& frame, double iou, double f1, double recall) {
    std::snprintf(line, sizeof line, "sequence=%s frame=%s iou=%.6f f1=%.6f recall=%.6f\n", report.sequence.c_str(),
                  frame.c_str(), iou, f1, recall);
    out += line;
  };
  for (const auto& f : report.per_frame) emit(f.frame_id, f.iou, f.f1, f.recall);
  emit("mean", report.mean_iou, report.mean_f1, report.mean_recall);
  return out;
}

}  // namespace hrlc
