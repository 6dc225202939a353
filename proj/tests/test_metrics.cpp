#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "hrlc/error.hpp"
#include "hrlc/metrics.hpp"

using namespace hrlc;

namespace {

MaskImage mask(std::size_t h, std::size_t w, std::vector<std::uint8_t> v) { return MaskImage(h, w, std::move(v)); }
LabelGrid labels(std::size_t h, std::size_t w, std::vector<std::uint32_t> v) { return LabelGrid(h, w, std::move(v)); }

MetricsReport report_with(const std::string& name, double iou, double f1, double recall) {
  MetricsReport r;
  r.sequence = name;
  r.mean_iou = iou;
  r.mean_f1 = f1;
  r.mean_recall = recall;
  return r;
}

}  // namespace

TEST_CASE("binary metrics hand cases") {
  const auto gt = mask(2, 4, {1, 1, 1, 1, 0, 0, 0, 0});
  CHECK(binary_metrics(gt, gt).iou == 1.0);
  CHECK(binary_metrics(gt, gt).f1 == 1.0);
  CHECK(binary_metrics(gt, gt).recall == 1.0);

  // Area 4 each, overlap 2: TP=2, FP=2, FN=2.
  const auto half = mask(2, 4, {0, 0, 1, 1, 1, 1, 0, 0});
  const auto m = binary_metrics(half, gt);
  CHECK(m.iou == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(m.f1 == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(m.recall == doctest::Approx(0.5).epsilon(1e-12));

  const auto empty = mask(2, 4, std::vector<std::uint8_t>(8, 0));
  const auto e = binary_metrics(empty, gt);
  CHECK(e.iou == 0.0);
  CHECK(e.f1 == 0.0);
  CHECK(e.recall == 0.0);
  const auto spurious = binary_metrics(gt, empty);
  CHECK(spurious.iou == 0.0);
  const auto both = binary_metrics(empty, empty);
  CHECK(both.iou == 1.0);
  CHECK(both.f1 == 1.0);
  CHECK(both.recall == 1.0);

  CHECK_THROWS_AS(binary_metrics(mask(1, 8, std::vector<std::uint8_t>(8, 0)), gt), ShapeError);
}

TEST_CASE("binary metrics against the count formulas") {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    MaskImage p(6, 7), g(6, 7);
    for (auto& v : p.values) v = rng() % 3 == 0;
    for (auto& v : g.values) v = rng() % 2 == 0 ? static_cast<std::uint8_t>(rng() % 4) : 0;
    double tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < p.values.size(); ++i) {
      tp += p.values[i] && g.values[i];
      fp += p.values[i] && !g.values[i];
      fn += !p.values[i] && g.values[i];
    }
    const auto m = binary_metrics(p, g);
    if (tp + fp == 0 || tp + fn == 0) continue;
    const double precision = tp / (tp + fp);
    const double recall = tp / (tp + fn);
    CHECK(m.iou == doctest::Approx(tp / (tp + fp + fn)));
    CHECK(m.recall == doctest::Approx(recall));
    if (tp > 0) CHECK(m.f1 == doctest::Approx(2 * precision * recall / (precision + recall)));
    CHECK(m.iou >= 0.0);
    CHECK(m.iou <= 1.0);
  }
}

TEST_CASE("growing overlap never lowers the scores") {
  // 1x10 strip: gt covers [0,4), prediction is a 4-pixel window sliding left.
  const auto gt = mask(1, 10, {1, 1, 1, 1, 0, 0, 0, 0, 0, 0});
  BinaryMetrics prev{};
  for (int start = 6; start >= 0; --start) {
    MaskImage p(1, 10);
    for (int i = start; i < start + 4; ++i) p.values[static_cast<std::size_t>(i)] = 1;
    const auto m = binary_metrics(p, gt);
    CHECK(m.iou >= prev.iou);
    CHECK(m.f1 >= prev.f1);
    CHECK(m.recall >= prev.recall);
    prev = m;
  }
  CHECK(prev.iou == 1.0);
}

TEST_CASE("majority matching follows the plurality") {
  // Cluster 0 equals object 1, cluster 1 is 60% background / 40% object 2.
  const auto gt = mask(1, 7, {1, 1, 0, 0, 0, 2, 2});
  const auto pred = labels(1, 7, {0, 0, 1, 1, 1, 1, 1});
  const auto m = match_clusters(pred, gt, MatchMode::kMajority);
  CHECK(m.object_of.at(0) == 1);
  CHECK(m.object_of.at(1) == 0);
  CHECK(m.clusters_of.at(1) == std::vector<std::uint32_t>{0});
  CHECK(m.clusters_of.at(2).empty());

  const auto b = match_clusters(pred, gt, MatchMode::kBestIou);
  CHECK(b.clusters_of.at(1) == std::vector<std::uint32_t>{0});
  CHECK(b.clusters_of.at(2) == std::vector<std::uint32_t>{1});
}

TEST_CASE("majority ties go to background, then the lowest object") {
  // cluster 5: bg + obj1 -> bg; cluster 6: obj1 + obj2 -> obj1; cluster 7: obj2 + obj3 -> obj2
  const auto gt = mask(1, 6, {0, 1, 1, 2, 2, 3});
  const auto pred = labels(1, 6, {5, 5, 6, 6, 7, 7});
  const auto m = match_clusters(pred, gt, MatchMode::kMajority);
  CHECK(m.object_of.at(5) == 0);
  CHECK(m.object_of.at(6) == 1);
  CHECK(m.object_of.at(7) == 2);
  CHECK(m.clusters_of.at(3).empty());
}

TEST_CASE("best-iou picks the highest-IoU cluster") {
  // Object 1 occupies 4 pixels. Cluster 0 covers 2 of them alone (IoU 0.5),
  // cluster 1 covers the other 2 plus 4 background pixels (IoU 2/8 = 0.25).
  const auto gt = mask(1, 10, {1, 1, 1, 1, 0, 0, 0, 0, 0, 0});
  const auto pred = labels(1, 10, {0, 0, 1, 1, 1, 1, 1, 1, 2, 2});
  const auto m = match_clusters(pred, gt, MatchMode::kBestIou);
  CHECK(m.clusters_of.at(1) == std::vector<std::uint32_t>{0});
  CHECK(m.object_of.empty());
}

TEST_CASE("evaluation of a perfect prediction") {
  const std::vector<MaskImage> gts = {mask(2, 2, {0, 1, 0, 1}), mask(2, 2, {1, 1, 0, 0})};
  LabelMapSequence pred;
  pred.maps = {labels(2, 2, {4, 9, 4, 9}), labels(2, 2, {9, 9, 4, 4})};
  pred.num_labels = 10;
  for (auto mode : {MatchMode::kMajority, MatchMode::kBestIou}) {
    const auto r = evaluate_sequence(pred, gts, mode, "toy");
    CHECK(r.sequence == "toy");
    REQUIRE(r.per_frame.size() == 2);
    CHECK(r.per_frame[0].frame_id == "00000");
    CHECK(r.per_frame[1].frame_id == "00001");
    CHECK(r.mean_iou == 1.0);
    CHECK(r.mean_f1 == 1.0);
    CHECK(r.mean_recall == 1.0);
  }
}

TEST_CASE("matching is pooled over the whole sequence") {
  // Two frames from two batches. The object is the left column in both.
  const std::vector<MaskImage> gts = {mask(1, 2, {1, 0}), mask(1, 2, {1, 0})};
  LabelMapSequence consistent, swapped;
  consistent.maps = {labels(1, 2, {0, 1}), labels(1, 2, {0, 1})};
  swapped.maps = {labels(1, 2, {0, 1}), labels(1, 2, {1, 0})};
  consistent.num_labels = swapped.num_labels = 2;

  const auto good = evaluate_sequence(consistent, gts, MatchMode::kMajority);
  const auto bad = evaluate_sequence(swapped, gts, MatchMode::kMajority);
  CHECK(good.mean_iou == 1.0);
  CHECK(bad.mean_iou < good.mean_iou);

  // Per-frame matching would have scored the swapped labeling perfectly.
  for (std::size_t f = 0; f < 2; ++f) {
    LabelMapSequence one;
    one.maps = {swapped.maps[f]};
    CHECK(evaluate_sequence(one, std::span(gts).subspan(f, 1), MatchMode::kMajority).mean_iou == 1.0);
  }
}

TEST_CASE("objects missing from a frame score by the empty convention") {
  const std::vector<MaskImage> gts = {mask(1, 4, {1, 1, 0, 0}), mask(1, 4, {0, 0, 0, 0})};
  LabelMapSequence pred;
  pred.maps = {labels(1, 4, {3, 3, 0, 0}), labels(1, 4, {0, 0, 0, 0})};
  const auto r = evaluate_sequence(pred, gts, MatchMode::kMajority);
  CHECK(r.per_frame[0].iou == 1.0);
  CHECK(r.per_frame[1].iou == 1.0);

  pred.maps[1] = labels(1, 4, {0, 3, 0, 0});  // false positive on the empty frame
  const auto fp = evaluate_sequence(pred, gts, MatchMode::kMajority);
  CHECK(fp.per_frame[1].iou == 0.0);
  CHECK(fp.mean_iou == 0.5);
}

TEST_CASE("multi-object frames average objects without weights") {
  const std::vector<MaskImage> gts = {mask(1, 8, {1, 1, 1, 1, 2, 2, 0, 0})};
  LabelMapSequence pred;
  // Object 1 perfectly matched; object 2 gets cluster 2, which also covers
  // one background pixel (IoU 2/3).
  pred.maps = {labels(1, 8, {1, 1, 1, 1, 2, 2, 2, 0})};
  const auto r = evaluate_sequence(pred, gts, MatchMode::kMajority);
  CHECK(r.mean_iou == doctest::Approx((1.0 + 2.0 / 3.0) / 2.0).epsilon(1e-12));
}

TEST_CASE("evaluation is invariant to permuting label ids") {
  std::mt19937 rng(9);
  std::vector<MaskImage> gts;
  LabelMapSequence pred, permuted;
  const std::vector<std::uint32_t> perm = {3, 0, 4, 1, 2};
  for (int f = 0; f < 4; ++f) {
    MaskImage g(5, 5);
    LabelGrid p(5, 5), q(5, 5);
    for (std::size_t i = 0; i < 25; ++i) {
      g.values[i] = static_cast<std::uint8_t>(rng() % 3);
      p.values[i] = rng() % 5;
      q.values[i] = perm[p.values[i]];
    }
    gts.push_back(g);
    pred.maps.push_back(p);
    permuted.maps.push_back(q);
  }
  for (auto mode : {MatchMode::kMajority, MatchMode::kBestIou}) {
    const auto a = evaluate_sequence(pred, gts, mode);
    const auto b = evaluate_sequence(permuted, gts, mode);
    CHECK(a.mean_iou == b.mean_iou);
    CHECK(a.mean_f1 == b.mean_f1);
    CHECK(a.mean_recall == b.mean_recall);
  }
}

TEST_CASE("sequence means are frame means") {
  std::mt19937 rng(2);
  std::vector<MaskImage> gts;
  LabelMapSequence pred;
  for (int f = 0; f < 6; ++f) {
    MaskImage g(4, 4);
    LabelGrid p(4, 4);
    for (std::size_t i = 0; i < 16; ++i) {
      g.values[i] = static_cast<std::uint8_t>(rng() % 2);
      p.values[i] = rng() % 3;
    }
    gts.push_back(g);
    pred.maps.push_back(p);
  }
  const auto r = evaluate_sequence(pred, gts, MatchMode::kBestIou);
  double iou = 0, f1 = 0, recall = 0;
  for (const auto& fm : r.per_frame) {
    iou += fm.iou;
    f1 += fm.f1;
    recall += fm.recall;
    CHECK(fm.iou >= 0.0);
    CHECK(fm.iou <= 1.0);
  }
  CHECK(r.mean_iou == doctest::Approx(iou / 6));
  CHECK(r.mean_f1 == doctest::Approx(f1 / 6));
  CHECK(r.mean_recall == doctest::Approx(recall / 6));
}

TEST_CASE("evaluation errors") {
  const std::vector<MaskImage> gts = {mask(1, 2, {1, 0})};
  LabelMapSequence pred;
  pred.maps = {labels(1, 2, {0, 1}), labels(1, 2, {0, 1})};
  CHECK_THROWS_AS(evaluate_sequence(pred, gts, MatchMode::kMajority), ShapeError);
  pred.maps = {labels(2, 1, {0, 1})};
  CHECK_THROWS_AS(evaluate_sequence(pred, gts, MatchMode::kMajority), ShapeError);
  pred.maps = {labels(1, 2, {0, 1})};
  const std::vector<MaskImage> blank = {mask(1, 2, {0, 0})};
  CHECK_THROWS_AS(evaluate_sequence(pred, blank, MatchMode::kMajority), DataError);
  CHECK_THROWS_AS(parse_match_mode("hungarian"), ConfigError);
  CHECK(parse_match_mode("best-iou") == MatchMode::kBestIou);
  CHECK(to_string(MatchMode::kMajority) == "majority");
}

TEST_CASE("average row is the arithmetic mean of sequence rows") {
  const std::vector<double> iou = {0.4165, 0.6541, 0.5333, 0.7767, 0.5644};
  const std::vector<double> f1 = {0.5823, 0.8154, 0.5871, 0.8681, 0.7204};
  const std::vector<double> recall = {0.7277, 0.9934, 0.5433, 0.7856, 0.5701};
  std::vector<MetricsReport> reports;
  const char* names[] = {"seq_a", "seq_b", "seq_c", "seq_d", "seq_e"};
  for (std::size_t i = 0; i < 5; ++i) reports.push_back(report_with(names[i], iou[i], f1[i], recall[i]));
  const auto avg = average_reports(reports);
  CHECK(std::round(avg.iou * 1e4) / 1e4 == doctest::Approx(0.5890).epsilon(1e-12));
  CHECK(std::round(avg.f1 * 1e4) / 1e4 == doctest::Approx(0.7147).epsilon(1e-12));
  CHECK(std::round(avg.recall * 1e4) / 1e4 == doctest::Approx(0.7240).epsilon(1e-12));

  const std::string table = format_table(reports);
  CHECK(table.find("Avg       0.5890  0.7147  0.7240\n") != std::string::npos);
  CHECK(table.rfind("sequence", 0) == 0);
}

TEST_CASE("table and report layout") {
  const std::vector<MetricsReport> one = {report_with("boat", 0.5, 0.25, 1.0)};
  CHECK(format_table(one) ==
        "sequence     IOU      F1  Recall\n"
        "boat      0.5000  0.2500  1.0000\n");

  MetricsReport r = report_with("boat", 0.5, 0.25, 1.0);
  r.per_frame = {{"00000", 0.5, 0.25, 1.0}};
  CHECK(format_report(r) ==
        "sequence=boat frame=00000 iou=0.500000 f1=0.250000 recall=1.000000\n"
        "sequence=boat frame=mean iou=0.500000 f1=0.250000 recall=1.000000\n");
}
