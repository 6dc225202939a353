#include "hrlc/kmeans.hpp"

#include <algorithm>
#include <cassert>
#include <limits>
#include <string>

#include "hrlc/error.hpp"
#include "hrlc/parallel.hpp"
#include "hrlc/rng.hpp"

namespace hrlc {

namespace {

constexpr std::size_t kPointChunk = 2048;

double squared_distance(std::span<const float> x, std::span<const double> c) {
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double diff = static_cast<double>(x[i]) - c[i];
    acc += diff * diff;
  }
  return acc;
}

double squared_distance(std::span<const float> x, std::span<const float> y) {
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double diff = static_cast<double>(x[i]) - static_cast<double>(y[i]);
    acc += diff * diff;
  }
  return acc;
}

std::uint32_t nearest(std::span<const float> x, const MatrixView<double>& centroids) {
  std::uint32_t best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.rows(); ++c) {
    const double dist = squared_distance(x, centroids.row(c));
    if (dist < best_dist) {
      best_dist = dist;
      best = static_cast<std::uint32_t>(c);
    }
  }
  return best;
}

// Chunked sum, reduced in chunk order.
template <class Fn>
double chunked_sum(std::size_t n, Fn&& term) {
  const std::size_t chunks = chunk_count(n, kPointChunk);
  std::vector<double> partial(chunks, 0.0);
  parallel_for(chunks, [&](std::size_t c) {
    const std::size_t last = std::min(n, (c + 1) * kPointChunk);
    double acc = 0.0;
    for (std::size_t i = c * kPointChunk; i < last; ++i) acc += term(i);
    partial[c] = acc;
  });
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

Matrix<double> kmeans_plus_plus(const MatrixView<float>& points, std::size_t k, Xoshiro256& rng) {
  const std::size_t n = points.rows();
  const std::size_t dims = points.cols();
  Matrix<double> centroids(k, dims);
  std::vector<std::size_t> chosen;
  chosen.reserve(k);

  auto take = [&](std::size_t idx, std::size_t slot) {
    chosen.push_back(idx);
    const auto src = points.row(idx);
    std::copy(src.begin(), src.end(), centroids.row(slot).begin());
  };

  take(rng.below(n), 0);
  std::vector<double> d2(n);
  const std::size_t chunks = chunk_count(n, kPointChunk);
  auto refresh = [&](std::size_t center, bool first) {
    const auto c = points.row(center);
    parallel_for(chunks, [&](std::size_t ch) {
      const std::size_t last = std::min(n, (ch + 1) * kPointChunk);
      for (std::size_t i = ch * kPointChunk; i < last; ++i) {
        const double d = squared_distance(points.row(i), c);
        d2[i] = first ? d : std::min(d2[i], d);
      }
    });
  };
  refresh(chosen[0], true);

  for (std::size_t slot = 1; slot < k; ++slot) {
    const double total = chunked_sum(n, [&](std::size_t i) { return d2[i]; });
    const double target = rng.uniform() * total;
    std::size_t pick = n;
    if (total > 0.0) {
      double cumulative = 0.0;
      std::size_t last_positive = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (d2[i] <= 0.0) continue;
        last_positive = i;
        cumulative += d2[i];
        if (cumulative > target) {
          pick = i;
          break;
        }
      }
      if (pick == n) pick = last_positive;
    } else {
      // Every remaining point coincides with a chosen center.
      for (std::size_t i = 0; i < n && pick == n; ++i) {
        if (std::find(chosen.begin(), chosen.end(), i) == chosen.end()) pick = i;
      }
    }
    take(pick, slot);
    refresh(pick, false);
  }
  return centroids;
}

}  // namespace

std::vector<std::uint32_t> kmeans_assign(const MatrixView<double>& centroids, const MatrixView<float>& points) {
  if (centroids.cols() != points.cols()) {
    throw ShapeError("kmeans_assign: centroid dims " + std::to_string(centroids.cols()) + " != point dims " +
                     std::to_string(points.cols()));
  }
  if (centroids.rows() == 0) throw ShapeError("kmeans_assign: no centroids");
  std::vector<std::uint32_t> labels(points.rows());
  parallel_for(chunk_count(points.rows(), kPointChunk), [&](std::size_t c) {
    const std::size_t last = std::min(points.rows(), (c + 1) * kPointChunk);
    for (std::size_t i = c * kPointChunk; i < last; ++i) labels[i] = nearest(points.row(i), centroids);
  });
  return labels;
}

double clustering_inertia(const MatrixView<float>& points, const std::vector<std::uint32_t>& labels,
                          const MatrixView<double>& centroids) {
  if (labels.size() != points.rows()) throw ShapeError("clustering_inertia: label count mismatch");
  return chunked_sum(points.rows(),
                     [&](std::size_t i) { return squared_distance(points.row(i), centroids.row(labels[i])); });
}

Clustering kmeans_fit(const MatrixView<float>& points, std::size_t k, std::uint64_t seed,
                      const KMeansParams& params) {
  const std::size_t n = points.rows();
  const std::size_t dims = points.cols();
  if (k == 0) throw RangeError("kmeans_fit: k must be at least 1");
  if (n < k) {
    throw RangeError("kmeans_fit: " + std::to_string(n) + " points cannot form " + std::to_string(k) + " clusters");
  }

  Xoshiro256 rng(seed);
  Clustering result;
  result.centroids = kmeans_plus_plus(points, k, rng);
  result.labels.assign(n, std::numeric_limits<std::uint32_t>::max());

  const std::size_t chunks = chunk_count(n, kPointChunk);
  std::vector<std::uint32_t> next(n);
  std::vector<std::uint8_t> chunk_changed(chunks);
  std::vector<Matrix<double>> partial_sums(chunks);
  double previous = std::numeric_limits<double>::infinity();

  for (std::size_t iter = 1; iter <= params.max_iters; ++iter) {
    const auto centroid_view = result.centroids.view();
    parallel_for(chunks, [&](std::size_t c) {
      const std::size_t last = std::min(n, (c + 1) * kPointChunk);
      bool changed = false;
      for (std::size_t i = c * kPointChunk; i < last; ++i) {
        next[i] = nearest(points.row(i), centroid_view);
        changed |= next[i] != result.labels[i];
      }
      chunk_changed[c] = changed;
    });
    const bool changed = std::any_of(chunk_changed.begin(), chunk_changed.end(), [](auto v) { return v != 0; });

    std::vector<std::size_t> counts(k, 0);
    for (auto l : next) ++counts[l];
    for (std::size_t empty = 0; empty < k; ++empty) {
      if (counts[empty] != 0) continue;
      std::size_t far = n;
      double far_dist = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (counts[next[i]] < 2) continue;
        const double d = squared_distance(points.row(i), result.centroids.row(next[i]));
        if (d > far_dist) {
          far_dist = d;
          far = i;
        }
      }
      // n >= k guarantees a donor cluster with two or more members.
      if (far == n) throw InternalError("kmeans_fit: no donor point for an empty cluster");
      --counts[next[far]];
      next[far] = static_cast<std::uint32_t>(empty);
      counts[empty] = 1;
      const auto src = points.row(far);
      std::copy(src.begin(), src.end(), result.centroids.row(empty).begin());
    }
    result.labels.swap(next);

    parallel_for(chunks, [&](std::size_t c) {
      auto& sums = partial_sums[c];
      sums = Matrix<double>(k, dims);
      const std::size_t last = std::min(n, (c + 1) * kPointChunk);
      for (std::size_t i = c * kPointChunk; i < last; ++i) {
        const auto x = points.row(i);
        auto s = sums.row(result.labels[i]);
        for (std::size_t j = 0; j < dims; ++j) s[j] += static_cast<double>(x[j]);
      }
    });
    Matrix<double> sums(k, dims);
    for (std::size_t c = 0; c < chunks; ++c) {
      for (std::size_t v = 0; v < sums.values().size(); ++v) sums.values()[v] += partial_sums[c].values()[v];
    }
    for (std::size_t c = 0; c < k; ++c) {
      auto dst = result.centroids.row(c);
      const auto s = sums.row(c);
      for (std::size_t j = 0; j < dims; ++j) dst[j] = s[j] / static_cast<double>(counts[c]);
    }

    const double inertia = clustering_inertia(points, result.labels, result.centroids.view());
    assert(inertia <= previous);
    result.inertia = inertia;
    result.inertia_history.push_back(inertia);
    result.iterations = iter;

    if (!changed || inertia == 0.0 || (previous - inertia) < params.tol * previous) {
      result.converged = true;
      break;
    }
    previous = inertia;
  }
  return result;
}

}  // namespace hrlc
