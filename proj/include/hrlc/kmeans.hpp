#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "hrlc/matrix.hpp"

namespace hrlc {

struct KMeansParams {
  std::size_t max_iters = 100;
  // Stop once (previous - current) / previous inertia drops below this.
  double tol = 1e-4;
};

// Result of one k-means run. Every id in [0, k) owns at least one point and
// `inertia` is recomputable from labels and centroids.
struct Clustering {
  std::vector<std::uint32_t> labels;
  Matrix<double> centroids;  // k x d
  double inertia = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  // Inertia after each Lloyd iteration; non-increasing.
  std::vector<double> inertia_history;

  std::size_t k() const noexcept { return centroids.rows(); }
};

// Lloyd's algorithm with k-means++ seeding.
//
// Seeding draws from xoshiro256** seeded through splitmix64: one draw picks
// the first center uniformly, then one draw per further center samples
// proportionally to the squared distance to the nearest chosen center. Ties
// in assignment go to the lowest centroid index. A cluster left empty after
// assignment takes the point farthest from its own centroid among clusters
// with more than one member (lowest point index on ties).
Clustering kmeans_fit(const MatrixView<float>& points, std::size_t k, std::uint64_t seed,
                      const KMeansParams& params = {});

// Nearest-centroid labels, ties to the lowest index.
std::vector<std::uint32_t> kmeans_assign(const MatrixView<double>& centroids, const MatrixView<float>& points);

// Sum of squared distances from each point to its labelled centroid.
double clustering_inertia(const MatrixView<float>& points, const std::vector<std::uint32_t>& labels,
                          const MatrixView<double>& centroids);

}  // namespace hrlc
