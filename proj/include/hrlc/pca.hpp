#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "hrlc/matrix.hpp"

namespace hrlc {

// Linear map from D input dims to d principal components.
struct PcaModel {
  std::vector<double> mean;                 // D
  Matrix<double> basis;                     // D x d, orthonormal columns
  std::vector<double> explained_variance;   // d, non-increasing

  std::size_t input_dims() const noexcept { return basis.rows(); }
  std::size_t output_dims() const noexcept { return basis.cols(); }

  bool operator==(const PcaModel&) const = default;
};

struct PcaOptions {
  // Fit with d = min(d, attained rank) instead of throwing DegenerateError.
  // An all-constant input keeps one zero-variance component.
  bool clamp_to_rank = false;
  // Fit on a seeded uniform subsample of this many rows when N exceeds it.
  // 0 fits on every row.
  std::size_t max_rows = 0;
  std::uint64_t seed = 0;
};

// Eigenvalues at or below this count as zero when deciding the rank.
inline constexpr double kDegenerateEigenvalue = 1e-12;

// Top-d eigenvectors of the sample covariance (divisor N-1), sorted by
// descending eigenvalue. Each column's largest-magnitude entry is made
// non-negative (first index on ties).
PcaModel pca_fit(const MatrixView<float>& samples, std::size_t d, const PcaOptions& options = {});

// Row i of the result is basis^T (x_i - mean).
Matrix<float> pca_transform(const PcaModel& model, const MatrixView<float>& samples);

// mean + basis * y for every row y.
Matrix<float> pca_inverse_transform(const PcaModel& model, const MatrixView<float>& reduced);

}  // namespace hrlc
