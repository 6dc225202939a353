#include "hrlc/pca.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "hrlc/error.hpp"
#include "hrlc/parallel.hpp"
#include "hrlc/rng.hpp"

namespace hrlc {

namespace {

constexpr std::size_t kRowChunk = 4096;
// Chunks reduced per wave; bounds the number of live D x D partials.
constexpr std::size_t kWave = 16;

using RowMajorF = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const RowMajorF> as_eigen(const MatrixView<float>& m) {
  return {m.data().data(), static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols())};
}

Eigen::VectorXd column_mean(const MatrixView<float>& x) {
  const std::size_t chunks = chunk_count(x.rows(), kRowChunk);
  std::vector<Eigen::VectorXd> partial(chunks);
  parallel_for(chunks, [&](std::size_t c) {
    const std::size_t first = c * kRowChunk;
    const auto block = as_eigen(x.slice_rows(first, std::min(kRowChunk, x.rows() - first)));
    partial[c] = block.cast<double>().colwise().sum().transpose();
  });
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(x.cols()));
  for (const auto& p : partial) sum += p;
  return sum / static_cast<double>(x.rows());
}

Eigen::MatrixXd covariance(const MatrixView<float>& x, const Eigen::VectorXd& mean) {
  const auto dims = static_cast<Eigen::Index>(x.cols());
  const std::size_t chunks = chunk_count(x.rows(), kRowChunk);
  Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(dims, dims);
  std::vector<Eigen::MatrixXd> partial(std::min(kWave, chunks));
  for (std::size_t wave = 0; wave < chunks; wave += kWave) {
    const std::size_t in_wave = std::min(kWave, chunks - wave);
    parallel_for(in_wave, [&](std::size_t i) {
      const std::size_t first = (wave + i) * kRowChunk;
      const auto block = as_eigen(x.slice_rows(first, std::min(kRowChunk, x.rows() - first)));
      Eigen::MatrixXd centered = block.cast<double>();
      centered.rowwise() -= mean.transpose();
      partial[i].noalias() = centered.transpose() * centered;
    });
    for (std::size_t i = 0; i < in_wave; ++i) scatter += partial[i];
  }
  return scatter / static_cast<double>(x.rows() - 1);
}

Matrix<float> subsample_rows(const MatrixView<float>& x, std::size_t count, std::uint64_t seed) {
  std::vector<std::size_t> idx(x.rows());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Xoshiro256 rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    std::swap(idx[i], idx[i + rng.below(idx.size() - i)]);
  }
  idx.resize(count);
  std::sort(idx.begin(), idx.end());
  Matrix<float> out(count, x.cols());
  for (std::size_t i = 0; i < count; ++i) {
    const auto src = x.row(idx[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

}  // namespace

PcaModel pca_fit(const MatrixView<float>& samples, std::size_t d, const PcaOptions& options) {
  const std::size_t n = samples.rows();
  const std::size_t dims = samples.cols();
  if (n < 2) throw RangeError("pca_fit: need at least 2 samples, got " + std::to_string(n));
  if (d < 1 || d > std::min(n - 1, dims)) {
    throw RangeError("pca_fit: target dims " + std::to_string(d) + " outside [1, " +
                     std::to_string(std::min(n - 1, dims)) + "]");
  }

  Matrix<float> subsample;
  MatrixView<float> fit_rows = samples;
  if (options.max_rows > 0 && n > options.max_rows) {
    if (options.max_rows < d + 1) throw RangeError("pca_fit: max_rows too small for the target dims");
    subsample = subsample_rows(samples, options.max_rows, options.seed);
    fit_rows = subsample.view();
  }

  const Eigen::VectorXd mean = column_mean(fit_rows);
  const Eigen::MatrixXd cov = covariance(fit_rows, mean);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw InternalError("pca_fit: eigen-decomposition did not converge");

  // Eigen returns ascending eigenvalues.
  const Eigen::VectorXd& values = solver.eigenvalues();
  const Eigen::MatrixXd& vectors = solver.eigenvectors();
  const auto last = static_cast<Eigen::Index>(dims) - 1;
  std::size_t rank = 0;
  while (rank < dims && values(last - static_cast<Eigen::Index>(rank)) > kDegenerateEigenvalue) ++rank;

  if (rank < d) {
    if (!options.clamp_to_rank) {
      throw DegenerateError("pca_fit: covariance rank " + std::to_string(rank) + " is below the requested " +
                                std::to_string(d) + " dims",
                            rank);
    }
    d = std::max<std::size_t>(rank, 1);
  }

  PcaModel model;
  model.mean.assign(mean.data(), mean.data() + mean.size());
  model.basis = Matrix<double>(dims, d);
  model.explained_variance.resize(d);
  for (std::size_t j = 0; j < d; ++j) {
    const Eigen::Index src = last - static_cast<Eigen::Index>(j);
    model.explained_variance[j] = std::max(0.0, values(src));

    std::size_t pivot = 0;
    for (std::size_t i = 1; i < dims; ++i) {
      if (std::abs(vectors(static_cast<Eigen::Index>(i), src)) >
          std::abs(vectors(static_cast<Eigen::Index>(pivot), src))) {
        pivot = i;
      }
    }
    const double sign = vectors(static_cast<Eigen::Index>(pivot), src) < 0.0 ? -1.0 : 1.0;
    for (std::size_t i = 0; i < dims; ++i) model.basis(i, j) = sign * vectors(static_cast<Eigen::Index>(i), src);
  }
  return model;
}

Matrix<float> pca_transform(const PcaModel& model, const MatrixView<float>& samples) {
  const std::size_t dims = model.input_dims();
  const std::size_t out_dims = model.output_dims();
  if (samples.cols() != dims) {
    throw ShapeError("pca_transform: samples have " + std::to_string(samples.cols()) + " dims, model expects " +
                     std::to_string(dims));
  }
  Matrix<float> out(samples.rows(), out_dims);
  const std::size_t chunks = chunk_count(samples.rows(), kRowChunk);
  parallel_for(chunks, [&](std::size_t c) {
    const std::size_t first = c * kRowChunk;
    const std::size_t last = std::min(samples.rows(), first + kRowChunk);
    std::vector<double> acc(out_dims);
    for (std::size_t r = first; r < last; ++r) {
      const auto x = samples.row(r);
      std::fill(acc.begin(), acc.end(), 0.0);
      for (std::size_t i = 0; i < dims; ++i) {
        const double centered = static_cast<double>(x[i]) - model.mean[i];
        const auto basis_row = model.basis.row(i);
        for (std::size_t j = 0; j < out_dims; ++j) acc[j] += basis_row[j] * centered;
      }
      for (std::size_t j = 0; j < out_dims; ++j) out(r, j) = static_cast<float>(acc[j]);
    }
  });
  return out;
}

Matrix<float> pca_inverse_transform(const PcaModel& model, const MatrixView<float>& reduced) {
  const std::size_t dims = model.input_dims();
  const std::size_t out_dims = model.output_dims();
  if (reduced.cols() != out_dims) throw ShapeError("pca_inverse_transform: wrong reduced dims");
  Matrix<float> out(reduced.rows(), dims);
  for (std::size_t r = 0; r < reduced.rows(); ++r) {
    const auto y = reduced.row(r);
    for (std::size_t i = 0; i < dims; ++i) {
      double acc = model.mean[i];
      for (std::size_t j = 0; j < out_dims; ++j) acc += model.basis(i, j) * static_cast<double>(y[j]);
      out(r, i) = static_cast<float>(acc);
    }
  }
  return out;
}

}  // namespace hrlc
