#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hrlc/error.hpp"

namespace hrlc {

// Non-owning row-major view over a rows x cols block.
template <class T>
class MatrixView {
 public:
  MatrixView() = default;
  MatrixView(std::span<const T> data, std::size_t rows, std::size_t cols)
      : data_(data), rows_(rows), cols_(cols) {
    if (data.size() != rows * cols) {
      throw ShapeError("matrix view: buffer size does not match rows*cols");
    }
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::span<const T> data() const noexcept { return data_; }

  std::span<const T> row(std::size_t i) const {
    return data_.subspan(i * cols_, cols_);
  }
  const T& operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }

  // Rows [first, first + count).
  MatrixView slice_rows(std::size_t first, std::size_t count) const {
    if (first + count > rows_) throw ShapeError("matrix view: row slice out of range");
    return MatrixView(data_.subspan(first * cols_, count * cols_), count, cols_);
  }

 private:
  std::span<const T> data_;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
};

// Owning row-major dense matrix.
template <class T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<T> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows * cols) {
      throw ShapeError("matrix: buffer size does not match rows*cols");
    }
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  std::span<T> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const T> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::vector<T>& values() noexcept { return data_; }
  const std::vector<T>& values() const noexcept { return data_; }

  MatrixView<T> view() const { return MatrixView<T>(data_, rows_, cols_); }
  operator MatrixView<T>() const { return view(); }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

}  // namespace hrlc
