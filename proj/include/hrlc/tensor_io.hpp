#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hrlc/matrix.hpp"

namespace hrlc {

// One frame of per-pixel features, (H, W, D) in C order.
struct FeatureGrid {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t dims = 0;
  std::vector<float> values;

  FeatureGrid() = default;
  FeatureGrid(std::size_t h, std::size_t w, std::size_t d, float fill = 0.0f)
      : height(h), width(w), dims(d), values(h * w * d, fill) {}

  float& at(std::size_t y, std::size_t x, std::size_t k) { return values[(y * width + x) * dims + k]; }
  float at(std::size_t y, std::size_t x, std::size_t k) const { return values[(y * width + x) * dims + k]; }

  bool operator==(const FeatureGrid&) const = default;
};

// Ordered frames sharing one (H, W, D). Frames are stored back to back so
// the whole sequence is also an (n*H*W) x D row-major matrix.
class FeatureSequence {
 public:
  FeatureSequence() = default;
  FeatureSequence(std::size_t height, std::size_t width, std::size_t dims)
      : height_(height), width_(width), dims_(dims) {}

  // Throws ShapeError if the frame shape differs, DataError on non-finite
  // values or a duplicate id.
  void append(const FeatureGrid& frame, std::string frame_id);
  void append(std::span<const float> values, std::string frame_id);

  std::size_t size() const noexcept { return frame_ids_.size(); }
  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t dims() const noexcept { return dims_; }
  std::size_t pixels_per_frame() const noexcept { return height_ * width_; }

  const std::vector<std::string>& frame_ids() const noexcept { return frame_ids_; }
  std::span<const float> frame(std::size_t i) const;
  FeatureGrid frame_grid(std::size_t i) const;

  // All pixels of frames [first, first + count) as rows.
  MatrixView<float> rows(std::size_t first_frame, std::size_t count) const;
  MatrixView<float> rows() const { return rows(0, size()); }

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::size_t dims_ = 0;
  std::vector<float> values_;
  std::vector<std::string> frame_ids_;
};

// Row-major grid of non-negative integer labels.
template <class T>
struct Grid {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<T> values;

  Grid() = default;
  Grid(std::size_t h, std::size_t w, T fill = T{}) : height(h), width(w), values(h * w, fill) {}
  Grid(std::size_t h, std::size_t w, std::vector<T> v) : height(h), width(w), values(std::move(v)) {
    if (values.size() != h * w) throw ShapeError("grid: buffer size does not match h*w");
  }

  T& at(std::size_t y, std::size_t x) { return values[y * width + x]; }
  const T& at(std::size_t y, std::size_t x) const { return values[y * width + x]; }

  bool operator==(const Grid&) const = default;
};

using LabelGrid = Grid<std::uint32_t>;
// Ground-truth object ids; 0 is background.
using MaskImage = Grid<std::uint8_t>;

struct LabelMapSequence {
  std::vector<LabelGrid> maps;
  std::uint32_t num_labels = 0;

  // Throws ShapeError on mixed frame sizes and RangeError on a label
  // >= num_labels.
  void validate() const;
  bool operator==(const LabelMapSequence&) const = default;
};

FeatureGrid read_feature_tensor(const std::filesystem::path& path);
void write_feature_tensor(const FeatureGrid& grid, const std::filesystem::path& path);

// Raw NPY encoding, exposed for tests and for the encoder side.
std::vector<std::uint8_t> encode_npy(const FeatureGrid& grid);
FeatureGrid decode_npy(std::span<const std::uint8_t> bytes);

// Loads every file in `dir` whose name matches the glob `pattern`, in
// lexicographic filename order.
FeatureSequence load_sequence(const std::filesystem::path& dir, const std::string& pattern = "*.npy");

MaskImage read_mask(const std::filesystem::path& path);
void write_mask(const MaskImage& mask, const std::filesystem::path& path);

// 8- or 16-bit single-channel PNG.
LabelGrid read_label_map(const std::filesystem::path& path);
void write_label_map(const LabelGrid& grid, const std::filesystem::path& path);

// Writes 00000.png, 00001.png, ... as 16-bit grayscale.
void write_label_maps(const LabelMapSequence& seq, const std::filesystem::path& dir);
// Reads every *.png in `dir` in lexicographic order; num_labels = max + 1.
LabelMapSequence read_label_maps(const std::filesystem::path& dir);

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  bool operator==(const Rgb&) const = default;
};
using RgbImage = Grid<Rgb>;

void write_rgb_png(const RgbImage& image, const std::filesystem::path& path);
RgbImage read_rgb_png(const std::filesystem::path& path);

// Sorted regular files in `dir` whose filename matches `pattern`.
std::vector<std::filesystem::path> list_matching(const std::filesystem::path& dir, const std::string& pattern);

// Writes to a temporary sibling and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_file_atomic(const std::filesystem::path& path, const std::string& text);

}  // namespace hrlc
