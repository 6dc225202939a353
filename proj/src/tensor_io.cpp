#include <fnmatch.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "hrlc/tensor_io.hpp"

namespace hrlc {

namespace fs = std::filesystem;

void FeatureSequence::append(const FeatureGrid& frame, std::string frame_id) {
  if (size() == 0 && height_ == 0 && width_ == 0 && dims_ == 0) {
    height_ = frame.height;
    width_ = frame.width;
    dims_ = frame.dims;
  }
  if (frame.height != height_ || frame.width != width_ || frame.dims != dims_) {
    throw ShapeError("frame '" + frame_id + "' has shape (" + std::to_string(frame.height) + ", " +
                     std::to_string(frame.width) + ", " + std::to_string(frame.dims) + "), expected (" +
                     std::to_string(height_) + ", " + std::to_string(width_) + ", " + std::to_string(dims_) + ")");
  }
  append(frame.values, std::move(frame_id));
}

void FeatureSequence::append(std::span<const float> values, std::string frame_id) {
  if (values.size() != height_ * width_ * dims_ || values.empty()) {
    throw ShapeError("frame '" + frame_id + "' has the wrong number of values");
  }
  if (std::find(frame_ids_.begin(), frame_ids_.end(), frame_id) != frame_ids_.end()) {
    throw DataError("duplicate frame id '" + frame_id + "'");
  }
  for (float v : values) {
    if (!std::isfinite(v)) throw DataError("frame '" + frame_id + "' contains a non-finite value");
  }
  values_.insert(values_.end(), values.begin(), values.end());
  frame_ids_.push_back(std::move(frame_id));
}

std::span<const float> FeatureSequence::frame(std::size_t i) const {
  const std::size_t stride = height_ * width_ * dims_;
  return std::span<const float>(values_).subspan(i * stride, stride);
}

FeatureGrid FeatureSequence::frame_grid(std::size_t i) const {
  FeatureGrid g(height_, width_, dims_);
  const auto f = frame(i);
  std::copy(f.begin(), f.end(), g.values.begin());
  return g;
}

MatrixView<float> FeatureSequence::rows(std::size_t first_frame, std::size_t count) const {
  if (first_frame + count > size()) throw ShapeError("frame range out of bounds");
  const std::size_t stride = height_ * width_ * dims_;
  return MatrixView<float>(std::span<const float>(values_).subspan(first_frame * stride, count * stride),
                           count * height_ * width_, dims_);
}

void LabelMapSequence::validate() const {
  for (std::size_t f = 0; f < maps.size(); ++f) {
    const auto& m = maps[f];
    if (m.height != maps.front().height || m.width != maps.front().width) {
      throw ShapeError("label map " + std::to_string(f) + " differs in size from frame 0");
    }
    for (auto v : m.values) {
      if (v >= num_labels) {
        throw RangeError("label " + std::to_string(v) + " in frame " + std::to_string(f) +
                         " is not below num_labels " + std::to_string(num_labels));
      }
    }
  }
}

std::vector<fs::path> list_matching(const fs::path& dir, const std::string& pattern) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw NotFoundError("not a directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (::fnmatch(pattern.c_str(), name.c_str(), 0) == 0) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });
  return out;
}

FeatureSequence load_sequence(const fs::path& dir, const std::string& pattern) {
  const auto files = list_matching(dir, pattern);
  if (files.empty()) throw NotFoundError("no files matching '" + pattern + "' in " + dir.string());
  FeatureSequence seq;
  for (const auto& file : files) {
    seq.append(read_feature_tensor(file), file.filename().string());
  }
  return seq;
}

namespace {
std::string frame_filename(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%05zu.png", i);
  return buf;
}
}  // namespace

void write_label_maps(const LabelMapSequence& seq, const fs::path& dir) {
  if (seq.num_labels > 65536) {
    throw RangeError("num_labels " + std::to_string(seq.num_labels) + " does not fit a 16-bit PNG");
  }
  seq.validate();
  fs::create_directories(dir);
  for (std::size_t i = 0; i < seq.maps.size(); ++i) {
    write_label_map(seq.maps[i], dir / frame_filename(i));
  }
}

LabelMapSequence read_label_maps(const fs::path& dir) {
  const auto files = list_matching(dir, "*.png");
  if (files.empty()) throw NotFoundError("no label maps in " + dir.string());
  LabelMapSequence seq;
  for (const auto& f : files) {
    seq.maps.push_back(read_label_map(f));
    for (auto v : seq.maps.back().values) seq.num_labels = std::max(seq.num_labels, v + 1);
  }
  seq.validate();
  return seq;
}

void write_file_atomic(const fs::path& path, std::span<const std::uint8_t> bytes) {
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp);
      throw IoError("write failed: " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw IoError("rename to " + path.string() + " failed: " + ec.message());
  }
}

void write_file_atomic(const fs::path& path, const std::string& text) {
  write_file_atomic(path, std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace hrlc
