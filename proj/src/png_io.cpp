#include <png.h>

#include <csetjmp>
#include <cstring>
#include <fstream>
#include <iterator>

#include "hrlc/tensor_io.hpp"

namespace hrlc {

namespace fs = std::filesystem;

namespace {

struct RawImage {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  int color_type = 0;
  int bit_depth = 0;
  std::vector<std::uint8_t> pixels;  // packed rows, no padding
};

struct ReadCursor {
  const std::uint8_t* data;
  std::size_t size;
  std::size_t pos;
};

void read_callback(png_structp png, png_bytep out, png_size_t n) {
  auto* cur = static_cast<ReadCursor*>(png_get_io_ptr(png));
  if (cur->pos + n > cur->size) png_error(png, "unexpected end of file");
  std::memcpy(out, cur->data + cur->pos, n);
  cur->pos += n;
}

void write_callback(png_structp png, png_bytep data, png_size_t n) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + n);
}

void flush_callback(png_structp) {}

// Returns an empty string on success, otherwise the libpng error message.
// No C++ object with a destructor lives between setjmp and the libpng calls.
std::string decode_png(const std::vector<std::uint8_t>& bytes, RawImage& img) {
  static thread_local char message[256];
  message[0] = '\0';
  auto on_error = [](png_structp png, png_const_charp msg) {
    std::strncpy(message, msg, sizeof message - 1);
    message[sizeof message - 1] = '\0';
    std::longjmp(png_jmpbuf(png), 1);
  };

  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) return "not a PNG file";
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, on_error, nullptr);
  if (!png) return "png_create_read_struct failed";
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    return "png_create_info_struct failed";
  }
  ReadCursor cursor{bytes.data(), bytes.size(), 0};
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return message[0] ? message : "libpng error";
  }
  png_set_read_fn(png, &cursor, read_callback);
  png_read_info(png, info);
  img.width = png_get_image_width(png, info);
  img.height = png_get_image_height(png, info);
  img.color_type = png_get_color_type(png, info);
  img.bit_depth = png_get_bit_depth(png, info);
  png_set_interlace_handling(png);
  png_read_update_info(png, info);
  const png_size_t rowbytes = png_get_rowbytes(png, info);
  img.pixels.resize(rowbytes * img.height);
  rows.resize(img.height);
  for (std::uint32_t y = 0; y < img.height; ++y) rows[y] = img.pixels.data() + y * rowbytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return {};
}

std::string encode_png(const RawImage& img, std::vector<std::uint8_t>& out) {
  static thread_local char message[256];
  message[0] = '\0';
  auto on_error = [](png_structp png, png_const_charp msg) {
    std::strncpy(message, msg, sizeof message - 1);
    message[sizeof message - 1] = '\0';
    std::longjmp(png_jmpbuf(png), 1);
  };

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, on_error, nullptr);
  if (!png) return "png_create_write_struct failed";
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    return "png_create_info_struct failed";
  }
  const int channels = img.color_type == PNG_COLOR_TYPE_RGB ? 3 : 1;
  const std::size_t rowbytes = static_cast<std::size_t>(img.width) * channels * (img.bit_depth / 8);
  std::vector<png_bytep> rows(img.height);
  for (std::uint32_t y = 0; y < img.height; ++y) {
    rows[y] = const_cast<png_bytep>(img.pixels.data() + y * rowbytes);
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return message[0] ? message : "libpng error";
  }
  png_set_write_fn(png, &out, write_callback, flush_callback);
  // Fixed encoder settings keep the output byte-identical across runs.
  png_set_compression_level(png, 6);
  png_set_filter(png, PNG_FILTER_TYPE_BASE, PNG_FILTER_NONE);
  png_set_IHDR(png, info, img.width, img.height, img.bit_depth, img.color_type, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return {};
}

RawImage load_png(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot open " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  RawImage img;
  if (auto err = decode_png(bytes, img); !err.empty()) throw FormatError(path.string() + ": " + err);
  return img;
}

void save_png(const RawImage& img, const fs::path& path) {
  std::vector<std::uint8_t> bytes;
  if (auto err = encode_png(img, bytes); !err.empty()) throw IoError(path.string() + ": " + err);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace

MaskImage read_mask(const fs::path& path) {
  const RawImage img = load_png(path);
  if (img.bit_depth != 8 || (img.color_type != PNG_COLOR_TYPE_GRAY && img.color_type != PNG_COLOR_TYPE_PALETTE)) {
    throw FormatError(path.string() + ": mask must be an 8-bit single-channel PNG (got color type " +
                      std::to_string(img.color_type) + ", depth " + std::to_string(img.bit_depth) + ")");
  }
  return MaskImage(img.height, img.width, img.pixels);
}

void write_mask(const MaskImage& mask, const fs::path& path) {
  RawImage img{static_cast<std::uint32_t>(mask.width), static_cast<std::uint32_t>(mask.height), PNG_COLOR_TYPE_GRAY,
               8, mask.values};
  save_png(img, path);
}

LabelGrid read_label_map(const fs::path& path) {
  const RawImage img = load_png(path);
  if (img.color_type != PNG_COLOR_TYPE_GRAY || (img.bit_depth != 8 && img.bit_depth != 16)) {
    throw FormatError(path.string() + ": label map must be an 8- or 16-bit grayscale PNG");
  }
  LabelGrid grid(img.height, img.width);
  for (std::size_t i = 0; i < grid.values.size(); ++i) {
    grid.values[i] = img.bit_depth == 8 ? img.pixels[i]
                                        : (static_cast<std::uint32_t>(img.pixels[2 * i]) << 8) | img.pixels[2 * i + 1];
  }
  return grid;
}

void write_label_map(const LabelGrid& grid, const fs::path& path) {
  RawImage img{static_cast<std::uint32_t>(grid.width), static_cast<std::uint32_t>(grid.height), PNG_COLOR_TYPE_GRAY,
               16, {}};
  img.pixels.resize(grid.values.size() * 2);
  for (std::size_t i = 0; i < grid.values.size(); ++i) {
    const auto v = grid.values[i];
    if (v > 0xFFFF) throw RangeError("label " + std::to_string(v) + " does not fit a 16-bit PNG");
    img.pixels[2 * i] = static_cast<std::uint8_t>(v >> 8);
    img.pixels[2 * i + 1] = static_cast<std::uint8_t>(v & 0xFF);
  }
  save_png(img, path);
}

void write_rgb_png(const RgbImage& image, const fs::path& path) {
  RawImage img{static_cast<std::uint32_t>(image.width), static_cast<std::uint32_t>(image.height), PNG_COLOR_TYPE_RGB,
               8, {}};
  img.pixels.reserve(image.values.size() * 3);
  for (const auto& c : image.values) {
    img.pixels.push_back(c.r);
    img.pixels.push_back(c.g);
    img.pixels.push_back(c.b);
  }
  save_png(img, path);
}

RgbImage read_rgb_png(const fs::path& path) {
  const RawImage img = load_png(path);
  if (img.color_type != PNG_COLOR_TYPE_RGB || img.bit_depth != 8) {
    throw FormatError(path.string() + ": expected an 8-bit RGB PNG");
  }
  RgbImage out(img.height, img.width);
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    out.values[i] = {img.pixels[3 * i], img.pixels[3 * i + 1], img.pixels[3 * i + 2]};
  }
  return out;
}

}  // namespace hrlc
