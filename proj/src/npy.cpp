#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <optional>
#include <string_view>

#include "hrlc/tensor_io.hpp"

namespace hrlc {

namespace {

constexpr std::uint8_t kMagic[6] = {0x93, 'N', 'U', 'M', 'P', 'Y'};
constexpr std::size_t kPreludeSize = 10;  // magic + version + header length
constexpr std::size_t kAlignment = 64;

struct NpyHeader {
  std::string descr;
  std::optional<bool> fortran_order;
  std::optional<std::vector<std::size_t>> shape;
};

// Parser for the Python-literal dict NumPy writes into the header.
class HeaderParser {
 public:
  explicit HeaderParser(std::string_view text) : text_(text) {}

  NpyHeader parse() {
    NpyHeader header;
    bool have_descr = false;
    expect('{');
    while (true) {
      skip_ws();
      if (peek() == '}') {
        ++pos_;
        break;
      }
      const std::string key = parse_string();
      expect(':');
      skip_ws();
      if (key == "descr") {
        header.descr = parse_string();
        have_descr = true;
      } else if (key == "fortran_order") {
        header.fortran_order = parse_bool();
      } else if (key == "shape") {
        header.shape = parse_tuple();
      } else {
        fail("unknown header key '" + key + "'");
      }
      skip_ws();
      if (peek() == ',') {
        ++pos_;
      } else if (peek() != '}') {
        fail("expected ',' or '}'");
      }
    }
    skip_ws();
    if (pos_ != text_.size()) fail("trailing characters after header dict");
    if (!have_descr || !header.fortran_order || !header.shape) fail("header is missing a required key");
    return header;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw FormatError("npy header: " + msg + " at offset " + std::to_string(pos_));
  }

  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  void skip_ws() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n')) ++pos_;
  }

  void expect(char c) {
    skip_ws();
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  std::string parse_string() {
    skip_ws();
    const char quote = peek();
    if (quote != '\'' && quote != '"') fail("expected a quoted string");
    const auto end = text_.find(quote, pos_ + 1);
    if (end == std::string_view::npos) fail("unterminated string");
    std::string out(text_.substr(pos_ + 1, end - pos_ - 1));
    pos_ = end + 1;
    return out;
  }

  bool parse_bool() {
    if (text_.substr(pos_, 4) == "True") {
      pos_ += 4;
      return true;
    }
    if (text_.substr(pos_, 5) == "False") {
      pos_ += 5;
      return false;
    }
    fail("expected True or False");
  }

  std::vector<std::size_t> parse_tuple() {
    std::vector<std::size_t> dims;
    expect('(');
    while (true) {
      skip_ws();
      if (peek() == ')') {
        ++pos_;
        return dims;
      }
      if (!std::isdigit(static_cast<unsigned char>(peek()))) fail("expected a dimension");
      std::size_t v = 0;
      while (std::isdigit(static_cast<unsigned char>(peek()))) {
        v = v * 10 + static_cast<std::size_t>(peek() - '0');
        ++pos_;
      }
      dims.push_back(v);
      skip_ws();
      if (peek() == ',') {
        ++pos_;
      } else if (peek() != ')') {
        fail("expected ',' or ')'");
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

std::uint32_t to_le(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    return ((v & 0xFF) << 24) | ((v & 0xFF00) << 8) | ((v >> 8) & 0xFF00) | (v >> 24);
  }
  return v;
}

}  // namespace

std::vector<std::uint8_t> encode_npy(const FeatureGrid& grid) {
  if (grid.values.size() != grid.height * grid.width * grid.dims) {
    throw ShapeError("write_feature_tensor: value count does not match shape");
  }
  std::string header = "{'descr': '<f4', 'fortran_order': False, 'shape': (" + std::to_string(grid.height) +
                       ", " + std::to_string(grid.width) + ", " + std::to_string(grid.dims) + "), }";
  const std::size_t unpadded = kPreludeSize + header.size() + 1;
  header.append((kAlignment - unpadded % kAlignment) % kAlignment, ' ');
  header.push_back('\n');
  if (header.size() > 0xFFFF) throw FormatError("npy header too long for version 1.0");

  std::string prelude(std::begin(kMagic), std::end(kMagic));
  prelude += '\x01';
  prelude += '\x00';
  prelude += static_cast<char>(header.size() & 0xFF);
  prelude += static_cast<char>(header.size() >> 8);
  prelude += header;

  std::vector<std::uint8_t> out(prelude.begin(), prelude.end());
  const std::size_t payload = out.size();
  out.resize(payload + grid.values.size() * 4);
  for (std::size_t i = 0; i < grid.values.size(); ++i) {
    const std::uint32_t bits = to_le(std::bit_cast<std::uint32_t>(grid.values[i]));
    std::memcpy(out.data() + payload + i * 4, &bits, 4);
  }
  return out;
}

FeatureGrid decode_npy(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kPreludeSize || !std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin())) {
    throw FormatError("npy: bad magic");
  }
  if (bytes[6] != 0x01 || bytes[7] != 0x00) {
    throw FormatError("npy: unsupported version " + std::to_string(bytes[6]) + "." + std::to_string(bytes[7]));
  }
  const std::size_t header_len = bytes[8] | (static_cast<std::size_t>(bytes[9]) << 8);
  if (bytes.size() < kPreludeSize + header_len) throw FormatError("npy: truncated header");
  const std::string_view text(reinterpret_cast<const char*>(bytes.data() + kPreludeSize), header_len);
  if (text.empty() || text.back() != '\n') throw FormatError("npy: header is not newline-terminated");

  const NpyHeader header = HeaderParser(text).parse();
  if (header.descr != "<f4") throw ShapeError("npy: dtype '" + header.descr + "' is not little-endian float32");
  if (*header.fortran_order) throw FormatError("npy: fortran_order arrays are not supported");

  std::vector<std::size_t> shape = *header.shape;
  if (shape.size() == 4 && shape[0] == 1) shape.erase(shape.begin());
  if (shape.size() != 3) throw ShapeError("npy: expected rank 3 (H, W, D) or (1, H, W, D)");

  FeatureGrid grid(shape[0], shape[1], shape[2]);
  const std::size_t payload = kPreludeSize + header_len;
  if (bytes.size() - payload != grid.values.size() * 4) {
    throw FormatError("npy: payload size " + std::to_string(bytes.size() - payload) + " does not match shape");
  }
  for (std::size_t i = 0; i < grid.values.size(); ++i) {
    std::uint32_t bits;
    std::memcpy(&bits, bytes.data() + payload + i * 4, 4);
    const float v = std::bit_cast<float>(to_le(bits));
    if (!std::isfinite(v)) throw DataError("npy: non-finite value at element " + std::to_string(i));
    grid.values[i] = v;
  }
  return grid;
}

FeatureGrid read_feature_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot open " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_npy(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  } catch (const ShapeError& e) {
    throw ShapeError(path.string() + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_feature_tensor(const FeatureGrid& grid, const std::filesystem::path& path) {
  for (float v : grid.values) {
    if (!std::isfinite(v)) throw DataError("write_feature_tensor: non-finite value");
  }
  const auto bytes = encode_npy(grid);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace hrlc
