#include <doctest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <random>

#include "hrlc/error.hpp"
#include "hrlc/tensor_io.hpp"
#include "test_util.hpp"

using namespace hrlc;
using hrlc::testing::TempDir;

namespace {

// Hand-assembled NPY v1.0 file with an arbitrary header dict.
std::vector<std::uint8_t> raw_npy(const std::string& dict, const std::vector<float>& payload,
                                  std::uint8_t major = 1) {
  std::string header = dict;
  const std::size_t unpadded = 10 + header.size() + 1;
  header.append((64 - unpadded % 64) % 64, ' ');
  header.push_back('\n');
  std::vector<std::uint8_t> out = {0x93, 'N', 'U', 'M', 'P', 'Y', major, 0x00,
                                   static_cast<std::uint8_t>(header.size() & 0xFF),
                                   static_cast<std::uint8_t>(header.size() >> 8)};
  out.insert(out.end(), header.begin(), header.end());
  const std::size_t at = out.size();
  out.resize(at + payload.size() * 4);
  std::memcpy(out.data() + at, payload.data(), payload.size() * 4);
  return out;
}

std::size_t data_offset(const std::vector<std::uint8_t>& npy) { return 10 + (npy[8] | (npy[9] << 8)); }

FeatureGrid random_grid(std::mt19937& rng, std::size_t h, std::size_t w, std::size_t d) {
  std::normal_distribution<float> dist(0.0f, 3.0f);
  FeatureGrid g(h, w, d);
  for (auto& v : g.values) v = dist(rng);
  return g;
}

}  // namespace

TEST_CASE("npy writer emits the documented layout") {
  const FeatureGrid zeros(2, 2, 3);
  const auto bytes = encode_npy(zeros);
  const std::size_t offset = data_offset(bytes);
  CHECK(offset % 64 == 0);
  CHECK(bytes.size() - offset == 48);
  CHECK(bytes[6] == 0x01);
  CHECK(bytes[7] == 0x00);
  const std::string header(bytes.begin() + 10, bytes.begin() + static_cast<long>(offset));
  CHECK(header.rfind("{'descr': '<f4', 'fortran_order': False, 'shape': (2, 2, 3), }", 0) == 0);
  CHECK(header.back() == '\n');
}

TEST_CASE("npy payload is little-endian IEEE-754") {
  FeatureGrid g(2, 2, 3);
  g.at(0, 0, 0) = 1.5f;
  const auto bytes = encode_npy(g);
  const std::size_t offset = data_offset(bytes);
  CHECK(bytes[offset + 0] == 0x00);
  CHECK(bytes[offset + 1] == 0x00);
  CHECK(bytes[offset + 2] == 0xC0);
  CHECK(bytes[offset + 3] == 0x3F);
}

TEST_CASE("feature tensors round-trip bit-exactly") {
  TempDir dir;
  std::mt19937 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t h = 1 + rng() % 9, w = 1 + rng() % 9, d = 1 + rng() % 40;
    FeatureGrid g = random_grid(rng, h, w, d);
    g.values[0] = -0.0f;
    g.values.back() = std::numeric_limits<float>::denorm_min();
    const auto path = dir / "t.npy";
    write_feature_tensor(g, path);
    const FeatureGrid back = read_feature_tensor(path);
    REQUIRE(back.height == h);
    REQUIRE(back.width == w);
    REQUIRE(back.dims == d);
    CHECK(std::memcmp(back.values.data(), g.values.data(), g.values.size() * 4) == 0);
  }
}

TEST_CASE("npy reader squeezes a leading singleton and tolerates header spacing") {
  const std::vector<float> payload = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
  const auto grid = decode_npy(raw_npy("{'descr': '<f4', 'fortran_order': False, 'shape': (1, 2, 2, 3), }", payload));
  CHECK(grid.height == 2);
  CHECK(grid.width == 2);
  CHECK(grid.dims == 3);
  CHECK(grid.at(1, 1, 2) == 12.0f);

  const auto reordered = decode_npy(raw_npy("{ 'shape':(2,2,3) ,'fortran_order':False,\"descr\":'<f4'}", payload));
  CHECK(reordered == grid);

  const auto large = decode_npy(raw_npy("{'descr': '<f4', 'fortran_order': False, 'shape': (64, 64, 256), }",
                                        std::vector<float>(64 * 64 * 256, 0.25f)));
  CHECK(large.height == 64);
  CHECK(large.width == 64);
  CHECK(large.dims == 256);
}

TEST_CASE("npy reader rejects malformed input") {
  const std::vector<float> payload(12, 1.0f);
  const std::string good = "{'descr': '<f4', 'fortran_order': False, 'shape': (2, 2, 3), }";

  auto bad_magic = raw_npy(good, payload);
  bad_magic[1] = 'X';
  CHECK_THROWS_AS(decode_npy(bad_magic), FormatError);
  CHECK_THROWS_AS(decode_npy(raw_npy(good, payload, 2)), FormatError);

  CHECK_THROWS_AS(decode_npy(raw_npy("{'descr': '<f8', 'fortran_order': False, 'shape': (2, 2, 3), }", payload)),
                  ShapeError);
  CHECK_THROWS_AS(decode_npy(raw_npy("{'descr': '>f4', 'fortran_order': False, 'shape': (2, 2, 3), }", payload)),
                  ShapeError);
  CHECK_THROWS_AS(decode_npy(raw_npy("{'descr': '<f4', 'fortran_order': False, 'shape': (4, 3), }", payload)),
                  ShapeError);
  CHECK_THROWS_AS(decode_npy(raw_npy("{'descr': '<f4', 'fortran_order': False, 'shape': (2, 1, 2, 3), }", payload)),
                  ShapeError);
  CHECK_THROWS_AS(decode_npy(raw_npy("{'descr': '<f4', 'fortran_order': True, 'shape': (2, 2, 3), }", payload)),
                  FormatError);
  CHECK_THROWS_AS(decode_npy(raw_npy("{'descr': '<f4', 'shape': (2, 2, 3), }", payload)), FormatError);
  CHECK_THROWS_AS(decode_npy(raw_npy("{'descr': '<f4', 'fortran_order': False, 'shape': (2, 2, 3), 'x': 1}", payload)),
                  FormatError);

  auto truncated = raw_npy(good, payload);
  truncated.pop_back();
  CHECK_THROWS_AS(decode_npy(truncated), FormatError);

  auto nan_payload = payload;
  nan_payload[5] = std::numeric_limits<float>::quiet_NaN();
  CHECK_THROWS_AS(decode_npy(raw_npy(good, nan_payload)), DataError);
  auto inf_payload = payload;
  inf_payload[0] = std::numeric_limits<float>::infinity();
  CHECK_THROWS_AS(decode_npy(raw_npy(good, inf_payload)), DataError);
}

TEST_CASE("load_sequence orders frames lexicographically") {
  TempDir dir;
  std::mt19937 rng(3);
  std::vector<std::size_t> order = {5, 2, 7, 0, 3, 6, 1, 4};
  for (auto i : order) {
    FeatureGrid g(4, 4, 8, static_cast<float>(i));
    char name[32];
    std::snprintf(name, sizeof name, "f_%03zu.npy", i);
    write_feature_tensor(g, dir / name);
  }
  write_feature_tensor(FeatureGrid(2, 2, 2), dir / "other.bin");

  const auto seq = load_sequence(dir.path(), "f_*.npy");
  REQUIRE(seq.size() == 8);
  CHECK(seq.height() == 4);
  CHECK(seq.dims() == 8);
  for (std::size_t i = 0; i < 8; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "f_%03zu.npy", i);
    CHECK(seq.frame_ids()[i] == name);
    CHECK(seq.frame(i)[0] == static_cast<float>(i));
  }
  CHECK(seq.rows().rows() == 8 * 16);
}

TEST_CASE("load_sequence errors") {
  TempDir dir;
  CHECK_THROWS_AS(load_sequence(dir.path()), NotFoundError);
  CHECK_THROWS_AS(load_sequence(dir / "missing"), NotFoundError);

  write_feature_tensor(FeatureGrid(64, 64, 4), dir / "a.npy");
  write_feature_tensor(FeatureGrid(32, 32, 4), dir / "b.npy");
  try {
    load_sequence(dir.path());
    FAIL("expected ShapeError");
  } catch (const ShapeError& e) {
    CHECK(std::string(e.what()).find("b.npy") != std::string::npos);
  }
}

TEST_CASE("FeatureSequence rejects non-finite values and duplicate ids") {
  FeatureSequence seq(1, 1, 2);
  seq.append(std::vector<float>{1.0f, 2.0f}, "a");
  CHECK_THROWS_AS(seq.append(std::vector<float>{1.0f, 2.0f}, "a"), DataError);
  CHECK_THROWS_AS(seq.append(std::vector<float>{std::nanf(""), 2.0f}, "b"), DataError);
  CHECK_THROWS_AS(seq.append(std::vector<float>{1.0f}, "c"), ShapeError);
}

TEST_CASE("masks are read verbatim from 8-bit grayscale PNGs") {
  TempDir dir;
  write_mask(MaskImage(4, 4), dir / "zero.png");
  const auto zero = read_mask(dir / "zero.png");
  CHECK(zero.height == 4);
  CHECK(std::all_of(zero.values.begin(), zero.values.end(), [](auto v) { return v == 0; }));

  MaskImage block(4, 4);
  block.at(1, 1) = block.at(1, 2) = block.at(2, 1) = block.at(2, 2) = 1;
  write_mask(block, dir / "block.png");
  const auto back = read_mask(dir / "block.png");
  CHECK(back == block);
  CHECK(std::count(back.values.begin(), back.values.end(), 1) == 4);
}

TEST_CASE("read_mask rejects multi-channel and 16-bit PNGs") {
  TempDir dir;
  write_rgb_png(RgbImage(3, 3, Rgb{1, 2, 3}), dir / "rgb.png");
  CHECK_THROWS_AS(read_mask(dir / "rgb.png"), FormatError);
  write_label_map(LabelGrid(3, 3, 1), dir / "deep.png");
  CHECK_THROWS_AS(read_mask(dir / "deep.png"), FormatError);

  testing::write_bytes(dir / "junk.png", {1, 2, 3, 4, 5, 6, 7, 8, 9});
  CHECK_THROWS_AS(read_mask(dir / "junk.png"), FormatError);
  CHECK_THROWS_AS(read_mask(dir / "absent.png"), NotFoundError);
}

TEST_CASE("label maps are written as numbered 16-bit PNGs") {
  TempDir dir;
  LabelMapSequence seq;
  seq.num_labels = 1000;
  seq.maps = {LabelGrid(2, 3, 0), LabelGrid(2, 3, 999)};
  seq.maps[0].at(0, 0) = 3;
  seq.maps[0].at(1, 2) = 300;
  write_label_maps(seq, dir / "out");
  CHECK(std::filesystem::exists(dir / "out/00000.png"));
  CHECK(std::filesystem::exists(dir / "out/00001.png"));
  CHECK(read_label_map(dir / "out/00000.png").at(0, 0) == 3);

  const auto back = read_label_maps(dir / "out");
  CHECK(back.maps == seq.maps);
  CHECK(back.num_labels == 1000);
}

TEST_CASE("label maps beyond 16 bits are rejected") {
  TempDir dir;
  LabelMapSequence seq;
  seq.num_labels = 70000;
  seq.maps = {LabelGrid(1, 1, 0)};
  CHECK_THROWS_AS(write_label_maps(seq, dir / "out"), RangeError);

  LabelMapSequence out_of_range;
  out_of_range.num_labels = 2;
  out_of_range.maps = {LabelGrid(1, 1, 5)};
  CHECK_THROWS_AS(write_label_maps(out_of_range, dir / "out"), RangeError);
}

TEST_CASE("atomic writes leave no temporary behind") {
  TempDir dir;
  write_file_atomic(dir / "m.json", std::string("{}\n"));
  write_file_atomic(dir / "m.json", std::string("{\"a\": 1}\n"));
  CHECK(testing::read_text(dir / "m.json") == "{\"a\": 1}\n");
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir.path())) ++files;
  CHECK(files == 1);
  CHECK_THROWS_AS(write_file_atomic(dir / "no/such/dir/m.json", std::string("x")), IoError);
  CHECK_FALSE(std::filesystem::exists(dir / "no/such/dir/m.json"));
}
