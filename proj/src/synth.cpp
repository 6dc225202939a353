#include "hrlc/synth.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <utility>

#include "hrlc/error.hpp"
#include "hrlc/rng.hpp"

namespace hrlc {

namespace {

// Box-Muller pairs drawn from xoshiro256**.
class Gaussian {
 public:
  explicit Gaussian(std::uint64_t seed) : rng_(seed) {}

  double next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - rng_.uniform();
    const double u2 = rng_.uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  Xoshiro256 rng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

double comb2(std::uint64_t n) { return n < 2 ? 0.0 : static_cast<double>(n) * static_cast<double>(n - 1) / 2.0; }

}  // namespace

SynthLayout parse_layout(const std::string& name) {
  if (name == "stripes") return SynthLayout::kStripes;
  if (name == "drift") return SynthLayout::kDrift;
  if (name == "swap") return SynthLayout::kSwap;
  throw ConfigError("unknown layout '" + name + "' (expected stripes, drift or swap)");
}

std::string to_string(SynthLayout layout) {
  switch (layout) {
    case SynthLayout::kStripes: return "stripes";
    case SynthLayout::kDrift: return "drift";
    case SynthLayout::kSwap: return "swap";
  }
  return "stripes";
}

void SynthSpec::validate() const {
  if (n_frames < 1 || height < 1 || width < 1 || dims() < 1) throw RangeError("synth: every dimension must be >= 1");
  if (num_generators() < 1) throw RangeError("synth: need at least one generator");
  if (num_generators() > 256) throw RangeError("synth: at most 256 generators fit an 8-bit mask");
  if (num_generators() > 1 && !(min_generator_distance(generators) > 0.0)) {
    throw RangeError("synth: generators must be pairwise distinct");
  }
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
    throw RangeError("synth: noise_sigma must be finite and non-negative");
  }
  if (layout == SynthLayout::kSwap && swap_period < 1) throw RangeError("synth: swap_period must be >= 1");
}

Matrix<float> orthonormal_generators(std::size_t count, std::size_t dims, std::uint64_t seed) {
  if (count > dims) throw RangeError("orthonormal_generators: more generators than dimensions");
  Gaussian gauss(seed);
  std::vector<std::vector<double>> basis;
  while (basis.size() < count) {
    std::vector<double> v(dims);
    for (auto& e : v) e = gauss.next();
    for (const auto& b : basis) {
      double dot = 0.0;
      for (std::size_t i = 0; i < dims; ++i) dot += v[i] * b[i];
      for (std::size_t i = 0; i < dims; ++i) v[i] -= dot * b[i];
    }
    double norm = 0.0;
    for (double e : v) norm += e * e;
    norm = std::sqrt(norm);
    if (norm < 1e-6) continue;
    for (auto& e : v) e /= norm;
    basis.push_back(std::move(v));
  }
  Matrix<float> out(count, dims);
  for (std::size_t g = 0; g < count; ++g) {
    for (std::size_t i = 0; i < dims; ++i) out(g, i) = static_cast<float>(basis[g][i]);
  }
  return out;
}

double min_generator_distance(const Matrix<float>& generators) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < generators.rows(); ++a) {
    for (std::size_t b = a + 1; b < generators.rows(); ++b) {
      double d2 = 0.0;
      for (std::size_t i = 0; i < generators.cols(); ++i) {
        const double diff = static_cast<double>(generators(a, i)) - static_cast<double>(generators(b, i));
        d2 += diff * diff;
      }
      best = std::min(best, std::sqrt(d2));
    }
  }
  return best;
}

std::uint32_t layout_at(const SynthSpec& spec, std::size_t frame, std::size_t /*y*/, std::size_t x) {
  const std::size_t g_count = spec.num_generators();
  std::size_t column = x;
  if (spec.layout == SynthLayout::kDrift) column = (x + frame) % spec.width;
  auto g = static_cast<std::uint32_t>(column * g_count / spec.width);
  if (spec.layout == SynthLayout::kSwap && g_count >= 2 && (frame / spec.swap_period) % 2 == 1 && g < 2) g = 1 - g;
  return g;
}

SynthOutput generate(const SynthSpec& spec) {
  spec.validate();
  const std::size_t dims = spec.dims();
  SynthOutput out;
  out.features = FeatureSequence(spec.height, spec.width, dims);
  out.truth.num_labels = static_cast<std::uint32_t>(spec.num_generators());

  Gaussian gauss(spec.seed);
  std::vector<float> frame(spec.height * spec.width * dims);
  for (std::size_t f = 0; f < spec.n_frames; ++f) {
    LabelGrid& truth = out.truth.maps.emplace_back(spec.height, spec.width);
    for (std::size_t y = 0; y < spec.height; ++y) {
      for (std::size_t x = 0; x < spec.width; ++x) {
        const auto g = layout_at(spec, f, y, x);
        truth.at(y, x) = g;
        const auto gen = spec.generators.row(g);
        float* dst = frame.data() + (y * spec.width + x) * dims;
        for (std::size_t i = 0; i < dims; ++i) {
          dst[i] = spec.noise_sigma > 0.0 ? static_cast<float>(gen[i] + spec.noise_sigma * gauss.next()) : gen[i];
        }
      }
    }
    char id[32];
    std::snprintf(id, sizeof id, "f_%05zu.npy", f);
    out.features.append(frame, id);
  }
  return out;
}

double adjusted_rand_index(std::span<const LabelGrid> a, std::span<const LabelGrid> b) {
  if (a.size() != b.size()) throw ShapeError("adjusted_rand_index: frame counts differ");
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint64_t> table;
  std::map<std::uint32_t, std::uint64_t> rows, cols;
  std::uint64_t n = 0;
  for (std::size_t f = 0; f < a.size(); ++f) {
    if (a[f].height != b[f].height || a[f].width != b[f].width) {
      throw ShapeError("adjusted_rand_index: frame " + std::to_string(f) + " sizes differ");
    }
    for (std::size_t i = 0; i < a[f].values.size(); ++i) {
      ++table[{a[f].values[i], b[f].values[i]}];
      ++rows[a[f].values[i]];
      ++cols[b[f].values[i]];
      ++n;
    }
  }
  double index = 0.0, sum_rows = 0.0, sum_cols = 0.0;
  for (const auto& [key, c] : table) index += comb2(c);
  for (const auto& [key, c] : rows) sum_rows += comb2(c);
  for (const auto& [key, c] : cols) sum_cols += comb2(c);
  if (n < 2) return 1.0;
  const double expected = sum_rows * sum_cols / comb2(n);
  const double max_index = 0.5 * (sum_rows + sum_cols);
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

double cross_batch_agreement(std::span<const LabelGrid> truth, std::span<const LabelGrid> pred,
                             const BatchPartition& part) {
  if (truth.size() != pred.size()) throw ShapeError("cross_batch_agreement: frame counts differ");
  // per generator: per-batch counts; per (generator, label): per-batch counts
  std::map<std::uint32_t, std::map<std::size_t, std::uint64_t>> by_gen;
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::map<std::size_t, std::uint64_t>> by_pair;
  for (std::size_t b = 0; b < part.size(); ++b) {
    for (const auto f : part.batches[b]) {
      if (f >= truth.size()) throw ShapeError("cross_batch_agreement: partition exceeds the frame count");
      if (truth[f].values.size() != pred[f].values.size()) {
        throw ShapeError("cross_batch_agreement: frame " + std::to_string(f) + " sizes differ");
      }
      for (std::size_t i = 0; i < truth[f].values.size(); ++i) {
        ++by_gen[truth[f].values[i]][b];
        ++by_pair[{truth[f].values[i], pred[f].values[i]}][b];
      }
    }
  }
  auto cross_pairs = [](const std::map<std::size_t, std::uint64_t>& per_batch) {
    double total = 0.0, squares = 0.0;
    for (const auto& [batch, c] : per_batch) {
      total += static_cast<double>(c);
      squares += static_cast<double>(c) * static_cast<double>(c);
    }
    return 0.5 * (total * total - squares);
  };
  double pairs = 0.0, agree = 0.0;
  for (const auto& [g, per_batch] : by_gen) pairs += cross_pairs(per_batch);
  for (const auto& [key, per_batch] : by_pair) agree += cross_pairs(per_batch);
  return pairs == 0.0 ? 1.0 : agree / pairs;
}

}  // namespace hrlc
