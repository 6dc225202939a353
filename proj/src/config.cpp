#include "hrlc/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "hrlc/error.hpp"

namespace hrlc {

namespace pt = boost::property_tree;

namespace {

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) throw ConfigError("config: bad value '" + text + "' for " + key);
  return value;
}

template <class T>
std::string format_number(T value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"pipeline", {"batch_size", "intra_k", "inter_k", "pca_dim_intra", "pca_dim_inter", "seed", "pca_max_rows"}},
      {"kmeans", {"max_iters", "tol"}},
      {"refine", {"target_height", "target_width", "smooth_radius", "smooth_passes"}},
      {"eval", {"match_mode"}},
      {"synth", {"n_frames", "height", "width", "dims", "generators", "layout", "noise_sigma", "noise_rel",
                 "swap_period"}},
  };
  return keys;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) throw ConfigError("config: key '" + section + "' outside a section");
    const auto it = known_keys().find(section);
    if (it == known_keys().end()) throw ConfigError("config: unknown section [" + section + "]");
    for (const auto& [key, value] : body) {
      if (!it->second.contains(key)) throw ConfigError("config: unknown key " + section + "." + key);
    }
  }

  RunConfig cfg;
  auto get = [&](const std::string& path, auto& field) {
    const auto value = tree.get_optional<std::string>(path);
    if (!value) return;
    using T = std::decay_t<decltype(field)>;
    field = parse_number<T>(path, *value);
  };
  auto& p = cfg.pipeline;
  get("pipeline.batch_size", p.batch_size);
  get("pipeline.intra_k", p.intra_k);
  get("pipeline.inter_k", p.inter_k);
  get("pipeline.pca_dim_intra", p.pca_dim_intra);
  get("pipeline.pca_dim_inter", p.pca_dim_inter);
  get("pipeline.seed", p.seed);
  get("pipeline.pca_max_rows", p.pca_max_rows);
  get("kmeans.max_iters", p.kmeans.max_iters);
  get("kmeans.tol", p.kmeans.tol);
  get("refine.target_height", cfg.refine.target_height);
  get("refine.target_width", cfg.refine.target_width);
  get("refine.smooth_radius", cfg.refine.smooth_radius);
  get("refine.smooth_passes", cfg.refine.smooth_passes);
  if (auto mode = tree.get_optional<std::string>("eval.match_mode")) cfg.match_mode = parse_match_mode(*mode);
  auto& s = cfg.synth;
  get("synth.n_frames", s.n_frames);
  get("synth.height", s.height);
  get("synth.width", s.width);
  get("synth.dims", s.dims);
  get("synth.generators", s.generators);
  if (auto layout = tree.get_optional<std::string>("synth.layout")) s.layout = parse_layout(*layout);
  get("synth.noise_sigma", s.noise_sigma);
  get("synth.noise_rel", s.noise_rel);
  get("synth.swap_period", s.swap_period);
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string serialize_config(const RunConfig& cfg) {
  std::ostringstream out;
  const auto& p = cfg.pipeline;
  out << "[pipeline]\n"
      << "batch_size = " << p.batch_size << "\n"
      << "intra_k = " << p.intra_k << "\n"
      << "inter_k = " << p.inter_k << "\n"
      << "pca_dim_intra = " << p.pca_dim_intra << "\n"
      << "pca_dim_inter = " << p.pca_dim_inter << "\n"
      << "seed = " << p.seed << "\n"
      << "pca_max_rows = " << p.pca_max_rows << "\n\n"
      << "[kmeans]\n"
      << "max_iters = " << p.kmeans.max_iters << "\n"
      << "tol = " << format_number(p.kmeans.tol) << "\n\n"
      << "[refine]\n"
      << "target_height = " << cfg.refine.target_height << "\n"
      << "target_width = " << cfg.refine.target_width << "\n"
      << "smooth_radius = " << cfg.refine.smooth_radius << "\n"
      << "smooth_passes = " << cfg.refine.smooth_passes << "\n\n"
      << "[eval]\n"
      << "match_mode = " << to_string(cfg.match_mode) << "\n\n";
  const auto& s = cfg.synth;
  out << "[synth]\n"
      << "n_frames = " << s.n_frames << "\n"
      << "height = " << s.height << "\n"
      << "width = " << s.width << "\n"
      << "dims = " << s.dims << "\n"
      << "generators = " << s.generators << "\n"
      << "layout = " << to_string(s.layout) << "\n"
      << "noise_sigma = " << format_number(s.noise_sigma) << "\n"
      << "noise_rel = " << format_number(s.noise_rel) << "\n"
      << "swap_period = " << s.swap_period << "\n";
  return out.str();
}

SynthSpec make_synth_spec(const SynthConfig& cfg, std::uint64_t seed) {
  SynthSpec spec;
  spec.n_frames = cfg.n_frames;
  spec.height = cfg.height;
  spec.width = cfg.width;
  spec.generators = orthonormal_generators(cfg.generators, cfg.dims, seed ^ kGeneratorSeedMix);
  spec.layout = cfg.layout;
  spec.seed = seed;
  spec.swap_period = cfg.swap_period;
  spec.noise_sigma = cfg.noise_rel > 0.0 && cfg.generators > 1
                         ? cfg.noise_rel * min_generator_distance(spec.generators)
                         : cfg.noise_sigma;
  return spec;
}

}  // namespace hrlc
