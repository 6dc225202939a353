#include "hrlc/cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <optional>
#include <thread>

#include "hrlc/config.hpp"
#include "hrlc/error.hpp"
#include "hrlc/metrics.hpp"
#include "hrlc/parallel.hpp"
#include "hrlc/pipeline.hpp"
#include "hrlc/refine.hpp"
#include "hrlc/render.hpp"
#include "hrlc/synth.hpp"
#include "hrlc/tensor_io.hpp"

namespace hrlc::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> batch_size;
  std::optional<std::size_t> intra_k;
  std::optional<std::size_t> inter_k;
  std::optional<std::size_t> pca_dim;
  std::optional<std::string> match_mode;
  std::optional<std::string> refine_size;
};

void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "INI config file");
  cmd->add_option("--seed", o.seed, "Seed for every random choice");
  cmd->add_option("--batch-size", o.batch_size, "Frames per batch");
  cmd->add_option("--intra-k", o.intra_k, "Clusters per batch");
  cmd->add_option("--inter-k", o.inter_k, "Global clusters");
  cmd->add_option("--pca-dim", o.pca_dim, "PCA target dims at both levels");
  cmd->add_option("--match-mode", o.match_mode, "Cluster matching: majority or best-iou");
  cmd->add_option("--refine-size", o.refine_size, "Refined label map size, HxW");
}

std::pair<std::size_t, std::size_t> parse_size(const std::string& text) {
  const auto x = text.find('x');
  try {
    if (x == std::string::npos) throw std::invalid_argument(text);
    std::size_t used_h = 0, used_w = 0;
    const auto h = std::stoul(text.substr(0, x), &used_h);
    const auto w = std::stoul(text.substr(x + 1), &used_w);
    if (used_h != x || used_w != text.size() - x - 1 || h == 0 || w == 0) throw std::invalid_argument(text);
    return {h, w};
  } catch (const std::logic_error&) {
    throw ConfigError("--refine-size expects HxW, got '" + text + "'");
  }
}

RunConfig resolve(const Overrides& o) {
  RunConfig cfg = o.config.empty() ? RunConfig{} : load_config(o.config);
  if (o.seed) cfg.pipeline.seed = *o.seed;
  if (o.batch_size) cfg.pipeline.batch_size = *o.batch_size;
  if (o.intra_k) cfg.pipeline.intra_k = *o.intra_k;
  if (o.inter_k) cfg.pipeline.inter_k = *o.inter_k;
  if (o.pca_dim) cfg.pipeline.pca_dim_intra = cfg.pipeline.pca_dim_inter = *o.pca_dim;
  if (o.match_mode) cfg.match_mode = parse_match_mode(*o.match_mode);
  if (o.refine_size) std::tie(cfg.refine.target_height, cfg.refine.target_width) = parse_size(*o.refine_size);
  return cfg;
}

class Stopwatch {
 public:
  double lap_ms() {
    const auto now = std::chrono::steady_clock::now();
    const double ms = std::chrono::duration<double, std::milli>(now - last_).count();
    last_ = now;
    return ms;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

json manifest_base(const std::string& command, const RunConfig& cfg) {
  json m;
  m["version"] = kVersion;
  m["command"] = command;
  m["seed"] = cfg.pipeline.seed;
  m["threads"] = thread_count();
  m["config"] = serialize_config(cfg);
  return m;
}

void write_manifest(const fs::path& dir, const json& manifest) {
  write_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
}

void write_lines(const fs::path& path, const std::vector<std::string>& lines) {
  std::string text;
  for (const auto& l : lines) text += l + "\n";
  write_file_atomic(path, text);
}

std::vector<MaskImage> load_masks(const fs::path& dir, std::vector<std::string>& ids) {
  const auto files = list_matching(dir, "*.png");
  if (files.empty()) throw NotFoundError("no ground-truth masks in " + dir.string());
  std::vector<MaskImage> masks;
  for (const auto& f : files) {
    masks.push_back(read_mask(f));
    ids.push_back(f.filename().string());
  }
  return masks;
}

json metrics_json(const MetricsReport& r) {
  json j;
  j["sequence"] = r.sequence;
  j["iou"] = r.mean_iou;
  j["f1"] = r.mean_f1;
  j["recall"] = r.mean_recall;
  json matching = json::object();
  for (const auto& [object, clusters] : r.matching.clusters_of) matching[std::to_string(object)] = clusters;
  j["matching"] = matching;
  return j;
}

void render_dir(const LabelMapSequence& labels, const Palette& palette, const fs::path& dir, bool sheet) {
  fs::create_directories(dir);
  std::vector<RgbImage> frames;
  for (std::size_t i = 0; i < labels.maps.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "%05zu.png", i);
    frames.push_back(render_labels(labels.maps[i], palette));
    write_rgb_png(frames.back(), dir / name);
  }
  if (sheet) write_rgb_png(contact_sheet(frames), dir / "contact_sheet.png");
}

int cmd_cluster(const fs::path& features, const fs::path& out_dir, const std::string& pattern, const RunConfig& cfg,
                std::ostream& out) {
  Stopwatch watch;
  json timings;
  const FeatureSequence seq = load_sequence(features, pattern);
  timings["load"] = watch.lap_ms();
  const LabelMapSequence labels = run_pipeline(seq, cfg.pipeline);
  timings["pipeline"] = watch.lap_ms();
  write_label_maps(labels, out_dir);
  write_lines(out_dir / "frames.txt", seq.frame_ids());
  timings["write"] = watch.lap_ms();

  json m = manifest_base("cluster", cfg);
  m["inputs"] = {{"features", features.string()}, {"pattern", pattern}};
  m["outputs"] = {{"labels", out_dir.string()}};
  m["num_frames"] = seq.size();
  m["num_labels"] = labels.num_labels;
  m["timings_ms"] = timings;
  write_manifest(out_dir, m);
  out << "clustered " << seq.size() << " frames into " << labels.num_labels << " labels -> " << out_dir.string()
      << "\n";
  return kExitOk;
}

int cmd_refine(const fs::path& coarse_dir, const fs::path& out_dir, const RunConfig& cfg, std::ostream& out) {
  if (cfg.refine.target_height == 0 || cfg.refine.target_width == 0) {
    throw ConfigError("refine needs a target size (--refine-size HxW or [refine] target_height/target_width)");
  }
  const auto coarse = read_label_maps(coarse_dir);
  const auto fine = refine_sequence(coarse, cfg.refine);
  write_label_maps(fine, out_dir);
  out << "refined " << fine.maps.size() << " frames to " << cfg.refine.target_height << "x"
      << cfg.refine.target_width << " -> " << out_dir.string() << "\n";
  return kExitOk;
}

int cmd_eval(const fs::path& pred_dir, const fs::path& gt_dir, MatchMode mode, fs::path report_path,
             std::string sequence, std::ostream& out) {
  const auto pred = read_label_maps(pred_dir);
  std::vector<std::string> ids;
  const auto gts = load_masks(gt_dir, ids);
  if (sequence.empty()) sequence = fs::absolute(gt_dir).lexically_normal().filename().string();
  if (sequence.empty()) sequence = "sequence";
  const auto report = evaluate_sequence(pred, gts, mode, sequence, ids);
  if (report_path.empty()) report_path = pred_dir / "report.txt";
  write_file_atomic(report_path, format_report(report));
  out << format_table(std::span(&report, 1));
  return kExitOk;
}

int cmd_render(const fs::path& label_dir, const fs::path& out_dir, std::size_t palette_size, bool sheet,
               std::ostream& out) {
  const auto labels = read_label_maps(label_dir);
  const auto palette = make_palette(std::max<std::size_t>({palette_size, labels.num_labels, 1}));
  render_dir(labels, palette, out_dir, sheet);
  out << "rendered " << labels.maps.size() << " frames -> " << out_dir.string() << "\n";
  return kExitOk;
}

int cmd_synth(const fs::path& out_dir, const RunConfig& cfg, std::ostream& out) {
  const SynthSpec spec = make_synth_spec(cfg.synth, cfg.pipeline.seed);
  const SynthOutput synth = generate(spec);
  fs::create_directories(out_dir / "features");
  fs::create_directories(out_dir / "gt");
  for (std::size_t f = 0; f < synth.features.size(); ++f) {
    write_feature_tensor(synth.features.frame_grid(f), out_dir / "features" / synth.features.frame_ids()[f]);
    const auto& truth = synth.truth.maps[f];
    MaskImage mask(truth.height, truth.width);
    for (std::size_t i = 0; i < truth.values.size(); ++i) mask.values[i] = static_cast<std::uint8_t>(truth.values[i]);
    char name[32];
    std::snprintf(name, sizeof name, "%05zu.png", f);
    write_mask(mask, out_dir / "gt" / name);
  }
  json m = manifest_base("synth", cfg);
  m["outputs"] = {{"features", (out_dir / "features").string()}, {"gt", (out_dir / "gt").string()}};
  m["noise_sigma"] = spec.noise_sigma;
  m["num_frames"] = spec.n_frames;
  write_manifest(out_dir, m);
  out << "wrote " << spec.n_frames << " synthetic frames (" << to_string(spec.layout) << ", sigma "
      << spec.noise_sigma << ") -> " << out_dir.string() << "\n";
  return kExitOk;
}

int cmd_all(const fs::path& features, const fs::path& gt_dir, const fs::path& out_dir, const std::string& pattern,
            RunConfig cfg, std::ostream& out) {
  Stopwatch watch;
  json timings;
  const FeatureSequence seq = load_sequence(features, pattern);
  std::vector<std::string> gt_ids;
  const auto gts = load_masks(gt_dir, gt_ids);
  timings["load"] = watch.lap_ms();

  const LabelMapSequence coarse = run_pipeline(seq, cfg.pipeline);
  write_label_maps(coarse, out_dir / "coarse");
  write_lines(out_dir / "coarse" / "frames.txt", seq.frame_ids());
  timings["cluster"] = watch.lap_ms();

  if (cfg.refine.target_height == 0 || cfg.refine.target_width == 0) {
    cfg.refine.target_height = gts.front().height;
    cfg.refine.target_width = gts.front().width;
  }
  const LabelMapSequence fine = refine_sequence(coarse, cfg.refine);
  write_label_maps(fine, out_dir / "refined");
  timings["refine"] = watch.lap_ms();

  render_dir(fine, make_palette(std::max<std::size_t>(fine.num_labels, 1)), out_dir / "render", true);
  timings["render"] = watch.lap_ms();

  const std::string sequence = fs::absolute(features).lexically_normal().parent_path().filename().string();
  const auto report = evaluate_sequence(fine, gts, cfg.match_mode, sequence.empty() ? "sequence" : sequence, gt_ids);
  std::vector<LabelGrid> truth;
  for (const auto& g : gts) truth.emplace_back(g.height, g.width, std::vector<std::uint32_t>(g.values.begin(), g.values.end()));
  const double ari = adjusted_rand_index(fine.maps, truth);
  const std::string table = format_table(std::span(&report, 1));
  char ari_line[64];
  std::snprintf(ari_line, sizeof ari_line, "ARI %.4f\n", ari);
  write_file_atomic(out_dir / "report.txt", format_report(report));
  write_file_atomic(out_dir / "table.txt", table + ari_line);
  timings["eval"] = watch.lap_ms();

  json m = manifest_base("all", cfg);
  m["inputs"] = {{"features", features.string()}, {"gt", gt_dir.string()}, {"pattern", pattern}};
  m["outputs"] = {{"coarse", (out_dir / "coarse").string()},
                  {"refined", (out_dir / "refined").string()},
                  {"render", (out_dir / "render").string()},
                  {"report", (out_dir / "report.txt").string()}};
  m["num_frames"] = seq.size();
  m["num_labels"] = fine.num_labels;
  m["metrics"] = metrics_json(report);
  m["ari"] = ari;
  m["timings_ms"] = timings;
  write_manifest(out_dir, m);
  out << table << ari_line;
  return kExitOk;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const RangeError*>(&e)) return kExitConfig;
  if (dynamic_cast<const NotFoundError*>(&e) || dynamic_cast<const FormatError*>(&e) ||
      dynamic_cast<const ShapeError*>(&e) || dynamic_cast<const DataError*>(&e) ||
      dynamic_cast<const IoError*>(&e) || dynamic_cast<const DegenerateError*>(&e) ||
      dynamic_cast<const std::filesystem::filesystem_error*>(&e)) {
    return kExitData;
  }
  return kExitInternal;
}

std::size_t default_threads() {
  if (const char* env = std::getenv("HRLC_THREADS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hierarchical representative latent clustering for consistent sequence segmentation", "hrlc"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  std::optional<std::size_t> threads;
  app.add_option("--threads", threads, "Worker threads (fallback: HRLC_THREADS)")->check(CLI::PositiveNumber);

  Overrides o;
  std::string features, gt, pred, input, out_dir, pattern = "*.npy", report, sequence;
  std::size_t palette_size = 0;
  bool sheet = false;

  auto* cluster = app.add_subcommand("cluster", "Cluster feature tensors into coarse label maps");
  cluster->add_option("features", features, "Directory of feature tensors")->required();
  cluster->add_option("--out", out_dir, "Output directory")->required();
  cluster->add_option("--pattern", pattern, "Glob for feature files");
  add_overrides(cluster, o);

  auto* refine = app.add_subcommand("refine", "Upsample and smooth label maps");
  refine->add_option("labels", input, "Directory of coarse label maps")->required();
  refine->add_option("--out", out_dir, "Output directory")->required();
  add_overrides(refine, o);

  auto* eval = app.add_subcommand("eval", "Score label maps against ground-truth masks");
  eval->add_option("pred", pred, "Directory of predicted label maps")->required();
  eval->add_option("gt", gt, "Directory of ground-truth masks")->required();
  eval->add_option("--report", report, "Machine-readable report path (default: <pred>/report.txt)");
  eval->add_option("--sequence", sequence, "Sequence name in the table");
  add_overrides(eval, o);

  auto* render = app.add_subcommand("render", "Color label maps with a fixed palette");
  render->add_option("labels", input, "Directory of label maps")->required();
  render->add_option("--out", out_dir, "Output directory")->required();
  render->add_option("--palette-size", palette_size, "Minimum palette size");
  render->add_flag("--contact-sheet", sheet, "Also write all frames side by side");

  auto* synth = app.add_subcommand("synth", "Write a synthetic feature sequence with ground truth");
  synth->add_option("--out", out_dir, "Output directory")->required();
  add_overrides(synth, o);

  auto* all = app.add_subcommand("all", "cluster, refine, render and eval in one run");
  all->add_option("features", features, "Directory of feature tensors")->required();
  all->add_option("gt", gt, "Directory of ground-truth masks")->required();
  all->add_option("--out", out_dir, "Output directory")->required();
  all->add_option("--pattern", pattern, "Glob for feature files");
  add_overrides(all, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  set_thread_count(threads.value_or(default_threads()));
  try {
    const RunConfig cfg = resolve(o);
    if (*cluster) return cmd_cluster(features, out_dir, pattern, cfg, out);
    if (*refine) return cmd_refine(input, out_dir, cfg, out);
    if (*eval) return cmd_eval(pred, gt, cfg.match_mode, report, sequence, out);
    if (*render) return cmd_render(input, out_dir, palette_size, sheet, out);
    if (*synth) return cmd_synth(out_dir, cfg, out);
    if (*all) return cmd_all(features, gt, out_dir, pattern, cfg, out);
  } catch (const std::exception& e) {
    err << "hrlc: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return kExitInternal;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"hrlc"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace hrlc::cli
