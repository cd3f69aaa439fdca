#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "deeprare/feature_io.hpp"
#include "deeprare/fusion.hpp"
#include "deeprare/metrics.hpp"
#include "deeprare/netpbm.hpp"
#include "deeprare/pipeline.hpp"
#include "deeprare/stimuli.hpp"
#include "deeprare/toy_backbone.hpp"

namespace deeprare::cli {

namespace fs = std::filesystem;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string format_fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

// Runs fn(i) for i in [0, n) on up to `workers` threads.
void parallel_for(std::size_t n, unsigned workers,
                  const std::function<void(std::size_t)>& fn) {
  const unsigned count =
      static_cast<unsigned>(std::min<std::size_t>(std::max(1u, workers), n));
  if (count <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (unsigned t = 0; t < count; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
}

// Files with `extension` in a directory (sorted), or the path itself.
std::vector<fs::path> list_inputs(const fs::path& p, const std::string& extension) {
  if (!fs::exists(p)) throw std::runtime_error("no such file or directory: " + p.string());
  if (!fs::is_directory(p)) return {p};
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(p)) {
    if (entry.is_regular_file() && entry.path().extension() == extension) {
      out.push_back(entry.path());
    }
  }
  std::sort(out.begin(), out.end());
  if (out.empty()) {
    throw std::runtime_error("no " + extension + " files in " + p.string());
  }
  return out;
}

// ---------------------------------------------------------------- run

struct RunOptions {
  std::string features;
  std::string images;
  std::string backbone;
  std::string out;
  std::vector<double> thresholds{0.0, 0.9};
  std::vector<double> group_weights;
  bool face = false;
  double border_margin = 0.05;
  double sigma_fraction = 0.035;
  bool no_square = false;
  bool decompose = false;
  unsigned workers = 1;
};

PipelineConfig pipeline_config(const RunOptions& o) {
  PipelineConfig cfg;
  cfg.fusion.thresholds = o.thresholds;
  cfg.fusion.use_face = o.face;
  cfg.fusion.border_margin = o.border_margin;
  if (!o.group_weights.empty()) {
    if (o.group_weights.size() != 5) {
      throw UsageError("--group-weights needs exactly 5 values");
    }
    std::copy(o.group_weights.begin(), o.group_weights.end(),
              cfg.fusion.group_weights.begin());
  }
  if (!(o.sigma_fraction >= 0.0) || !std::isfinite(o.sigma_fraction)) {
    throw UsageError("--sigma-fraction must be a finite value >= 0");
  }
  cfg.post.sigma_fraction = o.sigma_fraction;
  cfg.post.square = !o.no_square;
  try {
    validate(cfg.fusion);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return cfg;
}

RgbImage load_image(const fs::path& p) {
  if (p.extension() == ".pgm") {
    const Map2D gray = read_pgm(p);
    RgbImage img(gray.height(), gray.width());
    for (std::size_t i = 0; i < gray.size(); ++i) {
      const auto v = static_cast<std::uint8_t>(std::lround(gray[i] * 255.0));
      img.data[3 * i] = img.data[3 * i + 1] = img.data[3 * i + 2] = v;
    }
    return img;
  }
  return read_ppm(p);
}

// Rows of tiles, each scaled to a common height, separated by white gaps.
Map2D tile_grid(const std::vector<std::vector<const Map2D*>>& rows) {
  constexpr std::size_t kTileHeight = 120;
  constexpr std::size_t kGap = 4;
  const Map2D& first = *rows.front().front();
  const std::size_t tile_w = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::lround(
             static_cast<double>(first.width()) * kTileHeight / first.height())));
  std::size_t cols = 0;
  for (const auto& r : rows) cols = std::max(cols, r.size());
  Map2D grid(rows.size() * kTileHeight + (rows.size() - 1) * kGap,
             cols * tile_w + (cols - 1) * kGap, 1.0);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      const Map2D tile = resize_bilinear(*rows[r][c], kTileHeight, tile_w);
      const std::size_t r0 = r * (kTileHeight + kGap);
      const std::size_t c0 = c * (tile_w + kGap);
      for (std::size_t y = 0; y < kTileHeight; ++y) {
        for (std::size_t x = 0; x < tile_w; ++x) grid(r0 + y, c0 + x) = tile(y, x);
      }
    }
  }
  return grid;
}

void write_decomposition(const Decomposition& d, const fs::path& out,
                         const std::string& stem) {
  const fs::path dir = out / (stem + "_decomp");
  fs::create_directories(dir);
  std::vector<std::vector<const Map2D*>> rows;
  for (const ThresholdPass& pass : d.passes) {
    const std::string t = "_T" + format_number(pass.threshold) + ".pgm";
    std::vector<const Map2D*> row;
    for (const ConspicuityMap& m : pass.layers) {
      write_pgm(m.map, dir / ("L" + std::to_string(m.id) + t));
    }
    for (const ConspicuityMap& m : pass.groups) {
      write_pgm(m.map, dir / ("G" + std::to_string(m.id) + t));
      row.push_back(&m.map);
    }
    write_pgm(pass.combined, dir / ("C" + t));
    row.push_back(&pass.combined);
    rows.push_back(std::move(row));
  }
  write_pgm(tile_grid(rows), out / (stem + "_grid.pgm"));
}

int cmd_run(const RunOptions& o, std::ostream& out, std::ostream& err) {
  if (o.features.empty() == o.images.empty()) {
    throw UsageError("give exactly one of --features or --images");
  }
  if (!o.images.empty() && o.backbone != "toy") {
    throw UsageError("--images requires --backbone toy");
  }
  if (!o.images.empty() && o.face) {
    throw UsageError("--face needs VGG16 features; the toy backbone has no face channel");
  }
  if (o.workers == 0) throw UsageError("--workers must be >= 1");
  const PipelineConfig cfg = pipeline_config(o);

  std::vector<fs::path> inputs;
  try {
    inputs = o.features.empty() ? list_inputs(o.images, ".ppm")
                                : list_inputs(o.features, ".drf");
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  const fs::path out_dir(o.out);
  fs::create_directories(out_dir);

  std::vector<std::string> failures(inputs.size());
  parallel_for(inputs.size(), o.workers, [&](std::size_t i) {
    const fs::path& p = inputs[i];
    try {
      const FeatureStack stack = o.features.empty()
                                     ? extract_toy_features(load_image(p))
                                     : read_drf(p);
      const std::string stem = p.stem().string();
      Map2D raw;
      if (o.decompose) {
        Decomposition d = decompose(stack, cfg.fusion);
        write_decomposition(d, out_dir, stem);
        raw = std::move(d.raw);
      } else {
        raw = multi_threshold_saliency(stack, cfg.fusion);
      }
      write_pgm(finalize(raw, cfg.post, raw.width()), out_dir / (stem + "_sal.pgm"));
    } catch (const std::exception& e) {
      failures[i] = p.string() + ": " + e.what();
    }
  });

  int failed = 0;
  for (const std::string& f : failures) {
    if (f.empty()) continue;
    err << "error: " << f << '\n';
    ++failed;
  }
  out << (inputs.size() - static_cast<std::size_t>(failed)) << " of "
      << inputs.size() << " inputs written to " << out_dir.string() << '\n';
  return failed == 0 ? kExitOk : kExitFailure;
}

// ---------------------------------------------------------------- eval

const std::vector<std::string>& all_metrics() {
  static const std::vector<std::string> names{
      "cc", "kl", "sim", "nss", "aucj", "aucb",
      "gsi", "msr_t", "msr_b", "nfix", "found15"};
  return names;
}

struct EvalOptions {
  std::string pred;
  std::string gt;
  std::string out;
  std::vector<std::string> metrics;
  std::uint64_t seed = 0;
  std::size_t splits = 100;
};

FixationSet read_fixations(const fs::path& p, std::size_t height, std::size_t width) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  FixationSet fx;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || (lineno == 1 && line == "row,col")) continue;
    const auto comma = line.find(',');
    std::size_t r = 0;
    std::size_t c = 0;
    const char* b = line.data();
    const char* e = b + line.size();
    const bool ok =
        comma != std::string::npos &&
        std::from_chars(b, b + comma, r).ptr == b + comma &&
        std::from_chars(b + comma + 1, e, c).ptr == e;
    if (!ok) {
      throw std::runtime_error(p.string() + ":" + std::to_string(lineno) +
                               ": expected 'row,col'");
    }
    if (r >= height || c >= width) {
      throw std::runtime_error(p.string() + ":" + std::to_string(lineno) +
                               ": fixation outside the " + std::to_string(height) +
                               "x" + std::to_string(width) + " grid");
    }
    fx.push_back({r, c});
  }
  if (fx.empty()) throw std::runtime_error(p.string() + ": no fixations");
  return fx;
}

struct GroundTruthFiles {
  fs::path density;
  fs::path fixations;
  fs::path target;
  fs::path distractor;
  bool any() const { return !density.empty() || !fixations.empty() || !target.empty(); }
};

GroundTruthFiles find_ground_truth(const fs::path& dir, const std::string& stem) {
  GroundTruthFiles g;
  auto pick = [&](const std::string& suffix) {
    const fs::path p = dir / (stem + suffix);
    return fs::is_regular_file(p) ? p : fs::path{};
  };
  g.density = pick("_density.pgm");
  g.fixations = pick("_fix.csv");
  g.target = pick("_target.pgm");
  g.distractor = pick("_distractor.pgm");
  if (g.target.empty() != g.distractor.empty()) {
    throw std::runtime_error(stem + ": target and distractor masks must come together");
  }
  return g;
}

using Row = std::map<std::string, std::optional<double>>;

Row evaluate(const fs::path& pred_path, const fs::path& gt_dir,
             const std::string& stem, const GroundTruthFiles& g,
             const EvalOptions& o) {
  Map2D pred = read_pgm(pred_path);
  std::optional<Map2D> density;
  std::optional<SingletonGroundTruth> singleton;
  if (!g.density.empty()) density = read_pgm(g.density);
  if (!g.target.empty()) {
    singleton = read_singleton_masks(gt_dir, stem);
    validate(*singleton);
  }
  // Predictions are compared on the ground-truth grid.
  const Map2D* ref = density ? &*density : singleton ? &singleton->target : nullptr;
  if (density && singleton && !density->same_shape(singleton->target)) {
    throw std::runtime_error(stem + ": density and masks differ in size");
  }
  if (ref != nullptr && !pred.same_shape(*ref)) {
    pred = resize_bilinear(pred, ref->height(), ref->width());
  }
  std::optional<FixationSet> fx;
  if (!g.fixations.empty()) fx = read_fixations(g.fixations, pred.height(), pred.width());

  std::optional<std::optional<int>> nfix;
  auto search = [&]() -> std::optional<int> {
    if (!nfix) {
      nfix = fixation_search(pred, singleton->target, kDefaultMaxFixations,
                             default_ior_radius(pred.height(), pred.width()));
    }
    return *nfix;
  };

  Row row;
  for (const std::string& m : o.metrics) {
    std::optional<double> v;
    try {
      if (m == "cc" && density) v = cc(pred, *density);
      if (m == "kl" && density) v = kl_div(pred, *density);
      if (m == "sim" && density) v = sim(pred, *density);
      if (m == "nss" && fx) v = nss(pred, *fx);
      if (m == "aucj" && fx) v = auc_judd(pred, *fx);
      if (m == "aucb" && fx) v = auc_borji(pred, *fx, o.splits, o.seed);
      if (m == "gsi" && singleton) v = gsi(pred, *singleton);
      if (m == "msr_t" && singleton) v = msr(pred, *singleton).target;
      if (m == "msr_b" && singleton) v = msr(pred, *singleton).background;
      if (m == "nfix" && singleton) {
        if (const auto n = search()) v = *n;
      }
      if (m == "found15" && singleton) {
        const auto n = search();
        v = n && *n <= 15 ? 100.0 : 0.0;
      }
    } catch (const UndefinedMetric&) {
      v.reset();
    }
    row[m] = v;
  }
  return row;
}

std::string pred_stem(const fs::path& p) {
  std::string s = p.stem().string();
  constexpr std::string_view kSuffix = "_sal";
  if (s.size() > kSuffix.size() && s.ends_with(kSuffix)) s.resize(s.size() - kSuffix.size());
  return s;
}

int cmd_eval(EvalOptions o, std::ostream& out, std::ostream& err) {
  if (o.metrics.empty()) o.metrics = all_metrics();
  for (const std::string& m : o.metrics) {
    if (std::find(all_metrics().begin(), all_metrics().end(), m) == all_metrics().end()) {
      throw UsageError("unknown metric: " + m);
    }
  }
  if (o.splits == 0) throw UsageError("--splits must be >= 1");
  if (!fs::is_directory(o.gt)) {
    err << "error: ground-truth directory not found: " << o.gt << '\n';
    return kExitFailure;
  }
  std::vector<fs::path> preds;
  try {
    preds = list_inputs(o.pred, ".pgm");
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }

  std::vector<std::pair<std::string, Row>> rows;
  int failed = 0;
  for (const fs::path& p : preds) {
    const std::string stem = pred_stem(p);
    try {
      const GroundTruthFiles g = find_ground_truth(o.gt, stem);
      if (!g.any()) continue;
      rows.emplace_back(stem, evaluate(p, o.gt, stem, g, o));
    } catch (const std::exception& e) {
      err << "error: " << p.string() << ": " << e.what() << '\n';
      ++failed;
    }
  }
  if (rows.empty() && failed == 0) {
    err << "error: no prediction in " << o.pred << " has ground truth in " << o.gt << '\n';
    return kExitFailure;
  }

  std::ostringstream csv;
  csv << "image";
  for (const std::string& m : o.metrics) csv << ',' << m;
  csv << '\n';
  for (const auto& [stem, row] : rows) {
    csv << stem;
    for (const std::string& m : o.metrics) {
      const auto& v = row.at(m);
      csv << ',' << (v ? format_fixed(*v) : "NA");
    }
    csv << '\n';
  }
  csv << "MEAN";
  for (const std::string& m : o.metrics) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& r : rows) {
      if (const auto& v = r.second.at(m)) {
        sum += *v;
        ++n;
      }
    }
    csv << ',' << (n > 0 ? format_fixed(sum / static_cast<double>(n)) : "NA");
  }
  csv << '\n';

  if (o.out.empty()) {
    out << csv.str();
  } else {
    std::ofstream f(o.out, std::ios::trunc);
    if (!f || !(f << csv.str())) {
      err << "error: cannot write " << o.out << '\n';
      return kExitFailure;
    }
  }
  return failed == 0 ? kExitOk : kExitFailure;
}

// ---------------------------------------------------------------- gen

struct GenOptions {
  std::string kind;
  std::vector<double> deltas;
  std::string grid = "5x8";
  std::uint64_t seed = 0;
  std::string out;
  std::optional<std::size_t> cell_size;
  std::optional<double> element_size;
  std::optional<double> base_hue;
  std::optional<double> base_orientation;
};

std::pair<std::size_t, std::size_t> parse_grid(const std::string& s) {
  const auto x = s.find('x');
  std::size_t r = 0;
  std::size_t c = 0;
  const char* b = s.data();
  const char* e = b + s.size();
  if (x == std::string::npos || std::from_chars(b, b + x, r).ptr != b + x ||
      std::from_chars(b + x + 1, e, c).ptr != e) {
    throw UsageError("--grid expects ROWSxCOLS, got '" + s + "'");
  }
  return {r, c};
}

int cmd_gen(const GenOptions& o, std::ostream& out, std::ostream& err) {
  StimulusSpec base;
  try {
    base.kind = parse_stimulus_kind(o.kind);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  std::tie(base.rows, base.cols) = parse_grid(o.grid);
  base.seed = o.seed;
  if (o.cell_size) base.cell_size = *o.cell_size;
  if (o.element_size) base.element_size = *o.element_size;
  if (o.base_hue) base.base_hue = *o.base_hue;
  if (o.base_orientation) base.base_orientation = *o.base_orientation;

  // Reject the whole request before writing anything.
  for (double d : o.deltas) {
    StimulusSpec s = base;
    s.delta = d;
    try {
      validate(s);
    } catch (const std::invalid_argument& e) {
      throw UsageError(std::string(e.what()) + " (delta " + format_number(d) + ")");
    }
  }
  const fs::path dir(o.out);
  try {
    fs::create_directories(dir);
    const auto stimuli = sweep(base.kind, o.deltas, base);
    for (const Stimulus& s : stimuli) {
      write_stimulus(s, dir, o.kind + "_" + format_number(s.spec.delta));
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  out << o.deltas.size() << " stimuli written to " << dir.string() << '\n';
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Training-free saliency from multi-level feature rarity", "deeprare"};
  app.require_subcommand(1);

  RunOptions ro;
  CLI::App* run_cmd = app.add_subcommand("run", "Predict saliency maps");
  auto* features = run_cmd->add_option("--features", ro.features, "DRF file or directory of .drf files");
  auto* images = run_cmd->add_option("--images", ro.images, "PPM image or directory of .ppm files");
  features->excludes(images);
  run_cmd->add_option("--backbone", ro.backbone, "Feature extractor for --images (toy)")
      ->check(CLI::IsMember({"toy"}));
  run_cmd->add_option("--thresholds", ro.thresholds, "Rarity thresholds to average")
      ->delimiter(',')
      ->capture_default_str();
  run_cmd->add_flag("--face", ro.face, "Add the VGG16 face channel");
  run_cmd->add_option("--group-weights", ro.group_weights, "Five group weights")->delimiter(',');
  run_cmd->add_option("--border-margin", ro.border_margin, "Zeroed border band as a fraction of min(H, W)")
      ->capture_default_str();
  run_cmd->add_option("--sigma-fraction", ro.sigma_fraction, "Smoothing sigma as a fraction of the width")
      ->capture_default_str();
  run_cmd->add_flag("--no-square", ro.no_square, "Skip squaring after smoothing");
  run_cmd->add_flag("--decompose", ro.decompose, "Also write per-layer and per-group maps");
  run_cmd->add_option("--out", ro.out, "Output directory")->required();
  run_cmd->add_option("--workers", ro.workers, "Inputs processed in parallel")->capture_default_str();

  EvalOptions eo;
  CLI::App* eval_cmd = app.add_subcommand("eval", "Score predictions against ground truth");
  eval_cmd->add_option("--pred", eo.pred, "Directory of predicted PGM maps")->required();
  eval_cmd->add_option("--gt", eo.gt, "Ground-truth directory")->required();
  eval_cmd->add_option("--metrics", eo.metrics, "Comma-separated metric names (default: all)")
      ->delimiter(',');
  eval_cmd->add_option("--seed", eo.seed, "Seed for AUC-Borji sampling")->capture_default_str();
  eval_cmd->add_option("--splits", eo.splits, "AUC-Borji random splits")->capture_default_str();
  eval_cmd->add_option("--out", eo.out, "Write the CSV here instead of stdout");

  GenOptions go;
  CLI::App* gen_cmd = app.add_subcommand("gen", "Generate pop-out search displays");
  gen_cmd->add_option("--kind", go.kind, "color, orientation or size")->required();
  gen_cmd->add_option("--deltas", go.deltas, "Target/distractor differences")
      ->delimiter(',')
      ->required();
  gen_cmd->add_option("--grid", go.grid, "ROWSxCOLS")->capture_default_str();
  gen_cmd->add_option("--seed", go.seed, "Seed for the target position")->capture_default_str();
  gen_cmd->add_option("--out", go.out, "Output directory")->required();
  gen_cmd->add_option("--cell-size", go.cell_size, "Cell side in pixels");
  gen_cmd->add_option("--element-size", go.element_size, "Bar length in pixels");
  gen_cmd->add_option("--base-hue", go.base_hue, "Distractor hue in degrees");
  gen_cmd->add_option("--base-orientation", go.base_orientation, "Distractor angle from vertical");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (run_cmd->parsed()) return cmd_run(ro, out, err);
    if (eval_cmd->parsed()) return cmd_eval(eo, out, err);
    return cmd_gen(go, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace deeprare::cli
