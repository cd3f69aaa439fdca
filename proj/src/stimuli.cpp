#include "deeprare/stimuli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <stdexcept>

namespace deeprare {

namespace {

constexpr int kSupersample = 4;
constexpr double kBarAspect = 0.25;

struct Bar {
  double cx;
  double cy;
  double length;
  double width;
  double angle_deg;
  std::array<std::uint8_t, 3> color;
};

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double half_extent(double length, double width) {
  return 0.5 * std::hypot(length, width);
}

// Fraction of the pixel's subsamples inside the bar.
double coverage(const Bar& bar, std::size_t row, std::size_t col,
                double cos_a, double sin_a) {
  int inside = 0;
  for (int sy = 0; sy < kSupersample; ++sy) {
    for (int sx = 0; sx < kSupersample; ++sx) {
      const double x = static_cast<double>(col) + (sx + 0.5) / kSupersample - bar.cx;
      const double y = static_cast<double>(row) + (sy + 0.5) / kSupersample - bar.cy;
      // Axis along the bar: (sin a, -cos a); a = 0 is vertical.
      const double along = x * sin_a - y * cos_a;
      const double across = x * cos_a + y * sin_a;
      if (std::abs(along) <= bar.length / 2 && std::abs(across) <= bar.width / 2) {
        ++inside;
      }
    }
  }
  return static_cast<double>(inside) / (kSupersample * kSupersample);
}

void draw(const Bar& bar, RgbImage& img, Map2D& footprint) {
  const double a = bar.angle_deg * std::numbers::pi / 180.0;
  const double cos_a = std::cos(a);
  const double sin_a = std::sin(a);
  const double reach = half_extent(bar.length, bar.width) + 1.0;
  const auto r0 = static_cast<std::size_t>(std::max(0.0, std::floor(bar.cy - reach)));
  const auto c0 = static_cast<std::size_t>(std::max(0.0, std::floor(bar.cx - reach)));
  const auto r1 = std::min(img.height, static_cast<std::size_t>(std::ceil(bar.cy + reach)));
  const auto c1 = std::min(img.width, static_cast<std::size_t>(std::ceil(bar.cx + reach)));
  for (std::size_t r = r0; r < r1; ++r) {
    for (std::size_t c = c0; c < c1; ++c) {
      const double cov = coverage(bar, r, c, cos_a, sin_a);
      if (cov <= 0.0) continue;
      std::uint8_t* px = img.pixel(r, c);
      for (int k = 0; k < 3; ++k) {
        const double bg = px[k];
        px[k] = static_cast<std::uint8_t>(std::lround(bg + cov * (bar.color[static_cast<std::size_t>(k)] - bg)));
      }
      footprint(r, c) = 1.0;
    }
  }
}

GridCell pick_target(const StimulusSpec& spec) {
  if (spec.target_cell) return *spec.target_cell;
  std::mt19937_64 rng(spec.seed);
  std::uniform_int_distribution<std::size_t> cell(0, spec.rows * spec.cols - 1);
  const std::size_t k = cell(rng);
  return {k / spec.cols, k % spec.cols};
}

}  // namespace

std::string_view to_string(StimulusKind k) noexcept {
  switch (k) {
    case StimulusKind::color:
      return "color";
    case StimulusKind::orientation:
      return "orientation";
    case StimulusKind::size:
      return "size";
  }
  return "unknown";
}

StimulusKind parse_stimulus_kind(std::string_view name) {
  if (name == "color") return StimulusKind::color;
  if (name == "orientation") return StimulusKind::orientation;
  if (name == "size") return StimulusKind::size;
  throw std::invalid_argument("unknown stimulus kind: " + std::string(name));
}

std::array<std::uint8_t, 3> hue_to_rgb(double hue_degrees) {
  double h = std::fmod(hue_degrees, 360.0);
  if (h < 0) h += 360.0;
  const double x = 1.0 - std::abs(std::fmod(h / 60.0, 2.0) - 1.0);
  double r = 0, g = 0, b = 0;
  switch (static_cast<int>(h / 60.0)) {
    case 0: r = 1; g = x; break;
    case 1: r = x; g = 1; break;
    case 2: g = 1; b = x; break;
    case 3: g = x; b = 1; break;
    case 4: r = x; b = 1; break;
    default: r = 1; b = x; break;
  }
  auto q = [](double v) { return static_cast<std::uint8_t>(std::lround(v * 255.0)); };
  return {q(r), q(g), q(b)};
}

void validate(const StimulusSpec& spec) {
  if (spec.rows == 0 || spec.cols == 0 || spec.rows * spec.cols < 2) {
    throw std::invalid_argument("stimulus: grid needs at least two cells");
  }
  if (spec.cell_size < 4) {
    throw std::invalid_argument("stimulus: cell_size must be >= 4");
  }
  if (!(spec.element_size > 0.0)) {
    throw std::invalid_argument("stimulus: element_size must be > 0");
  }
  switch (spec.kind) {
    case StimulusKind::color:
      if (!(spec.delta >= 0.0 && spec.delta <= 180.0)) {
        throw std::invalid_argument("stimulus: hue delta must lie in [0, 180]");
      }
      break;
    case StimulusKind::orientation:
      if (!(spec.delta >= 0.0 && spec.delta <= 90.0)) {
        throw std::invalid_argument(
            "stimulus: orientation delta must lie in [0, 90]");
      }
      break;
    case StimulusKind::size:
      if (!(spec.delta >= 0.25 && spec.delta <= 4.0)) {
        throw std::invalid_argument("stimulus: size ratio must lie in [0.25, 4]");
      }
      break;
  }
  if (spec.target_cell &&
      (spec.target_cell->row >= spec.rows || spec.target_cell->col >= spec.cols)) {
    throw std::invalid_argument("stimulus: target cell is off the grid");
  }
  const double scale = spec.kind == StimulusKind::size ? std::max(1.0, spec.delta) : 1.0;
  const double len = spec.element_size * scale;
  if (half_extent(len, len * kBarAspect) + 1.0 > spec.cell_size / 2.0) {
    throw std::invalid_argument("stimulus: element does not fit in its cell");
  }
}

Stimulus generate(const StimulusSpec& spec) {
  validate(spec);
  Stimulus s;
  s.spec = spec;
  s.target = pick_target(spec);
  const std::size_t h = spec.image_height();
  const std::size_t w = spec.image_width();
  s.image = RgbImage(h, w, spec.background);
  s.ground_truth.target = Map2D(h, w);
  s.ground_truth.distractor = Map2D(h, w);

  const auto base_color = hue_to_rgb(spec.base_hue);
  for (std::size_t r = 0; r < spec.rows; ++r) {
    for (std::size_t c = 0; c < spec.cols; ++c) {
      const bool is_target = GridCell{r, c} == s.target;
      Bar bar{static_cast<double>(c * spec.cell_size) + spec.cell_size / 2.0,
              static_cast<double>(r * spec.cell_size) + spec.cell_size / 2.0,
              spec.element_size,
              spec.element_size * kBarAspect,
              spec.base_orientation,
              base_color};
      if (is_target) {
        switch (spec.kind) {
          case StimulusKind::color:
            bar.color = hue_to_rgb(spec.base_hue + spec.delta);
            break;
          case StimulusKind::orientation:
            bar.angle_deg += spec.delta;
            break;
          case StimulusKind::size:
            bar.length *= spec.delta;
            bar.width *= spec.delta;
            break;
        }
      }
      draw(bar, s.image,
           is_target ? s.ground_truth.target : s.ground_truth.distractor);
    }
  }
  s.ground_truth.background = Map2D(h, w, 1.0);
  for (std::size_t i = 0; i < h * w; ++i) {
    if (s.ground_truth.target[i] > 0 || s.ground_truth.distractor[i] > 0) {
      s.ground_truth.background[i] = 0.0;
    }
  }
  return s;
}

std::vector<Stimulus> sweep(StimulusKind kind, std::span<const double> deltas,
                            const StimulusSpec& base) {
  if (deltas.empty()) throw std::invalid_argument("sweep: no deltas");
  std::vector<Stimulus> out;
  out.reserve(deltas.size());
  for (double d : deltas) {
    StimulusSpec spec = base;
    spec.kind = kind;
    spec.delta = d;
    out.push_back(generate(spec));
  }
  return out;
}

void write_stimulus(const Stimulus& s, const std::filesystem::path& dir,
                    const std::string& stem) {
  write_ppm(s.image, dir / (stem + ".ppm"));
  write_pgm(s.ground_truth.target, dir / (stem + "_target.pgm"));
  write_pgm(s.ground_truth.distractor, dir / (stem + "_distractor.pgm"));

  std::ofstream side(dir / (stem + ".txt"), std::ios::trunc);
  if (!side) {
    throw std::runtime_error("cannot write sidecar in " + dir.string());
  }
  const StimulusSpec& p = s.spec;
  side << "kind=" << to_string(p.kind) << '\n'
       << "delta=" << format_double(p.delta) << '\n'
       << "rows=" << p.rows << '\n'
       << "cols=" << p.cols << '\n'
       << "cell_size=" << p.cell_size << '\n'
       << "element_size=" << format_double(p.element_size) << '\n'
       << "base_hue=" << format_double(p.base_hue) << '\n'
       << "base_orientation=" << format_double(p.base_orientation) << '\n'
       << "background=" << static_cast<int>(p.background) << '\n'
       << "seed=" << p.seed << '\n'
       << "target_row=" << s.target.row << '\n'
       << "target_col=" << s.target.col << '\n'
       << "image_height=" << p.image_height() << '\n'
       << "image_width=" << p.image_width() << '\n';
}

SingletonGroundTruth read_singleton_masks(const std::filesystem::path& dir,
                                          const std::string& stem) {
  SingletonGroundTruth gt;
  gt.target = read_pgm(dir / (stem + "_target.pgm"));
  gt.distractor = read_pgm(dir / (stem + "_distractor.pgm"));
  if (!gt.target.same_shape(gt.distractor)) {
    throw std::invalid_argument("masks for " + stem + " differ in size");
  }
  gt.background = Map2D(gt.target.height(), gt.target.width());
  for (std::size_t i = 0; i < gt.target.size(); ++i) {
    gt.target[i] = gt.target[i] > 0.5 ? 1.0 : 0.0;
    gt.distractor[i] = gt.distractor[i] > 0.5 && gt.target[i] == 0.0 ? 1.0 : 0.0;
    gt.background[i] = 1.0 - gt.target[i] - gt.distractor[i];
  }
  return gt;
}

}  // namespace deeprare
