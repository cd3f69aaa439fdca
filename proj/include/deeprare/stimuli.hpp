// Pop-out search displays: a grid of identical bars on a gray background
// with one singleton differing in color, orientation or size, plus exact
// target / distractor / background masks.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "deeprare/metrics.hpp"
#include "deeprare/netpbm.hpp"

namespace deeprare {

enum class StimulusKind { color, orientation, size };

std::string_view to_string(StimulusKind k) noexcept;
StimulusKind parse_stimulus_kind(std::string_view name);

struct GridCell {
  std::size_t row = 0;
  std::size_t col = 0;
  bool operator==(const GridCell&) const = default;
};

/// The image is rows * cell_size by cols * cell_size pixels. `delta` is a hue
/// rotation in degrees (color, 0..180), a rotation in degrees (orientation,
/// 0..90) or a length/width ratio (size, 0.25..4).
struct StimulusSpec {
  StimulusKind kind = StimulusKind::color;
  std::size_t rows = 5;
  std::size_t cols = 8;
  std::size_t cell_size = 64;
  double element_size = 24.0;  // bar length; bar width is a quarter of it
  double delta = 90.0;
  std::optional<GridCell> target_cell;  // drawn from `seed` when empty
  std::uint64_t seed = 0;
  double base_hue = 120.0;         // degrees
  double base_orientation = 30.0;  // degrees from vertical
  std::uint8_t background = 128;

  std::size_t image_height() const noexcept { return rows * cell_size; }
  std::size_t image_width() const noexcept { return cols * cell_size; }
};

/// Throws std::invalid_argument for an out-of-range delta, an off-grid target
/// or an element that does not fit its cell.
void validate(const StimulusSpec& spec);

struct Stimulus {
  StimulusSpec spec;
  GridCell target;
  RgbImage image;
  SingletonGroundTruth ground_truth;
};

Stimulus generate(const StimulusSpec& spec);

/// One stimulus per delta; everything else taken from `base`.
std::vector<Stimulus> sweep(StimulusKind kind, std::span<const double> deltas,
                            const StimulusSpec& base);

/// Fully saturated HSV color at value 1.
std::array<std::uint8_t, 3> hue_to_rgb(double hue_degrees);

/// Writes <stem>.ppm, <stem>_target.pgm, <stem>_distractor.pgm and a
/// key=value sidecar <stem>.txt.
void write_stimulus(const Stimulus& s, const std::filesystem::path& dir,
                    const std::string& stem);

/// Reads <stem>_target.pgm and <stem>_distractor.pgm; the background is their
/// complement.
SingletonGroundTruth read_singleton_masks(const std::filesystem::path& dir,
                                          const std::string& stem);

}  // namespace deeprare
