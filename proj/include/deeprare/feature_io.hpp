// DRF ("DeepRare Feature") interchange files and per-backbone layer tables.
//
// Layout, little-endian:
//   "DRF1" | backbone u32 | image_height u32 | image_width u32 |
//   layer_count u32 | per layer: layer_id u32, group_id u8, H u32, W u32,
//   C u32, then H*W*C float32 (row-major, channels fastest).

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "deeprare/tensor.hpp"

namespace deeprare {

inline constexpr std::size_t kDrfHeaderBytes = 20;
inline constexpr std::size_t kDrfLayerRecordBytes = 17;

struct LayerSelection {
  Backbone backbone = Backbone::toy;
  std::array<std::vector<int>, 5> groups;

  std::size_t layer_count() const noexcept;
  /// Group (1..5) holding `layer_id`, or 0 if the layer is not selected.
  int group_of(int layer_id) const noexcept;
};

/// The selected layers of each backbone. TOY: {1,2}{3,4}{5,6}{7,8}{9,10}.
LayerSelection layer_selection(Backbone backbone);

class DrfError : public std::runtime_error {
 public:
  enum class Kind { bad_magic, truncated, layer_set, non_finite, io, invalid };

  DrfError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Throws DrfError(layer_set) unless the stack's tensors are exactly the
/// backbone's selection, sorted by (group, layer), with matching group ids.
void validate_stack(const FeatureStack& stack);

/// Returns the number of bytes written.
std::size_t write_drf(const FeatureStack& stack, std::ostream& out);
std::size_t write_drf(const FeatureStack& stack,
                      const std::filesystem::path& path);

FeatureStack read_drf(std::istream& in);
FeatureStack read_drf(const std::filesystem::path& path);

}  // namespace deeprare
