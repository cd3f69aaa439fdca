#include "deeprare/feature_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace deeprare {

namespace {

constexpr char kMagic[4] = {'D', 'R', 'F', '1'};
// Refuse absurd payloads from corrupted headers before allocating.
constexpr std::uint64_t kMaxLayerValues = std::uint64_t{1} << 31;

void put_u32(std::ostream& out, std::uint32_t v) {
  const char bytes[4] = {static_cast<char>(v & 0xffu),
                         static_cast<char>((v >> 8) & 0xffu),
                         static_cast<char>((v >> 16) & 0xffu),
                         static_cast<char>((v >> 24) & 0xffu)};
  out.write(bytes, 4);
}

std::uint32_t get_u32(std::istream& in, const char* field) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) {
    throw DrfError(DrfError::Kind::truncated,
                   std::string("DRF truncated while reading ") + field);
  }
  return static_cast<std::uint32_t>(b[0]) |
         (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

std::uint32_t checked_u32(std::size_t v, const char* field) {
  if (v > 0xffffffffu) {
    throw DrfError(DrfError::Kind::invalid,
                   std::string("DRF field overflows u32: ") + field);
  }
  return static_cast<std::uint32_t>(v);
}

}  // namespace

std::size_t LayerSelection::layer_count() const noexcept {
  std::size_t n = 0;
  for (const auto& g : groups) n += g.size();
  return n;
}

int LayerSelection::group_of(int layer_id) const noexcept {
  for (int g = 0; g < 5; ++g) {
    for (int id : groups[static_cast<std::size_t>(g)]) {
      if (id == layer_id) return g + 1;
    }
  }
  return 0;
}

LayerSelection layer_selection(Backbone backbone) {
  LayerSelection s;
  s.backbone = backbone;
  switch (backbone) {
    case Backbone::vgg16:
      s.groups = {{{1, 2}, {4, 5}, {7, 8, 9}, {11, 12, 13}, {15, 16, 17}}};
      return s;
    case Backbone::vgg19:
      s.groups = {{{1, 2},
                   {4, 5},
                   {7, 8, 9, 10},
                   {12, 13, 14, 15},
                   {17, 18, 19, 20}}};
      return s;
    case Backbone::mobilenet_v2:
      s.groups = {{{16, 18},
                   {24, 32},
                   {41, 50, 59, 67},
                   {76, 85, 94, 102},
                   {111, 120, 137, 146}}};
      return s;
    case Backbone::toy:
      s.groups = {{{1, 2}, {3, 4}, {5, 6}, {7, 8}, {9, 10}}};
      return s;
  }
  throw std::invalid_argument("layer_selection: unknown backbone");
}

void validate_stack(const FeatureStack& stack) {
  const LayerSelection table = layer_selection(stack.backbone);
  if (stack.image_height == 0 || stack.image_width == 0) {
    throw DrfError(DrfError::Kind::invalid, "stack: zero image dimension");
  }
  if (stack.tensors.size() != table.layer_count()) {
    throw DrfError(DrfError::Kind::layer_set,
                   "stack has " + std::to_string(stack.tensors.size()) +
                       " layers, backbone " +
                       std::string(to_string(stack.backbone)) + " expects " +
                       std::to_string(table.layer_count()));
  }
  std::size_t i = 0;
  for (int g = 1; g <= 5; ++g) {
    for (int id : table.groups[static_cast<std::size_t>(g - 1)]) {
      const FeatureTensor& t = stack.tensors[i++];
      if (t.layer_id() != id || t.group_id() != g) {
        throw DrfError(DrfError::Kind::layer_set,
                       "stack layer " + std::to_string(t.layer_id()) +
                           " (group " + std::to_string(t.group_id()) +
                           ") where layer " + std::to_string(id) +
                           " (group " + std::to_string(g) + ") expected");
      }
    }
  }
}

std::size_t write_drf(const FeatureStack& stack, std::ostream& out) {
  validate_stack(stack);
  std::size_t bytes = 0;
  out.write(kMagic, 4);
  put_u32(out, static_cast<std::uint32_t>(stack.backbone));
  put_u32(out, stack.image_height);
  put_u32(out, stack.image_width);
  put_u32(out, checked_u32(stack.tensors.size(), "layer_count"));
  bytes += kDrfHeaderBytes;

  std::vector<char> payload;
  for (const FeatureTensor& t : stack.tensors) {
    put_u32(out, static_cast<std::uint32_t>(t.layer_id()));
    out.put(static_cast<char>(t.group_id()));
    put_u32(out, checked_u32(t.height(), "H"));
    put_u32(out, checked_u32(t.width(), "W"));
    put_u32(out, checked_u32(t.channels(), "C"));
    bytes += kDrfLayerRecordBytes;

    const auto values = t.values();
    payload.resize(values.size() * 4);
    for (std::size_t k = 0; k < values.size(); ++k) {
      const float f = static_cast<float>(values[k]);
      if (!std::isfinite(f)) {
        throw DrfError(DrfError::Kind::non_finite,
                       "value overflows float32 in layer " +
                           std::to_string(t.layer_id()));
      }
      const auto bits = std::bit_cast<std::uint32_t>(f);
      payload[4 * k + 0] = static_cast<char>(bits & 0xffu);
      payload[4 * k + 1] = static_cast<char>((bits >> 8) & 0xffu);
      payload[4 * k + 2] = static_cast<char>((bits >> 16) & 0xffu);
      payload[4 * k + 3] = static_cast<char>((bits >> 24) & 0xffu);
    }
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    bytes += payload.size();
  }
  if (!out) {
    throw DrfError(DrfError::Kind::io, "DRF write failed");
  }
  return bytes;
}

std::size_t write_drf(const FeatureStack& stack,
                      const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw DrfError(DrfError::Kind::io,
                   "cannot open for writing: " + path.string());
  }
  const std::size_t n = write_drf(stack, out);
  out.flush();
  if (!out) {
    throw DrfError(DrfError::Kind::io, "write failed: " + path.string());
  }
  return n;
}

FeatureStack read_drf(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4)) {
    throw DrfError(DrfError::Kind::truncated, "DRF truncated in magic");
  }
  if (std::memcmp(magic, kMagic, 4) != 0) {
    throw DrfError(DrfError::Kind::bad_magic, "not a DRF1 stream (bad magic)");
  }
  const std::uint32_t code = get_u32(in, "backbone");
  if (code > static_cast<std::uint32_t>(Backbone::toy)) {
    throw DrfError(DrfError::Kind::invalid,
                   "unknown backbone code " + std::to_string(code));
  }
  FeatureStack stack;
  stack.backbone = static_cast<Backbone>(code);
  stack.image_height = get_u32(in, "image_height");
  stack.image_width = get_u32(in, "image_width");
  const std::uint32_t layer_count = get_u32(in, "layer_count");

  const LayerSelection table = layer_selection(stack.backbone);
  if (layer_count != table.layer_count()) {
    throw DrfError(DrfError::Kind::layer_set,
                   "DRF declares " + std::to_string(layer_count) +
                       " layers, backbone " +
                       std::string(to_string(stack.backbone)) + " has " +
                       std::to_string(table.layer_count()));
  }

  std::vector<unsigned char> payload;
  for (std::uint32_t l = 0; l < layer_count; ++l) {
    const std::uint32_t layer_id = get_u32(in, "layer_id");
    const int group = in.get();
    if (group == std::char_traits<char>::eof()) {
      throw DrfError(DrfError::Kind::truncated, "DRF truncated in group_id");
    }
    const std::uint32_t h = get_u32(in, "H");
    const std::uint32_t w = get_u32(in, "W");
    const std::uint32_t c = get_u32(in, "C");
    const std::uint64_t n = std::uint64_t{h} * w * c;
    if (n == 0 || n > kMaxLayerValues) {
      throw DrfError(DrfError::Kind::invalid,
                     "DRF layer " + std::to_string(layer_id) +
                         " has unsupported size");
    }
    if (group < 1 || group > 5 ||
        table.group_of(static_cast<int>(layer_id)) != group) {
      throw DrfError(DrfError::Kind::layer_set,
                     "DRF layer " + std::to_string(layer_id) + " in group " +
                         std::to_string(group) + " is not in the " +
                         std::string(to_string(stack.backbone)) + " table");
    }
    payload.resize(static_cast<std::size_t>(n) * 4);
    if (!in.read(reinterpret_cast<char*>(payload.data()),
                 static_cast<std::streamsize>(payload.size()))) {
      throw DrfError(DrfError::Kind::truncated,
                     "DRF payload truncated in layer " +
                         std::to_string(layer_id));
    }
    std::vector<double> values(static_cast<std::size_t>(n));
    for (std::size_t k = 0; k < values.size(); ++k) {
      const std::uint32_t bits =
          static_cast<std::uint32_t>(payload[4 * k]) |
          (static_cast<std::uint32_t>(payload[4 * k + 1]) << 8) |
          (static_cast<std::uint32_t>(payload[4 * k + 2]) << 16) |
          (static_cast<std::uint32_t>(payload[4 * k + 3]) << 24);
      const float f = std::bit_cast<float>(bits);
      if (!std::isfinite(f)) {
        throw DrfError(DrfError::Kind::non_finite,
                       "DRF layer " + std::to_string(layer_id) +
                           " contains a non-finite value");
      }
      values[k] = static_cast<double>(f);
    }
    stack.tensors.emplace_back(static_cast<int>(layer_id), group, h, w, c,
                               std::move(values));
  }
  validate_stack(stack);
  return stack;
}

FeatureStack read_drf(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DrfError(DrfError::Kind::io, "cannot open: " + path.string());
  }
  return read_drf(in);
}

}  // namespace deeprare
