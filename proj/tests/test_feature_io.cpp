#include <doctest.h>

#include <bit>
#include <cstring>
#include <limits>
#include <random>
#include <sstream>

#include "deeprare/feature_io.hpp"
#include "support.hpp"

using namespace deeprare;

namespace {

void put_u32(std::string& s, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) s.push_back(static_cast<char>((v >> (8 * k)) & 0xFF));
}

void put_f32(std::string& s, float f) { put_u32(s, std::bit_cast<std::uint32_t>(f)); }

std::uint32_t get_u32(const std::string& s, std::size_t at) {
  std::uint32_t v = 0;
  for (int k = 3; k >= 0; --k) {
    v = (v << 8) | static_cast<unsigned char>(s[at + static_cast<std::size_t>(k)]);
  }
  return v;
}

DrfError::Kind read_error(const std::string& bytes) {
  std::istringstream in(bytes);
  try {
    read_drf(in);
  } catch (const DrfError& e) {
    return e.kind();
  }
  FAIL("read_drf accepted a malformed stream");
  return DrfError::Kind::invalid;
}

FeatureStack toy_stack(std::size_t side, std::size_t channels, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return testing::random_stack(rng, Backbone::toy, side, channels, 40, 56);
}

}  // namespace

TEST_CASE("layer tables") {
  const auto v16 = layer_selection(Backbone::vgg16);
  CHECK(v16.layer_count() == 13);
  CHECK(v16.groups[0] == std::vector{1, 2});
  CHECK(v16.groups[1] == std::vector{4, 5});
  CHECK(v16.groups[2] == std::vector{7, 8, 9});
  CHECK(v16.groups[3] == std::vector{11, 12, 13});
  CHECK(v16.groups[4] == std::vector{15, 16, 17});
  CHECK(v16.group_of(15) == 5);
  CHECK(v16.group_of(3) == 0);

  const auto v19 = layer_selection(Backbone::vgg19);
  CHECK(v19.layer_count() == 16);
  CHECK(v19.groups[2] == std::vector{7, 8, 9, 10});
  CHECK(v19.groups[4] == std::vector{17, 18, 19, 20});

  const auto mb = layer_selection(Backbone::mobilenet_v2);
  CHECK(mb.groups[0] == std::vector{16, 18});
  CHECK(mb.groups[1] == std::vector{24, 32});
  CHECK(mb.groups[2] == std::vector{41, 50, 59, 67});
  CHECK(mb.groups[3] == std::vector{76, 85, 94, 102});
  CHECK(mb.groups[4] == std::vector{111, 120, 137, 146});

  const auto toy = layer_selection(Backbone::toy);
  CHECK(toy.layer_count() == 10);
  for (int g = 1; g <= 5; ++g) {
    CHECK(toy.groups[static_cast<std::size_t>(g - 1)] == std::vector{2 * g - 1, 2 * g});
  }

  for (Backbone b : {Backbone::vgg16, Backbone::vgg19, Backbone::mobilenet_v2, Backbone::toy}) {
    int prev = 0;
    for (const auto& g : layer_selection(b).groups) {
      for (int id : g) {
        CHECK(id > prev);
        prev = id;
      }
    }
  }
  CHECK_THROWS(layer_selection(static_cast<Backbone>(9)));
}

TEST_CASE("roundtrip is exact on float32 payloads") {
  const FeatureStack s = toy_stack(8, 3, 11);
  std::ostringstream out;
  const std::size_t n = write_drf(s, out);
  const std::string bytes = out.str();
  CHECK(n == bytes.size());

  std::size_t expect = kDrfHeaderBytes;
  for (const auto& t : s.tensors) {
    expect += kDrfLayerRecordBytes + 4 * t.height() * t.width() * t.channels();
  }
  CHECK(n == expect);

  CHECK(bytes.substr(0, 4) == "DRF1");
  CHECK(get_u32(bytes, 4) == 3);
  CHECK(get_u32(bytes, 8) == 40);
  CHECK(get_u32(bytes, 12) == 56);
  CHECK(get_u32(bytes, 16) == 10);
  CHECK(get_u32(bytes, 20) == 1);      // first layer id
  CHECK(bytes[24] == 1);               // its group
  CHECK(get_u32(bytes, 25) == 8);

  std::istringstream in(bytes);
  CHECK(read_drf(in) == s);
}

TEST_CASE("file roundtrip") {
  testing::TempDir dir;
  const FeatureStack s = toy_stack(4, 2, 12);
  const std::size_t n = write_drf(s, dir / "s.drf");
  CHECK(std::filesystem::file_size(dir / "s.drf") == n);
  // sides 4, 2, 1, 1, 1; two layers per group; two channels
  CHECK(n == 20 + 10 * 17 + 2 * 2 * 4 * (16 + 4 + 1 + 1 + 1));
  CHECK(read_drf(dir / "s.drf") == s);
  CHECK_THROWS_AS(read_drf(dir / "none.drf"), DrfError);
}

TEST_CASE("a single 4x4x2 layer record takes 165 bytes") {
  std::string bytes = "DRF1";
  put_u32(bytes, 3);
  put_u32(bytes, 4);
  put_u32(bytes, 4);
  put_u32(bytes, 1);
  put_u32(bytes, 1);
  bytes.push_back(1);
  put_u32(bytes, 4);
  put_u32(bytes, 4);
  put_u32(bytes, 2);
  for (int i = 0; i < 32; ++i) put_f32(bytes, static_cast<float>(i));
  CHECK(bytes.size() == 165);
  // One layer is not the toy table.
  CHECK(read_error(bytes) == DrfError::Kind::layer_set);
}

TEST_CASE("malformed streams") {
  std::ostringstream out;
  write_drf(toy_stack(4, 2, 13), out);
  const std::string good = out.str();

  SUBCASE("bad magic") {
    std::string b = good;
    b.replace(0, 4, "XXXX");
    CHECK(read_error(b) == DrfError::Kind::bad_magic);
  }
  SUBCASE("truncation anywhere") {
    for (std::size_t cut : {std::size_t{2}, std::size_t{10}, std::size_t{21},
                            std::size_t{40}, good.size() - 1}) {
      CHECK(read_error(good.substr(0, cut)) == DrfError::Kind::truncated);
    }
  }
  SUBCASE("VGG16 declared with 12 layers") {
    std::string b = "DRF1";
    put_u32(b, 0);
    put_u32(b, 224);
    put_u32(b, 224);
    put_u32(b, 12);
    CHECK(read_error(b) == DrfError::Kind::layer_set);
  }
  SUBCASE("group byte disagreeing with the table") {
    std::string b = good;
    b[24] = 2;
    CHECK(read_error(b) == DrfError::Kind::layer_set);
  }
  SUBCASE("non-finite payload") {
    std::string b = good;
    const float nan = std::numeric_limits<float>::quiet_NaN();
    std::string f;
    put_f32(f, nan);
    b.replace(20 + 17, 4, f);
    CHECK(read_error(b) == DrfError::Kind::non_finite);
  }
}

TEST_CASE("writer validates the layer set") {
  std::ostringstream out;
  FeatureStack empty;
  empty.backbone = Backbone::toy;
  empty.image_height = empty.image_width = 8;
  CHECK_THROWS_AS(write_drf(empty, out), DrfError);

  FeatureStack swapped = toy_stack(4, 1, 14);
  std::swap(swapped.tensors[0], swapped.tensors[1]);
  CHECK_THROWS_AS(write_drf(swapped, out), DrfError);

  FeatureStack relabeled = toy_stack(4, 1, 15);
  relabeled.backbone = Backbone::vgg16;
  try {
    write_drf(relabeled, out);
    FAIL("expected a layer-set error");
  } catch (const DrfError& e) {
    CHECK(e.kind() == DrfError::Kind::layer_set);
  }
}
