#include "deeprare/netpbm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <string>

namespace deeprare {

namespace {

struct Header {
  char kind = 0;  // '2', '3', '5', '6'
  std::size_t width = 0;
  std::size_t height = 0;
  unsigned maxval = 0;
};

void skip_space_and_comments(std::istream& in) {
  for (;;) {
    const int c = in.peek();
    if (c == '#') {
      std::string ignored;
      std::getline(in, ignored);
    } else if (c != EOF && std::isspace(c)) {
      in.get();
    } else {
      return;
    }
  }
}

std::size_t read_number(std::istream& in, const std::filesystem::path& path) {
  skip_space_and_comments(in);
  std::size_t v = 0;
  if (!(in >> v)) {
    throw NetpbmError("malformed Netpbm header: " + path.string());
  }
  return v;
}

Header read_header(std::istream& in, const std::filesystem::path& path) {
  char p = 0;
  Header h;
  if (!in.get(p) || p != 'P' || !in.get(h.kind)) {
    throw NetpbmError("not a Netpbm file: " + path.string());
  }
  h.width = read_number(in, path);
  h.height = read_number(in, path);
  const std::size_t maxval = read_number(in, path);
  if (h.width == 0 || h.height == 0 || maxval == 0 || maxval > 65535) {
    throw NetpbmError("unsupported Netpbm dimensions or maxval: " +
                      path.string());
  }
  h.maxval = static_cast<unsigned>(maxval);
  if (h.kind == '5' || h.kind == '6') in.get();  // single whitespace byte
  return h;
}

std::vector<unsigned> read_samples(std::istream& in, const Header& h,
                                   std::size_t count,
                                   const std::filesystem::path& path) {
  std::vector<unsigned> out(count);
  if (h.kind == '2' || h.kind == '3') {
    for (auto& v : out) v = static_cast<unsigned>(read_number(in, path));
  } else {
    const std::size_t bytes_per = h.maxval > 255 ? 2 : 1;
    std::vector<unsigned char> raw(count * bytes_per);
    if (!in.read(reinterpret_cast<char*>(raw.data()),
                 static_cast<std::streamsize>(raw.size()))) {
      throw NetpbmError("truncated Netpbm payload: " + path.string());
    }
    for (std::size_t i = 0; i < count; ++i) {
      out[i] = bytes_per == 2 ? (unsigned{raw[2 * i]} << 8) | raw[2 * i + 1]
                              : raw[i];
    }
  }
  for (unsigned v : out) {
    if (v > h.maxval) {
      throw NetpbmError("Netpbm sample exceeds maxval: " + path.string());
    }
  }
  return out;
}

std::uint8_t quantize(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

}  // namespace

void write_pgm(const Map2D& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw NetpbmError("cannot open for writing: " + path.string());
  out << "P5\n" << m.width() << ' ' << m.height() << "\n255\n";
  std::vector<char> bytes(m.size());
  const auto v = m.values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    bytes[i] = static_cast<char>(quantize(v[i]));
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw NetpbmError("write failed: " + path.string());
}

void write_ppm(const RgbImage& img, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw NetpbmError("cannot open for writing: " + path.string());
  out << "P6\n" << img.width << ' ' << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.data.data()),
            static_cast<std::streamsize>(img.data.size()));
  if (!out) throw NetpbmError("write failed: " + path.string());
}

Map2D read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NetpbmError("cannot open: " + path.string());
  const Header h = read_header(in, path);
  if (h.kind != '2' && h.kind != '5') {
    throw NetpbmError("not a PGM file: " + path.string());
  }
  const auto samples = read_samples(in, h, h.width * h.height, path);
  std::vector<double> values(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    values[i] = static_cast<double>(samples[i]) / static_cast<double>(h.maxval);
  }
  return Map2D(h.height, h.width, std::move(values));
}

RgbImage read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NetpbmError("cannot open: " + path.string());
  const Header h = read_header(in, path);
  if (h.kind != '3' && h.kind != '6') {
    throw NetpbmError("not a PPM file: " + path.string());
  }
  const auto samples = read_samples(in, h, h.width * h.height * 3, path);
  RgbImage img(h.height, h.width);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    img.data[i] = h.maxval == 255
                      ? static_cast<std::uint8_t>(samples[i])
                      : quantize(static_cast<double>(samples[i]) / h.maxval);
  }
  return img;
}

}  // namespace deeprare
