#include "qpat/pgm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

namespace qpat {

namespace {

// Skips whitespace and '#' comment lines, then reads one unsigned integer.
long read_header_int(std::istream& in, const char* what) {
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (!std::isspace(c)) {
      break;
    }
    c = in.get();
  }
  if (c == EOF || !std::isdigit(c))
    throw std::invalid_argument(std::string("pgm: malformed header, expected ") + what);
  long v = 0;
  while (c != EOF && std::isdigit(c)) {
    v = v * 10 + (c - '0');
    c = in.get();
  }
  if (c != EOF) in.unget();
  return v;
}

}  // namespace

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("pgm: cannot open " + path.string());
  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (magic[0] != 'P' || magic[1] != '5')
    throw std::invalid_argument("pgm: " + path.string() + " is not a binary PGM (magic P5)");
  const long w = read_header_int(in, "width");
  const long h = read_header_int(in, "height");
  const long maxval = read_header_int(in, "maxval");
  if (w <= 0 || h <= 0) throw std::invalid_argument("pgm: non-positive dimensions");
  if (maxval != 255 && maxval != 65535)
    throw std::invalid_argument("pgm: unsupported maxval " + std::to_string(maxval) +
                                " (expected 255 or 65535)");
  in.get();  // single whitespace separating header from raster

  GrayImage img;
  img.width = static_cast<int>(w);
  img.height = static_cast<int>(h);
  img.samples.resize(static_cast<std::size_t>(w) * h);
  const std::size_t bytes_per = maxval == 255 ? 1 : 2;
  std::vector<unsigned char> raw(img.samples.size() * bytes_per);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size())
    throw std::invalid_argument("pgm: truncated raster in " + path.string());
  const double scale = 1.0 / static_cast<double>(maxval);
  for (std::size_t i = 0; i < img.samples.size(); ++i) {
    const unsigned v = bytes_per == 1
                           ? raw[i]
                           : (static_cast<unsigned>(raw[2 * i]) << 8) | raw[2 * i + 1];
    img.samples[i] = v * scale;
  }
  return img;
}

void write_pgm(const std::filesystem::path& path, const GrayImage& img, int maxval) {
  img.validate();
  if (maxval != 255 && maxval != 65535)
    throw std::invalid_argument("pgm: unsupported maxval " + std::to_string(maxval));
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("pgm: cannot write " + path.string());
  out << "P5\n" << img.width << " " << img.height << "\n" << maxval << "\n";
  for (double v : img.samples) {
    const long q = std::lround(std::clamp(v, 0.0, 1.0) * maxval);
    if (maxval == 255) {
      out.put(static_cast<char>(q));
    } else {
      out.put(static_cast<char>((q >> 8) & 0xff));  // big-endian
      out.put(static_cast<char>(q & 0xff));
    }
  }
  if (!out) throw std::runtime_error("pgm: write failure on " + path.string());
}

void write_pgm(const std::filesystem::path& path, const BinaryMask& mask) {
  GrayImage img;
  img.width = mask.width;
  img.height = mask.height;
  img.samples.resize(mask.bits.size());
  for (std::size_t i = 0; i < mask.bits.size(); ++i) img.samples[i] = mask.bits[i] ? 1.0 : 0.0;
  write_pgm(path, img, 255);
}

}  // namespace qpat
