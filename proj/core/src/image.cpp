#include "benthos/image.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <string>

#include "benthos/error.hpp"

namespace benthos {

RgbImage::RgbImage(std::size_t width, std::size_t height, Rgb fill)
    : width_(width), height_(height), bytes_(width * height * 3) {
  for (std::size_t i = 0; i < width * height; ++i) {
    std::copy(fill.begin(), fill.end(), bytes_.begin() + i * 3);
  }
}

Rgb RgbImage::at(std::size_t row, std::size_t col) const {
  const std::size_t i = (row * width_ + col) * 3;
  return {bytes_[i], bytes_[i + 1], bytes_[i + 2]};
}

void RgbImage::set(std::size_t row, std::size_t col, Rgb value) {
  const std::size_t i = (row * width_ + col) * 3;
  bytes_[i] = value[0];
  bytes_[i + 1] = value[1];
  bytes_[i + 2] = value[2];
}

RgbImage RgbImage::crop(std::size_t col, std::size_t row, std::size_t w,
                        std::size_t h) const {
  if (col >= width_ || row >= height_) return {};
  w = std::min(w, width_ - col);
  h = std::min(h, height_ - row);
  RgbImage out(w, h);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) out.set(r, c, at(row + r, col + c));
  }
  return out;
}

void write_ppm(const RgbImage& image, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  out << "P6\n" << image.width() << ' ' << image.height() << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.bytes().data()),
            static_cast<std::streamsize>(image.bytes().size()));
  if (!out) throw Error(ErrorKind::io, "write failed for " + path.string());
}

namespace {

// Next whitespace-delimited header token, skipping `#` comments.
std::string next_token(std::istream& in) {
  std::string token;
  while (in) {
    const int ch = in.get();
    if (ch == EOF) break;
    if (ch == '#') {
      std::string ignored;
      std::getline(in, ignored);
      if (!token.empty()) break;
      continue;
    }
    if (std::isspace(ch)) {
      if (!token.empty()) break;
      continue;
    }
    token.push_back(static_cast<char>(ch));
  }
  return token;
}

}  // namespace

RgbImage read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  if (next_token(in) != "P6") {
    throw Error(ErrorKind::format, path.string() + ": not a binary PPM");
  }
  std::size_t width = 0, height = 0, maxval = 0;
  try {
    width = std::stoul(next_token(in));
    height = std::stoul(next_token(in));
    maxval = std::stoul(next_token(in));
  } catch (const std::exception&) {
    throw Error(ErrorKind::format, path.string() + ": bad PPM header");
  }
  if (maxval != 255) {
    throw Error(ErrorKind::format, path.string() + ": only maxval 255 supported");
  }
  RgbImage image(width, height);
  std::vector<char> buf(width * height * 3);
  in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (static_cast<std::size_t>(in.gcount()) != buf.size()) {
    throw Error(ErrorKind::corrupt_file, path.string() + ": truncated PPM");
  }
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      const std::size_t i = (r * width + c) * 3;
      image.set(r, c,
                {static_cast<std::uint8_t>(buf[i]),
                 static_cast<std::uint8_t>(buf[i + 1]),
                 static_cast<std::uint8_t>(buf[i + 2])});
    }
  }
  return image;
}

}  // namespace benthos
