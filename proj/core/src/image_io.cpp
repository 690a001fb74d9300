// Copyright 2026 The r2tk Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "r2tk/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "r2tk/errors.hpp"

namespace r2tk {

namespace {

class HeaderReader {
 public:
  HeaderReader(const std::vector<unsigned char>& bytes, const std::string& name)
      : bytes_(bytes), name_(name) {}

  std::size_t next_int() {
    skip_space_and_comments();
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) {
      throw FormatError(name_ + ": malformed image header");
    }
    std::size_t v = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + (bytes_[pos_++] - '0');
      if (v > (1u << 24)) throw FormatError(name_ + ": header value too large");
    }
    return v;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  std::size_t raster_offset() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      throw FormatError(name_ + ": malformed image header");
    }
    return pos_ + 1;
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  const std::vector<unsigned char>& bytes_;
  const std::string& name_;
  std::size_t pos_ = 2;
};

}  // namespace

Tensor read_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open image " + path.string());
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                         std::istreambuf_iterator<char>());
  const std::string name = path.string();
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
    throw FormatError(name + ": not a binary PGM/PPM file");
  }
  const std::size_t channels = bytes[1] == '5' ? 1 : 3;
  HeaderReader header(bytes, name);
  const std::size_t width = header.next_int();
  const std::size_t height = header.next_int();
  const std::size_t maxval = header.next_int();
  if (width == 0 || height == 0) throw FormatError(name + ": zero image dimension");
  if (maxval != 255) {
    throw FormatError(name + ": unsupported maxval " + std::to_string(maxval) + " (only 255)");
  }
  const std::size_t offset = header.raster_offset();
  const std::size_t count = width * height * channels;
  if (bytes.size() - offset < count) throw FormatError(name + ": truncated raster");

  Tensor image({height, width, channels});
  for (std::size_t i = 0; i < count; ++i) {
    image[i] = static_cast<float>(bytes[offset + i]) / 255.0f;
  }
  return image;
}

void write_image(const std::filesystem::path& path, const Tensor& image) {
  if (image.rank() != 3 || (image.dim(2) != 1 && image.dim(2) != 3)) {
    throw DimensionError("write_image: expected H×W×1 or H×W×3, got " +
                         shape_to_string(image.shape()));
  }
  const std::string header = std::string(image.dim(2) == 1 ? "P5" : "P6") + "\n" +
                             std::to_string(image.dim(1)) + " " + std::to_string(image.dim(0)) +
                             "\n255\n";
  std::vector<char> raster(image.size());
  for (std::size_t i = 0; i < image.size(); ++i) {
    const double v = std::clamp(static_cast<double>(image[i]), 0.0, 1.0);
    raster[i] = static_cast<char>(static_cast<unsigned char>(std::floor(v * 255.0 + 0.5)));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write image " + path.string());
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  out.write(raster.data(), static_cast<std::streamsize>(raster.size()));
  if (!out) throw IoError("failed writing image " + path.string());
}

}  // namespace r2tk
