#pragma once

#include <cstdint>
#include <vector>

#include "ra/errors.hpp"

namespace ra {

// H x W x 3 row-major 8-bit sRGB raster. Immutable by convention once
// produced; all operations return new buffers.
struct ImageBuffer {
  int width = 0;
  int height = 0;
  static constexpr int kChannels = 3;
  std::vector<uint8_t> data;  // size = width * height * 3

  ImageBuffer() = default;
  ImageBuffer(int w, int h, uint8_t fill = 0)
      : width(w), height(h), data(static_cast<size_t>(w) * h * kChannels, fill) {
    if (w < 1 || h < 1) throw InvalidRange("ImageBuffer: dimensions must be >= 1");
  }

  size_t size() const { return data.size(); }

  uint8_t at(int x, int y, int c) const {
    return data[(static_cast<size_t>(y) * width + x) * kChannels + c];
  }
  uint8_t& at(int x, int y, int c) {
    return data[(static_cast<size_t>(y) * width + x) * kChannels + c];
  }

  bool same_shape(const ImageBuffer& o) const {
    return width == o.width && height == o.height;
  }
  bool operator==(const ImageBuffer& o) const = default;
};

}  // namespace ra
