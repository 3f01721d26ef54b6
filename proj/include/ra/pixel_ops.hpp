#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include "ra/image.hpp"

namespace ra {

// Project-wide quantization rule: round half away from zero, clamp to [0,255].
inline uint8_t quantize(double v) {
  long r = std::lround(v);
  if (r < 0) r = 0;
  if (r > 255) r = 255;
  return static_cast<uint8_t>(r);
}

// Per-sample: clamp(round(b + factor*(a - b))). Exact at factor 0 and 1.
ImageBuffer blend(const ImageBuffer& a, const ImageBuffer& b, double factor);

using ChannelLut = std::array<uint8_t, 256>;
using Lut = std::array<ChannelLut, 3>;

inline ChannelLut identity_lut() {
  ChannelLut l{};
  for (int i = 0; i < 256; ++i) l[i] = static_cast<uint8_t>(i);
  return l;
}

ImageBuffer apply_lut(const ImageBuffer& img, const Lut& lut);
ImageBuffer apply_lut(const ImageBuffer& img, const ChannelLut& lut);

}  // namespace ra
