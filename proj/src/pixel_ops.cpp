#include "ra/pixel_ops.hpp"

namespace ra {

ImageBuffer blend(const ImageBuffer& a, const ImageBuffer& b, double factor) {
  if (!a.same_shape(b)) throw DimensionMismatch("blend: shape mismatch");
  if (factor == 1.0) return a;
  if (factor == 0.0) return b;
  ImageBuffer out(a.width, a.height);
  for (size_t i = 0; i < a.size(); ++i) {
    double av = a.data[i], bv = b.data[i];
    out.data[i] = quantize(bv + factor * (av - bv));
  }
  return out;
}

ImageBuffer apply_lut(const ImageBuffer& img, const Lut& lut) {
  ImageBuffer out(img.width, img.height);
  for (size_t i = 0; i < img.size(); ++i) {
    out.data[i] = lut[i % 3][img.data[i]];
  }
  return out;
}

ImageBuffer apply_lut(const ImageBuffer& img, const ChannelLut& lut) {
  return apply_lut(img, Lut{lut, lut, lut});
}

}  // namespace ra
