#include "ra/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace ra {

namespace {

const std::array<std::string, kNumTransformKinds> kKindNames = {
    "identity",   "autoContrast", "equalize", "rotate",      "solarize",
    "color",      "posterize",    "contrast", "brightness",  "sharpness",
    "shear-x",    "shear-y",      "translate-x", "translate-y"};

}  // namespace

const std::string& kind_name(TransformKind k) {
  return kKindNames[static_cast<int>(k)];
}

TransformKind kind_from_name(const std::string& name) {
  for (int i = 0; i < kNumTransformKinds; ++i)
    if (kKindNames[i] == name) return static_cast<TransformKind>(i);
  throw ParseError("unknown transform name \"" + name + "\"");
}

bool is_magnitude_dependent(TransformKind k) {
  return k != TransformKind::kIdentity && k != TransformKind::kAutoContrast &&
         k != TransformKind::kEqualize;
}

uint8_t luma(uint8_t r, uint8_t g, uint8_t b) {
  return quantize(0.299 * r + 0.587 * g + 0.114 * b);
}

TransformParam magnitude_to_param(TransformKind kind, Level level, int width,
                                  int height, DeterministicRng& rng,
                                  bool force_positive_sign) {
  const double f = level.value / 10.0;
  auto draw_sign = [&]() { return force_positive_sign ? +1 : rng.sign(); };
  TransformParam p;
  switch (kind) {
    case TransformKind::kIdentity:
    case TransformKind::kAutoContrast:
    case TransformKind::kEqualize:
      p.tag = TransformParam::Tag::kNone;
      break;
    case TransformKind::kRotate:
      p.tag = TransformParam::Tag::kAngle;
      p.angle = draw_sign() * 30.0 * f;
      break;
    case TransformKind::kShearX:
    case TransformKind::kShearY:
      p.tag = TransformParam::Tag::kShear;
      p.shear = draw_sign() * 0.3 * f;
      break;
    case TransformKind::kTranslateX:
      p.tag = TransformParam::Tag::kOffset;
      p.offset = draw_sign() * static_cast<int>(std::lround(0.3 * f * width));
      break;
    case TransformKind::kTranslateY:
      p.tag = TransformParam::Tag::kOffset;
      p.offset = draw_sign() * static_cast<int>(std::lround(0.3 * f * height));
      break;
    case TransformKind::kSolarize:
      p.tag = TransformParam::Tag::kThreshold;
      p.threshold = std::max(0, static_cast<int>(std::lround(256.0 * (1.0 - f))));
      break;
    case TransformKind::kPosterize:
      p.tag = TransformParam::Tag::kBits;
      p.bits = std::clamp(static_cast<int>(std::lround(8.0 - 4.0 * f)), 1, 8);
      break;
    case TransformKind::kColor:
    case TransformKind::kContrast:
    case TransformKind::kBrightness:
    case TransformKind::kSharpness:
      p.tag = TransformParam::Tag::kFactor;
      p.factor = std::max(0.0, 1.0 + draw_sign() * 0.9 * f);
      break;
  }
  return p;
}

ImageBuffer op_affine(const ImageBuffer& img, const AffineInverse& inv, uint8_t fill) {
  ImageBuffer out(img.width, img.height);
  for (int yo = 0; yo < img.height; ++yo) {
    for (int xo = 0; xo < img.width; ++xo) {
      const double X = xo + 0.5, Y = yo + 0.5;
      const double sx = inv.m[0][0] * X + inv.m[0][1] * Y + inv.m[0][2];
      const double sy = inv.m[1][0] * X + inv.m[1][1] * Y + inv.m[1][2];
      const int px = static_cast<int>(std::floor(sx));
      const int py = static_cast<int>(std::floor(sy));
      for (int c = 0; c < 3; ++c) {
        out.at(xo, yo, c) = (px >= 0 && px < img.width && py >= 0 && py < img.height)
                                ? img.at(px, py, c)
                                : fill;
      }
    }
  }
  return out;
}

AffineInverse rotate_inverse(double angle_deg, int width, int height) {
  const double t = angle_deg * std::numbers::pi / 180.0;
  const double c = std::cos(t), s = std::sin(t);
  const double cx = width / 2.0, cy = height / 2.0;
  // inverse of rotation by angle about the image center
  return AffineInverse{{{c, s, cx - c * cx - s * cy},
                        {-s, c, cy + s * cx - c * cy}}};
}

AffineInverse shear_x_inverse(double slope, int width, int height) {
  (void)width;
  const double cy = height / 2.0;
  return AffineInverse{{{1.0, -slope, slope * cy}, {0.0, 1.0, 0.0}}};
}

AffineInverse shear_y_inverse(double slope, int width, int height) {
  (void)height;
  const double cx = width / 2.0;
  return AffineInverse{{{1.0, 0.0, 0.0}, {-slope, 1.0, slope * cx}}};
}

AffineInverse translate_inverse(int dx, int dy) {
  return AffineInverse{{{1.0, 0.0, -static_cast<double>(dx)},
                        {0.0, 1.0, -static_cast<double>(dy)}}};
}

ImageBuffer op_autocontrast(const ImageBuffer& img) {
  Lut lut;
  for (int c = 0; c < 3; ++c) {
    int lo = 255, hi = 0;
    for (size_t i = c; i < img.size(); i += 3) {
      lo = std::min<int>(lo, img.data[i]);
      hi = std::max<int>(hi, img.data[i]);
    }
    if (lo == hi) {
      lut[c] = identity_lut();
      continue;
    }
    for (int i = 0; i < 256; ++i)
      lut[c][i] = quantize(static_cast<double>(i - lo) * 255.0 / (hi - lo));
  }
  return apply_lut(img, lut);
}

ImageBuffer op_equalize(const ImageBuffer& img) {
  Lut lut;
  for (int c = 0; c < 3; ++c) {
    long h[256] = {0};
    for (size_t i = c; i < img.size(); i += 3) ++h[img.data[i]];
    int last = 255;
    while (last > 0 && h[last] == 0) --last;
    long total = 0;
    for (int i = 0; i < 256; ++i) total += h[i];
    const long step = (total - h[last]) / 255;
    if (step == 0) {
      lut[c] = identity_lut();
      continue;
    }
    long prefix = 0;
    for (int i = 0; i < 256; ++i) {
      lut[c][i] = static_cast<uint8_t>(
          std::clamp<long>((prefix + step / 2) / step, 0, 255));
      prefix += h[i];
    }
  }
  return apply_lut(img, lut);
}

ChannelLut solarize_lut(int threshold) {
  ChannelLut l;
  for (int i = 0; i < 256; ++i)
    l[i] = static_cast<uint8_t>(i < threshold ? i : 255 - i);
  return l;
}

ChannelLut posterize_lut(int bits) {
  const uint8_t mask = static_cast<uint8_t>(0xFF << (8 - bits));
  ChannelLut l;
  for (int i = 0; i < 256; ++i) l[i] = static_cast<uint8_t>(i & mask);
  return l;
}

namespace {

ImageBuffer smooth_interior(const ImageBuffer& img) {
  ImageBuffer out = img;  // borders copied
  for (int y = 1; y + 1 < img.height; ++y) {
    for (int x = 1; x + 1 < img.width; ++x) {
      for (int c = 0; c < 3; ++c) {
        double sum = 0.0;
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx)
            sum += (dx == 0 && dy == 0 ? 5.0 : 1.0) * img.at(x + dx, y + dy, c);
        out.at(x, y, c) = quantize(sum / 13.0);
      }
    }
  }
  return out;
}

}  // namespace

ImageBuffer op_enhance(const ImageBuffer& img, TransformKind kind, double factor) {
  if (factor < 0.0) throw NegativeFactor("op_enhance: factor must be >= 0");
  ImageBuffer base(img.width, img.height);
  switch (kind) {
    case TransformKind::kColor:
      for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
          uint8_t l = luma(img.at(x, y, 0), img.at(x, y, 1), img.at(x, y, 2));
          base.at(x, y, 0) = base.at(x, y, 1) = base.at(x, y, 2) = l;
        }
      break;
    case TransformKind::kContrast: {
      double sum = 0.0;
      for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
          sum += luma(img.at(x, y, 0), img.at(x, y, 1), img.at(x, y, 2));
      uint8_t mean = quantize(sum / (static_cast<double>(img.width) * img.height));
      base = ImageBuffer(img.width, img.height, mean);
      break;
    }
    case TransformKind::kBrightness:
      break;  // black
    case TransformKind::kSharpness:
      base = smooth_interior(img);
      break;
    default:
      throw Error("op_enhance: not an enhance kind");
  }
  return blend(img, base, factor);
}

ImageBuffer flip_lr(const ImageBuffer& img) {
  ImageBuffer out(img.width, img.height);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = img.at(img.width - 1 - x, y, c);
  return out;
}

ImageBuffer op_baseline(const ImageBuffer& img, const BaselineOp& op,
                        DeterministicRng& rng) {
  switch (op.which) {
    case BaselineOp::Which::kFlipLR:
      return rng.choice(2) == 1 ? flip_lr(img) : img;
    case BaselineOp::Which::kPadCrop: {
      const int pad = op.amount;
      if (pad < 0) throw SizeOutOfRange("padCrop: pad must be >= 0");
      if (pad == 0) return img;
      const int ox = static_cast<int>(rng.choice(2 * pad + 1));
      const int oy = static_cast<int>(rng.choice(2 * pad + 1));
      ImageBuffer out(img.width, img.height);
      for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
          const int sx = x + ox - pad, sy = y + oy - pad;
          for (int c = 0; c < 3; ++c)
            out.at(x, y, c) = (sx >= 0 && sx < img.width && sy >= 0 && sy < img.height)
                                  ? img.at(sx, sy, c)
                                  : 0;
        }
      return out;
    }
    case BaselineOp::Which::kCutout: {
      const int size = op.amount;
      if (size < 0 || size > std::min(img.width, img.height))
        throw SizeOutOfRange("cutout: size out of range");
      if (size == 0) return img;
      const int cx = static_cast<int>(rng.choice(img.width));
      const int cy = static_cast<int>(rng.choice(img.height));
      ImageBuffer out = img;
      const int x0 = std::max(0, cx - size / 2), y0 = std::max(0, cy - size / 2);
      const int x1 = std::min(img.width, x0 + size), y1 = std::min(img.height, y0 + size);
      for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x)
          for (int c = 0; c < 3; ++c) out.at(x, y, c) = 128;
      return out;
    }
  }
  throw Error("op_baseline: unreachable");
}

ImageBuffer apply_transform(const ImageBuffer& img, TransformKind kind, Level level,
                            DeterministicRng& rng, bool force_positive_sign) {
  const TransformParam p =
      magnitude_to_param(kind, level, img.width, img.height, rng, force_positive_sign);
  switch (kind) {
    case TransformKind::kIdentity:
      return img;
    case TransformKind::kAutoContrast:
      return op_autocontrast(img);
    case TransformKind::kEqualize:
      return op_equalize(img);
    case TransformKind::kRotate:
      return op_affine(img, rotate_inverse(p.angle, img.width, img.height));
    case TransformKind::kShearX:
      return op_affine(img, shear_x_inverse(p.shear, img.width, img.height));
    case TransformKind::kShearY:
      return op_affine(img, shear_y_inverse(p.shear, img.width, img.height));
    case TransformKind::kTranslateX:
      return op_affine(img, translate_inverse(p.offset, 0));
    case TransformKind::kTranslateY:
      return op_affine(img, translate_inverse(0, p.offset));
    case TransformKind::kSolarize:
      return apply_lut(img, solarize_lut(p.threshold));
    case TransformKind::kPosterize:
      return apply_lut(img, posterize_lut(p.bits));
    case TransformKind::kColor:
    case TransformKind::kContrast:
    case TransformKind::kBrightness:
    case TransformKind::kSharpness:
      return op_enhance(img, kind, p.factor);
  }
  throw Error("apply_transform: unreachable");
}

}  // namespace ra
