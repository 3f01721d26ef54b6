#pragma once

#include <array>
#include <optional>
#include <string>

#include "ra/image.hpp"
#include "ra/pixel_ops.hpp"
#include "ra/rng.hpp"

namespace ra {

// The 14-kind registry. Enum order is the canonical registry order.
enum class TransformKind : int {
  kIdentity = 0,
  kAutoContrast,
  kEqualize,
  kRotate,
  kSolarize,
  kColor,
  kPosterize,
  kContrast,
  kBrightness,
  kSharpness,
  kShearX,
  kShearY,
  kTranslateX,
  kTranslateY,
};

inline constexpr int kNumTransformKinds = 14;

constexpr std::array<TransformKind, kNumTransformKinds> all_transform_kinds() {
  std::array<TransformKind, kNumTransformKinds> a{};
  for (int i = 0; i < kNumTransformKinds; ++i) a[i] = static_cast<TransformKind>(i);
  return a;
}

// Canonical serialized names ("shear-x" style for the geometric pairs).
const std::string& kind_name(TransformKind k);
TransformKind kind_from_name(const std::string& name);  // throws ParseError

// autoContrast, equalize and identity ignore the level entirely.
bool is_magnitude_dependent(TransformKind k);

// Magnitude level on the canonical 0..10 scale, extended to [0, 30].
struct Level {
  double value = 0.0;
  Level() = default;
  explicit Level(double v) : value(v) {
    if (!(v >= 0.0 && v <= 30.0)) throw LevelOutOfRange("level must be in [0, 30]");
  }
  bool operator==(const Level&) const = default;
};

// Concrete per-transform parameter produced from a level.
struct TransformParam {
  enum class Tag { kNone, kAngle, kShear, kOffset, kThreshold, kBits, kFactor };
  Tag tag = Tag::kNone;
  double angle = 0.0;    // degrees
  double shear = 0.0;    // unitless slope
  int offset = 0;        // signed pixels
  int threshold = 256;   // 0..256
  int bits = 8;          // 1..8
  double factor = 1.0;   // >= 0
};

// Linear level -> parameter mapping (f = level/10, extrapolated past 1 and
// clamped to validity). Signed kinds draw their direction from rng;
// force_positive_sign pins the direction to + without consuming a draw.
TransformParam magnitude_to_param(TransformKind kind, Level level, int width,
                                  int height, DeterministicRng& rng,
                                  bool force_positive_sign = false);

ImageBuffer apply_transform(const ImageBuffer& img, TransformKind kind, Level level,
                            DeterministicRng& rng, bool force_positive_sign = false);

// Inverse-mapped nearest-neighbor resample; out-of-bounds sources take
// gray 128. Row 0 is (a, b, c) in x = a*xo + b*yo + c for output pixel
// centers (xo+0.5, yo+0.5).
struct AffineInverse {
  double m[2][3];
};
ImageBuffer op_affine(const ImageBuffer& img, const AffineInverse& inv,
                      uint8_t fill = 128);

AffineInverse rotate_inverse(double angle_deg, int width, int height);
AffineInverse shear_x_inverse(double slope, int width, int height);
AffineInverse shear_y_inverse(double slope, int width, int height);
AffineInverse translate_inverse(int dx, int dy);

ImageBuffer op_autocontrast(const ImageBuffer& img);
ImageBuffer op_equalize(const ImageBuffer& img);

// base per kind: color -> per-pixel luma, contrast -> mean luma constant,
// brightness -> black, sharpness -> 3x3 smoothing on the interior.
ImageBuffer op_enhance(const ImageBuffer& img, TransformKind kind, double factor);

ChannelLut solarize_lut(int threshold);
ChannelLut posterize_lut(int bits);

// Baseline augmentations used alongside the policy: horizontal flip (with
// probability 1/2), zero-pad then random crop, and cutout with gray fill.
struct BaselineOp {
  enum class Which { kFlipLR, kPadCrop, kCutout };
  Which which = Which::kFlipLR;
  int amount = 0;  // pad pixels or cutout size
  bool operator==(const BaselineOp&) const = default;
};
ImageBuffer op_baseline(const ImageBuffer& img, const BaselineOp& op,
                        DeterministicRng& rng);

ImageBuffer flip_lr(const ImageBuffer& img);

// Rounded luma: round(0.299 R + 0.587 G + 0.114 B).
uint8_t luma(uint8_t r, uint8_t g, uint8_t b);

}  // namespace ra
