#include "ra/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace ra {
namespace oracle {

namespace {

int round_away(double v) {
  return static_cast<int>(v >= 0.0 ? std::floor(v + 0.5) : std::ceil(v - 0.5));
}

uint8_t clamp8(int v) { return static_cast<uint8_t>(std::min(255, std::max(0, v))); }

uint8_t blend_sample(double a, double b, double factor) {
  return clamp8(round_away(b + factor * (a - b)));
}

int sign_draw(DeterministicRng& rng) { return rng.choice(2) == 0 ? +1 : -1; }

ImageBuffer geometric(const ImageBuffer& img, double inv[2][3]) {
  ImageBuffer out(img.width, img.height);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      const double X = x + 0.5, Y = y + 0.5;
      const double sx = inv[0][0] * X + inv[0][1] * Y + inv[0][2];
      const double sy = inv[1][0] * X + inv[1][1] * Y + inv[1][2];
      const int px = static_cast<int>(std::floor(sx));
      const int py = static_cast<int>(std::floor(sy));
      const bool inside = px >= 0 && px < img.width && py >= 0 && py < img.height;
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = inside ? img.at(px, py, c) : 128;
    }
  return out;
}

int oracle_luma(uint8_t r, uint8_t g, uint8_t b) {
  return round_away(0.299 * r + 0.587 * g + 0.114 * b);
}

}  // namespace

ImageBuffer apply(const ImageBuffer& img, TransformKind kind, Level level,
                  DeterministicRng& rng) {
  const double f = level.value / 10.0;
  const int w = img.width, h = img.height;
  const double cx = w / 2.0, cy = h / 2.0;
  switch (kind) {
    case TransformKind::kIdentity:
      return img;
    case TransformKind::kAutoContrast: {
      ImageBuffer out(w, h);
      for (int c = 0; c < 3; ++c) {
        int lo = 255, hi = 0;
        for (int y = 0; y < h; ++y)
          for (int x = 0; x < w; ++x) {
            lo = std::min<int>(lo, img.at(x, y, c));
            hi = std::max<int>(hi, img.at(x, y, c));
          }
        for (int y = 0; y < h; ++y)
          for (int x = 0; x < w; ++x)
            out.at(x, y, c) =
                lo == hi ? img.at(x, y, c)
                         : clamp8(round_away((img.at(x, y, c) - lo) * 255.0 / (hi - lo)));
      }
      return out;
    }
    case TransformKind::kEqualize: {
      ImageBuffer out(w, h);
      for (int c = 0; c < 3; ++c) {
        long hist[256] = {0};
        for (int y = 0; y < h; ++y)
          for (int x = 0; x < w; ++x) ++hist[img.at(x, y, c)];
        int last = 255;
        while (last > 0 && hist[last] == 0) --last;
        long total = static_cast<long>(w) * h;
        long step = (total - hist[last]) / 255;
        for (int y = 0; y < h; ++y)
          for (int x = 0; x < w; ++x) {
            const int v = img.at(x, y, c);
            if (step == 0) {
              out.at(x, y, c) = static_cast<uint8_t>(v);
            } else {
              long prefix = 0;
              for (int j = 0; j < v; ++j) prefix += hist[j];
              long mapped = (prefix + step / 2) / step;
              out.at(x, y, c) = static_cast<uint8_t>(std::min(255L, std::max(0L, mapped)));
            }
          }
      }
      return out;
    }
    case TransformKind::kRotate: {
      const double angle = sign_draw(rng) * 30.0 * f;
      const double t = angle * std::numbers::pi / 180.0;
      const double co = std::cos(t), si = std::sin(t);
      double inv[2][3] = {{co, si, cx - co * cx - si * cy},
                          {-si, co, cy + si * cx - co * cy}};
      return geometric(img, inv);
    }
    case TransformKind::kShearX: {
      const double slope = sign_draw(rng) * 0.3 * f;
      double inv[2][3] = {{1.0, -slope, slope * cy}, {0.0, 1.0, 0.0}};
      return geometric(img, inv);
    }
    case TransformKind::kShearY: {
      const double slope = sign_draw(rng) * 0.3 * f;
      double inv[2][3] = {{1.0, 0.0, 0.0}, {-slope, 1.0, slope * cx}};
      return geometric(img, inv);
    }
    case TransformKind::kTranslateX: {
      const int off = sign_draw(rng) * round_away(0.3 * f * w);
      double inv[2][3] = {{1.0, 0.0, -static_cast<double>(off)}, {0.0, 1.0, 0.0}};
      return geometric(img, inv);
    }
    case TransformKind::kTranslateY: {
      const int off = sign_draw(rng) * round_away(0.3 * f * h);
      double inv[2][3] = {{1.0, 0.0, 0.0}, {0.0, 1.0, -static_cast<double>(off)}};
      return geometric(img, inv);
    }
    case TransformKind::kSolarize: {
      const int thr = std::max(0, round_away(256.0 * (1.0 - f)));
      ImageBuffer out(w, h);
      for (size_t i = 0; i < img.size(); ++i) {
        const int v = img.data[i];
        out.data[i] = static_cast<uint8_t>(v < thr ? v : 255 - v);
      }
      return out;
    }
    case TransformKind::kPosterize: {
      const int bits = std::min(8, std::max(1, round_away(8.0 - 4.0 * f)));
      ImageBuffer out(w, h);
      for (size_t i = 0; i < img.size(); ++i)
        out.data[i] = static_cast<uint8_t>((img.data[i] >> (8 - bits)) << (8 - bits));
      return out;
    }
    case TransformKind::kColor: {
      const double factor = std::max(0.0, 1.0 + sign_draw(rng) * 0.9 * f);
      ImageBuffer out(w, h);
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
          const int l = oracle_luma(img.at(x, y, 0), img.at(x, y, 1), img.at(x, y, 2));
          for (int c = 0; c < 3; ++c)
            out.at(x, y, c) = blend_sample(img.at(x, y, c), l, factor);
        }
      return out;
    }
    case TransformKind::kContrast: {
      const double factor = std::max(0.0, 1.0 + sign_draw(rng) * 0.9 * f);
      double sum = 0.0;
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
          sum += oracle_luma(img.at(x, y, 0), img.at(x, y, 1), img.at(x, y, 2));
      const int mean = clamp8(round_away(sum / (static_cast<double>(w) * h)));
      ImageBuffer out(w, h);
      for (size_t i = 0; i < img.size(); ++i)
        out.data[i] = blend_sample(img.data[i], mean, factor);
      return out;
    }
    case TransformKind::kBrightness: {
      const double factor = std::max(0.0, 1.0 + sign_draw(rng) * 0.9 * f);
      ImageBuffer out(w, h);
      for (size_t i = 0; i < img.size(); ++i)
        out.data[i] = blend_sample(img.data[i], 0.0, factor);
      return out;
    }
    case TransformKind::kSharpness: {
      const double factor = std::max(0.0, 1.0 + sign_draw(rng) * 0.9 * f);
      ImageBuffer base = img;
      for (int y = 1; y + 1 < h; ++y)
        for (int x = 1; x + 1 < w; ++x)
          for (int c = 0; c < 3; ++c) {
            double acc = 0.0;
            for (int dy = -1; dy <= 1; ++dy)
              for (int dx = -1; dx <= 1; ++dx)
                acc += (dx == 0 && dy == 0 ? 5.0 : 1.0) * img.at(x + dx, y + dy, c);
            base.at(x, y, c) = clamp8(round_away(acc / 13.0));
          }
      ImageBuffer out(w, h);
      for (size_t i = 0; i < img.size(); ++i)
        out.data[i] = blend_sample(img.data[i], base.data[i], factor);
      return out;
    }
  }
  throw Error("oracle::apply: unreachable");
}

ImageBuffer augment(const ImageBuffer& img, const RandAugmentConfig& cfg, long step,
                    long total_steps, uint64_t image_index) {
  cfg.validate();
  DeterministicRng rng =
      DeterministicRng(cfg.seed).split(static_cast<uint64_t>(step), image_index);
  ImageBuffer out = img;
  for (const auto& op : cfg.baseline) out = op_baseline(out, op, rng);
  const double level = schedule_value(cfg.schedule, step, total_steps, rng);
  std::vector<TransformKind> kinds(cfg.subset.begin(), cfg.subset.end());
  std::vector<std::pair<TransformKind, double>> ops;
  for (int i = 0; i < cfg.n; ++i) {
    TransformKind k = kinds[rng.choice(kinds.size())];
    double lv = level;
    if (auto it = cfg.level_overrides.find(k); it != cfg.level_overrides.end())
      lv = it->second;
    ops.emplace_back(k, lv);
  }
  for (const auto& [k, lv] : ops) out = apply(out, k, Level(lv), rng);
  if (cfg.cutout_after && *cfg.cutout_after > 0)
    out = op_baseline(out, {BaselineOp::Which::kCutout, *cfg.cutout_after}, rng);
  return out;
}

ImageBuffer seed_image_8x8() {
  ImageBuffer img(8, 8);
  DeterministicRng rng(12345);
  for (auto& b : img.data) b = static_cast<uint8_t>(rng.next_u64() & 0xFF);
  return img;
}

}  // namespace oracle
}  // namespace ra
