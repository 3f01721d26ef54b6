#include "ra/mixture.hpp"

#include <algorithm>
#include <cmath>

namespace ra {

RealImage RealImage::from_buffer(const ImageBuffer& img) {
  RealImage x(img.width, img.height);
  for (size_t i = 0; i < img.size(); ++i) x.v[i] = img.data[i] / 255.0;
  return x;
}

std::vector<double> AlphaMatrix::slot_probs(int j) const {
  std::vector<double> p(k);
  double zmax = -1e300;
  for (int i = 0; i < k; ++i) zmax = std::max(zmax, at(i, j));
  double sum = 0.0;
  for (int i = 0; i < k; ++i) {
    p[i] = std::exp(at(i, j) - zmax);
    sum += p[i];
  }
  for (auto& v : p) v /= sum;
  return p;
}

namespace {

constexpr double kFill = 128.0 / 255.0;

TransformParam fixed_sign_param(TransformKind kind, double level, int w, int h) {
  DeterministicRng dummy(0);
  return magnitude_to_param(kind, Level(level), w, h, dummy, /*force_positive_sign=*/true);
}

// Per-pixel source index (-1 = fill) under the inverse affine map.
std::vector<int> affine_source_map(const AffineInverse& inv, int w, int h) {
  std::vector<int> src(static_cast<size_t>(w) * h, -1);
  for (int yo = 0; yo < h; ++yo)
    for (int xo = 0; xo < w; ++xo) {
      const double X = xo + 0.5, Y = yo + 0.5;
      const int px = static_cast<int>(std::floor(inv.m[0][0] * X + inv.m[0][1] * Y + inv.m[0][2]));
      const int py = static_cast<int>(std::floor(inv.m[1][0] * X + inv.m[1][1] * Y + inv.m[1][2]));
      if (px >= 0 && px < w && py >= 0 && py < h)
        src[static_cast<size_t>(yo) * w + xo] = py * w + px;
    }
  return src;
}

AffineInverse inverse_for(TransformKind kind, const TransformParam& p, int w, int h) {
  switch (kind) {
    case TransformKind::kRotate:
      return rotate_inverse(p.angle, w, h);
    case TransformKind::kShearX:
      return shear_x_inverse(p.shear, w, h);
    case TransformKind::kShearY:
      return shear_y_inverse(p.shear, w, h);
    case TransformKind::kTranslateX:
      return translate_inverse(p.offset, 0);
    case TransformKind::kTranslateY:
      return translate_inverse(0, p.offset);
    default:
      throw Error("inverse_for: not a geometric kind");
  }
}

struct ChannelStats {
  double lo, hi;
  size_t lo_idx, hi_idx;
};

ChannelStats channel_stats(const RealImage& x, int c) {
  ChannelStats s{1e300, -1e300, 0, 0};
  for (size_t i = c; i < x.size(); i += 3) {
    if (x.v[i] < s.lo) {
      s.lo = x.v[i];
      s.lo_idx = i;
    }
    if (x.v[i] > s.hi) {
      s.hi = x.v[i];
      s.hi_idx = i;
    }
  }
  return s;
}

constexpr double kLumaW[3] = {0.299, 0.587, 0.114};

// base = smoothed interior / copied border; linear in x.
RealImage smooth_real(const RealImage& x) {
  RealImage out = x;
  for (int y = 1; y + 1 < x.height; ++y)
    for (int xx = 1; xx + 1 < x.width; ++xx)
      for (int c = 0; c < 3; ++c) {
        double sum = 0.0;
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx)
            sum += (dx == 0 && dy == 0 ? 5.0 : 1.0) *
                   x.v[(static_cast<size_t>(y + dy) * x.width + (xx + dx)) * 3 + c];
        out.v[(static_cast<size_t>(y) * x.width + xx) * 3 + c] = sum / 13.0;
      }
  return out;
}

std::vector<double> smooth_real_transpose(const RealImage& shape,
                                          const std::vector<double>& g) {
  std::vector<double> out(g.size(), 0.0);
  const int w = shape.width, h = shape.height;
  auto idx = [w](int x, int y, int c) {
    return (static_cast<size_t>(y) * w + x) * 3 + c;
  };
  // border rows/cols pass through
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const bool interior = x > 0 && x + 1 < w && y > 0 && y + 1 < h;
      for (int c = 0; c < 3; ++c) {
        if (!interior) {
          out[idx(x, y, c)] += g[idx(x, y, c)];
        } else {
          const double gv = g[idx(x, y, c)] / 13.0;
          for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx)
              out[idx(x + dx, y + dy, c)] += (dx == 0 && dy == 0 ? 5.0 : 1.0) * gv;
        }
      }
    }
  return out;
}

}  // namespace

RealImage real_transform(const RealImage& x, TransformKind kind, double level) {
  const auto p = fixed_sign_param(kind, level, x.width, x.height);
  RealImage out = x;
  switch (kind) {
    case TransformKind::kIdentity:
      return out;
    case TransformKind::kAutoContrast: {
      for (int c = 0; c < 3; ++c) {
        const auto s = channel_stats(x, c);
        if (s.hi - s.lo < 1e-12) continue;
        const double inv = 1.0 / (s.hi - s.lo);
        for (size_t i = c; i < x.size(); i += 3) out.v[i] = (x.v[i] - s.lo) * inv;
      }
      return out;
    }
    case TransformKind::kEqualize: {
      for (int c = 0; c < 3; ++c) {
        long hist[256] = {0};
        for (size_t i = c; i < x.size(); i += 3) {
          int b = std::clamp<int>(static_cast<int>(std::lround(x.v[i] * 255.0)), 0, 255);
          ++hist[b];
        }
        int last = 255;
        while (last > 0 && hist[last] == 0) --last;
        long total = 0;
        for (long hb : hist) total += hb;
        const long step = (total - hist[last]) / 255;
        if (step == 0) continue;
        double lut[256];
        long prefix = 0;
        for (int i = 0; i < 256; ++i) {
          lut[i] = static_cast<double>(std::clamp<long>((prefix + step / 2) / step, 0, 255)) / 255.0;
          prefix += hist[i];
        }
        for (size_t i = c; i < x.size(); i += 3) {
          int b = std::clamp<int>(static_cast<int>(std::lround(x.v[i] * 255.0)), 0, 255);
          out.v[i] = lut[b];
        }
      }
      return out;
    }
    case TransformKind::kRotate:
    case TransformKind::kShearX:
    case TransformKind::kShearY:
    case TransformKind::kTranslateX:
    case TransformKind::kTranslateY: {
      const auto src = affine_source_map(inverse_for(kind, p, x.width, x.height),
                                         x.width, x.height);
      for (size_t pix = 0; pix < src.size(); ++pix)
        for (int c = 0; c < 3; ++c)
          out.v[pix * 3 + c] = src[pix] < 0 ? kFill : x.v[static_cast<size_t>(src[pix]) * 3 + c];
      return out;
    }
    case TransformKind::kSolarize: {
      for (size_t i = 0; i < x.size(); ++i)
        out.v[i] = x.v[i] * 255.0 < p.threshold ? x.v[i] : 1.0 - x.v[i];
      return out;
    }
    case TransformKind::kPosterize: {
      const double q = static_cast<double>(1 << (8 - p.bits));
      for (size_t i = 0; i < x.size(); ++i) {
        const double s = std::clamp(x.v[i], 0.0, 1.0) * 255.0;
        out.v[i] = std::floor(s / q) * q / 255.0;
      }
      return out;
    }
    case TransformKind::kColor: {
      const double f = p.factor;
      for (size_t pix = 0; pix < x.size() / 3; ++pix) {
        double l = 0.0;
        for (int c = 0; c < 3; ++c) l += kLumaW[c] * x.v[pix * 3 + c];
        for (int c = 0; c < 3; ++c) out.v[pix * 3 + c] = l + f * (x.v[pix * 3 + c] - l);
      }
      return out;
    }
    case TransformKind::kContrast: {
      const double f = p.factor;
      double mean = 0.0;
      for (size_t pix = 0; pix < x.size() / 3; ++pix)
        for (int c = 0; c < 3; ++c) mean += kLumaW[c] * x.v[pix * 3 + c];
      mean /= static_cast<double>(x.size() / 3);
      for (size_t i = 0; i < x.size(); ++i) out.v[i] = mean + f * (x.v[i] - mean);
      return out;
    }
    case TransformKind::kBrightness: {
      for (size_t i = 0; i < x.size(); ++i) out.v[i] = p.factor * x.v[i];
      return out;
    }
    case TransformKind::kSharpness: {
      const RealImage base = smooth_real(x);
      for (size_t i = 0; i < x.size(); ++i)
        out.v[i] = base.v[i] + p.factor * (x.v[i] - base.v[i]);
      return out;
    }
  }
  throw Error("real_transform: unreachable");
}

std::vector<double> real_transform_vjp(const RealImage& x, TransformKind kind,
                                       double level,
                                       const std::vector<double>& g) {
  if (g.size() != x.size()) throw DimensionMismatch("real_transform_vjp: grad shape");
  const auto p = fixed_sign_param(kind, level, x.width, x.height);
  std::vector<double> gin(x.size(), 0.0);
  switch (kind) {
    case TransformKind::kIdentity:
      return g;
    case TransformKind::kAutoContrast: {
      for (int c = 0; c < 3; ++c) {
        const auto s = channel_stats(x, c);
        if (s.hi - s.lo < 1e-12) {
          for (size_t i = c; i < x.size(); i += 3) gin[i] += g[i];
          continue;
        }
        const double inv = 1.0 / (s.hi - s.lo);
        double dm = 0.0, dX = 0.0;
        for (size_t i = c; i < x.size(); i += 3) {
          gin[i] += g[i] * inv;
          // d out_i / d lo = (x_i - hi) * inv^2 ; d out_i / d hi = -(x_i - lo) * inv^2
          dm += g[i] * (x.v[i] - s.hi) * inv * inv;
          dX += g[i] * (s.lo - x.v[i]) * inv * inv;
        }
        gin[s.lo_idx] += dm;
        gin[s.hi_idx] += dX;
      }
      return gin;
    }
    case TransformKind::kPosterize:
      return gin;  // piecewise constant: zero a.e.
    case TransformKind::kEqualize: {
      // zero a.e. where the LUT is active, but the degenerate-histogram
      // channels (step == 0) pass through unchanged
      for (int c = 0; c < 3; ++c) {
        long hist[256] = {0};
        for (size_t i = c; i < x.size(); i += 3) {
          int b = std::clamp<int>(static_cast<int>(std::lround(x.v[i] * 255.0)), 0, 255);
          ++hist[b];
        }
        int last = 255;
        while (last > 0 && hist[last] == 0) --last;
        long total = 0;
        for (long hb : hist) total += hb;
        if ((total - hist[last]) / 255 != 0) continue;
        for (size_t i = c; i < x.size(); i += 3) gin[i] = g[i];
      }
      return gin;
    }
    case TransformKind::kRotate:
    case TransformKind::kShearX:
    case TransformKind::kShearY:
    case TransformKind::kTranslateX:
    case TransformKind::kTranslateY: {
      const auto src = affine_source_map(inverse_for(kind, p, x.width, x.height),
                                         x.width, x.height);
      for (size_t pix = 0; pix < src.size(); ++pix)
        if (src[pix] >= 0)
          for (int c = 0; c < 3; ++c)
            gin[static_cast<size_t>(src[pix]) * 3 + c] += g[pix * 3 + c];
      return gin;
    }
    case TransformKind::kSolarize: {
      for (size_t i = 0; i < x.size(); ++i)
        gin[i] = x.v[i] * 255.0 < p.threshold ? g[i] : -g[i];
      return gin;
    }
    case TransformKind::kColor: {
      const double f = p.factor;
      for (size_t pix = 0; pix < x.size() / 3; ++pix) {
        double gsum = 0.0;
        for (int c = 0; c < 3; ++c) gsum += g[pix * 3 + c];
        for (int c = 0; c < 3; ++c)
          gin[pix * 3 + c] = f * g[pix * 3 + c] + (1.0 - f) * kLumaW[c] * gsum;
      }
      return gin;
    }
    case TransformKind::kContrast: {
      const double f = p.factor;
      const double npix = static_cast<double>(x.size() / 3);
      double gsum = 0.0;
      for (double gv : g) gsum += gv;
      for (size_t pix = 0; pix < x.size() / 3; ++pix)
        for (int c = 0; c < 3; ++c)
          gin[pix * 3 + c] = f * g[pix * 3 + c] + (1.0 - f) * kLumaW[c] / npix * gsum;
      return gin;
    }
    case TransformKind::kBrightness: {
      for (size_t i = 0; i < x.size(); ++i) gin[i] = p.factor * g[i];
      return gin;
    }
    case TransformKind::kSharpness: {
      // out = f*x + (1-f)*S x  =>  J^T g = f*g + (1-f)*S^T g
      const auto st = smooth_real_transpose(x, g);
      for (size_t i = 0; i < x.size(); ++i)
        gin[i] = p.factor * g[i] + (1.0 - p.factor) * st[i];
      return gin;
    }
  }
  throw Error("real_transform_vjp: unreachable");
}

namespace {

class StandardRealTransforms : public RealTransformSet {
 public:
  int size() const override { return kNumTransformKinds; }
  RealImage apply(int i, const RealImage& x, double level) const override {
    return real_transform(x, static_cast<TransformKind>(i), level);
  }
  std::vector<double> vjp(int i, const RealImage& x, double level,
                          const std::vector<double>& g) const override {
    return real_transform_vjp(x, static_cast<TransformKind>(i), level, g);
  }
};

}  // namespace

const RealTransformSet& standard_real_transforms() {
  static StandardRealTransforms set;
  return set;
}

RealImage mixture_forward(const ImageBuffer& img, const AlphaMatrix& alpha, double m,
                          const RealTransformSet& set) {
  if (alpha.k != set.size()) throw DimensionMismatch("mixture_forward: K mismatch");
  RealImage x = RealImage::from_buffer(img);
  for (int j = 0; j < alpha.n; ++j) {
    const auto p = alpha.slot_probs(j);
    RealImage next(x.width, x.height);
    for (int i = 0; i < alpha.k; ++i) {
      if (p[i] == 0.0) continue;
      const RealImage ti = set.apply(i, x, m);
      for (size_t s = 0; s < next.size(); ++s) next.v[s] += p[i] * ti.v[s];
    }
    x = std::move(next);
  }
  return x;
}

AlphaGrad first_order_alpha_grad(const AlphaMatrix& alpha, const TinyClassifier& model,
                                 const Dataset& batch, double m,
                                 const RealTransformSet& set, double* mean_loss) {
  if (batch.size() == 0) throw InvalidRange("first_order_alpha_grad: empty batch");
  if (alpha.k != set.size()) throw DimensionMismatch("first_order_alpha_grad: K mismatch");
  AlphaGrad grad(alpha.logits.size(), 0.0);
  double loss_sum = 0.0;

  for (size_t idx = 0; idx < batch.size(); ++idx) {
    // forward, keeping per-slot inputs and per-kind outputs
    std::vector<RealImage> xs;  // xs[j] = input to slot j; xs[n] = output
    std::vector<std::vector<RealImage>> touts(alpha.n);
    std::vector<std::vector<double>> probs(alpha.n);
    xs.push_back(RealImage::from_buffer(batch.images[idx]));
    for (int j = 0; j < alpha.n; ++j) {
      probs[j] = alpha.slot_probs(j);
      touts[j].reserve(alpha.k);
      RealImage next(xs[j].width, xs[j].height);
      for (int i = 0; i < alpha.k; ++i) {
        touts[j].push_back(set.apply(i, xs[j], m));
        for (size_t s = 0; s < next.size(); ++s)
          next.v[s] += probs[j][i] * touts[j][i].v[s];
      }
      xs.push_back(std::move(next));
    }

    double loss = 0.0;
    std::vector<double> gx = input_grad(model, xs[alpha.n].v, batch.labels[idx], &loss);
    loss_sum += loss;

    for (int j = alpha.n - 1; j >= 0; --j) {
      // dL/dp_ij = <gx, T_i(x_j)>, then the softmax Jacobian
      std::vector<double> dp(alpha.k, 0.0);
      for (int i = 0; i < alpha.k; ++i) {
        double dot = 0.0;
        for (size_t s = 0; s < gx.size(); ++s) dot += gx[s] * touts[j][i].v[s];
        dp[i] = dot;
      }
      double mean_dp = 0.0;
      for (int i = 0; i < alpha.k; ++i) mean_dp += probs[j][i] * dp[i];
      for (int i = 0; i < alpha.k; ++i)
        grad[static_cast<size_t>(i) * alpha.n + j] += probs[j][i] * (dp[i] - mean_dp);
      if (j > 0) {
        // pull gx back through the mixed transforms of this slot
        std::vector<double> gprev(gx.size(), 0.0);
        for (int i = 0; i < alpha.k; ++i) {
          if (probs[j][i] == 0.0) continue;
          const auto gi = set.vjp(i, xs[j], m, gx);
          for (size_t s = 0; s < gprev.size(); ++s) gprev[s] += probs[j][i] * gi[s];
        }
        gx = std::move(gprev);
      }
    }
  }

  const double inv = 1.0 / static_cast<double>(batch.size());
  for (auto& v : grad) v *= inv;
  if (mean_loss) *mean_loss = loss_sum * inv;
  return grad;
}

}  // namespace ra
