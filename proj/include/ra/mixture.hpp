#pragma once

#include <memory>
#include <vector>

#include "ra/classifier.hpp"
#include "ra/transforms.hpp"

namespace ra {

// Dequantized raster: doubles in [0, 1], same row-major H x W x 3 layout as
// ImageBuffer. Used on the differentiable mixture path only.
struct RealImage {
  int width = 0;
  int height = 0;
  std::vector<double> v;

  RealImage() = default;
  RealImage(int w, int h) : width(w), height(h), v(static_cast<size_t>(w) * h * 3, 0.0) {}
  static RealImage from_buffer(const ImageBuffer& img);
  size_t size() const { return v.size(); }
};

// K x N selection logits; slot probabilities are softmax over the K kinds.
struct AlphaMatrix {
  int k = kNumTransformKinds;
  int n = 2;
  std::vector<double> logits;  // logits[i * n + j]

  AlphaMatrix() : logits(static_cast<size_t>(k) * n, 0.0) {}
  AlphaMatrix(int k_, int n_) : k(k_), n(n_), logits(static_cast<size_t>(k_) * n_, 0.0) {}

  double& at(int i, int j) { return logits[static_cast<size_t>(i) * n + j]; }
  double at(int i, int j) const { return logits[static_cast<size_t>(i) * n + j]; }
  std::vector<double> slot_probs(int j) const;
};

using AlphaGrad = std::vector<double>;  // same k*n layout as AlphaMatrix::logits

// Transform registry for the relaxed path. apply() is deterministic (all
// direction signs fixed to +) and works in real arithmetic; vjp() is the
// transpose-Jacobian action at x, defined almost everywhere.
class RealTransformSet {
 public:
  virtual ~RealTransformSet() = default;
  virtual int size() const = 0;
  virtual RealImage apply(int i, const RealImage& x, double level) const = 0;
  virtual std::vector<double> vjp(int i, const RealImage& x, double level,
                                  const std::vector<double>& grad_out) const = 0;
};

// The 14-kind registry lifted to real pixels.
const RealTransformSet& standard_real_transforms();

// Test registry: every slot entry is the identity.
class IdentityTransformSet : public RealTransformSet {
 public:
  explicit IdentityTransformSet(int k) : k_(k) {}
  int size() const override { return k_; }
  RealImage apply(int, const RealImage& x, double) const override { return x; }
  std::vector<double> vjp(int, const RealImage&, double,
                          const std::vector<double>& g) const override {
    return g;
  }

 private:
  int k_;
};

RealImage real_transform(const RealImage& x, TransformKind kind, double level);
std::vector<double> real_transform_vjp(const RealImage& x, TransformKind kind,
                                       double level,
                                       const std::vector<double>& grad_out);

// Relaxed policy application: x_j = sum_i softmax(alpha_.j)_i T_i(x_{j-1}).
RealImage mixture_forward(const ImageBuffer& img, const AlphaMatrix& alpha, double m,
                          const RealTransformSet& set = standard_real_transforms());

// Gradient of mean cross-entropy of `model` on mixture-distorted images with
// respect to the alpha logits, with the loss optionally reported.
AlphaGrad first_order_alpha_grad(const AlphaMatrix& alpha, const TinyClassifier& model,
                                 const Dataset& batch, double m,
                                 const RealTransformSet& set = standard_real_transforms(),
                                 double* mean_loss = nullptr);

}  // namespace ra
