#pragma once

#include <cstdint>
#include <vector>

#include "ra/image.hpp"
#include "ra/policy.hpp"

namespace ra {

struct Dataset {
  std::vector<ImageBuffer> images;
  std::vector<int> labels;
  int num_classes = 0;

  size_t size() const { return images.size(); }
  void validate() const;
};

// Linear softmax classifier on flattened pixels scaled to [0, 1].
// Weights are stored column-per-class: w[d * classes + c].
struct TinyClassifier {
  int dim = 0;
  int classes = 0;
  std::vector<double> w;  // dim * classes
  std::vector<double> b;  // classes

  TinyClassifier() = default;
  TinyClassifier(int d, int c)
      : dim(d), classes(c), w(static_cast<size_t>(d) * c, 0.0), b(c, 0.0) {}

  std::vector<double> logits(const std::vector<double>& x) const;
  int predict(const std::vector<double>& x) const;  // argmax, lowest index wins ties
};

std::vector<double> features_of(const ImageBuffer& img);

// Softmax cross-entropy of one example; fills dlogits = p - onehot(y).
double softmax_ce(const std::vector<double>& logits, int label,
                  std::vector<double>* dlogits);

struct WeightGrad {
  std::vector<double> dw;
  std::vector<double> db;
};

// Mean CE and its weight gradient over a feature batch.
double batch_loss_grad(const TinyClassifier& model,
                       const std::vector<std::vector<double>>& feats,
                       const std::vector<int>& labels, WeightGrad* grad);

// dLoss/dfeatures for one example (chain through the linear layer).
std::vector<double> input_grad(const TinyClassifier& model,
                               const std::vector<double>& x, int label,
                               double* loss_out = nullptr);

// Minibatch SGD on cross-entropy; each image is augmented per cfg with
// step = global batch counter. Deterministic given seed.
TinyClassifier train_classifier(const Dataset& train, const RandAugmentConfig& cfg,
                                int epochs, double lr, uint64_t seed,
                                int batch_size = 32);

double evaluate_accuracy(const TinyClassifier& model, const Dataset& data);

}  // namespace ra
