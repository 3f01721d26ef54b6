#pragma once

#include <string>

#include "ra/classifier.hpp"
#include "ra/search.hpp"

namespace ra {

struct SyntheticShapesParams {
  int count = 200;
  int image_size = 16;
  int classes = 2;  // 2..4 of: square, disk, cross, triangle
  double noise_std = 0.1;  // in [0,1] units; scaled by 255 before clamping
  uint64_t seed = 0;

  void validate() const;
};

// Balanced shape classification set: gray-128 background, one white shape
// at a uniform random fully-contained position, plus clamped Gaussian noise.
Dataset gen_synthetic_shapes(const SyntheticShapesParams& p);

// CIFAR-10 binary format: 3073-byte records, 1 label byte then the three
// 1024-byte row-major color planes.
Dataset read_cifar10_file(const std::string& path);
// Concatenates every data_batch_*.bin in the directory (sorted by name).
Dataset read_cifar10_bin(const std::string& dir);

// Default desk-scale Evaluator: trains a TinyClassifier on the train split
// with the candidate policy and reports validation accuracy.
class ClassifierEvaluator : public Evaluator {
 public:
  ClassifierEvaluator(Dataset train, Dataset val, int epochs, double lr)
      : train_(std::move(train)), val_(std::move(val)), epochs_(epochs), lr_(lr) {}

  double evaluate(const RandAugmentConfig& cfg, uint64_t seed) const override {
    RandAugmentConfig c = cfg;
    c.seed = seed;
    TinyClassifier model = train_classifier(train_, c, epochs_, lr_, seed);
    return evaluate_accuracy(model, val_);
  }

 private:
  Dataset train_;
  Dataset val_;
  int epochs_;
  double lr_;
};

}  // namespace ra
