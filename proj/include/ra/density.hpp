#pragma once

#include <string>

#include "ra/bilevel.hpp"

namespace ra {

struct DensityTrainConfig {
  BilevelConfig bilevel;
  double m = 5.0;          // shared magnitude level inside the mixture
  double model_lr = 0.5;
  int batch_size = 32;
  uint64_t seed = 0;
  bool use_second_order = false;
};

struct DensityTraceRow {
  int step = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  std::vector<std::vector<double>> slot_probs;  // [slot][kind]
};

struct DensityResult {
  AlphaMatrix alpha;
  TinyClassifier model;
  std::vector<DensityTraceRow> trace;
};

// Alternates one model SGD step on mixture-augmented train batches with one
// alpha step driven by the density-matching gradient on a validation batch
// (minus the finite-difference second-order term when enabled).
DensityResult train_density(const AlphaMatrix& alpha0, const Dataset& train,
                            const Dataset& val, int steps,
                            const DensityTrainConfig& cfg,
                            const RealTransformSet& set = standard_real_transforms());

// CSV: step, train_loss, val_loss, then one kind@slot probability column
// per alpha entry.
std::string density_trace_csv(const DensityResult& r);

}  // namespace ra
