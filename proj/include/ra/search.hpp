#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "ra/policy.hpp"

namespace ra {

// Anything that scores a policy. Must be deterministic given (cfg, seed) and
// reentrant (grid cells may be evaluated concurrently).
class Evaluator {
 public:
  virtual ~Evaluator() = default;
  virtual double evaluate(const RandAugmentConfig& cfg, uint64_t seed) const = 0;
};

class FunctionEvaluator : public Evaluator {
 public:
  using Fn = std::function<double(const RandAugmentConfig&, uint64_t)>;
  explicit FunctionEvaluator(Fn fn) : fn_(std::move(fn)) {}
  double evaluate(const RandAugmentConfig& cfg, uint64_t seed) const override {
    return fn_(cfg, seed);
  }

 private:
  Fn fn_;
};

struct GridSpec {
  std::vector<int> n_candidates;
  std::vector<double> m_candidates;
  std::vector<uint64_t> seeds;
  RandAugmentConfig base;  // n and schedule are overwritten per cell

  void validate() const;
};

struct GridCell {
  int n = 0;
  double m = 0.0;
  std::vector<double> per_seed;
  double mean = 0.0;
};

struct GridResult {
  std::vector<GridCell> cells;  // row-major over (n, m) in candidate order
  int best_n = 0;
  double best_m = 0.0;
  double best_mean = 0.0;
};

// Evaluates the full cross product; mean over seeds per cell; argmax with
// ties broken by smaller n then smaller m. Deterministic for any jobs count.
GridResult grid_search(const GridSpec& spec, const Evaluator& eval, int jobs = 1);

struct AblationSample {
  std::set<TransformKind> subset;
  double accuracy = 0.0;
};

struct SizeBinStats {
  int size = 0;
  int count = 0;
  double median = 0.0;
  double p30 = 0.0;
  double p70 = 0.0;
};

struct AblationReport {
  std::map<TransformKind, double> per_kind_delta;  // percentage points
  std::vector<SizeBinStats> curve_by_size;
};

// Random subsets of size uniform in [size_lo, size_hi], each scored with a
// fixed (N=3, M=4) policy and no other augmentation.
std::vector<AblationSample> run_ablation(int num_samples, int size_lo, int size_hi,
                                         const Evaluator& eval, DeterministicRng rng,
                                         uint64_t eval_seed = 0);

AblationReport per_transform_delta(const std::vector<AblationSample>& samples);

struct SweepRow {
  double level = 0.0;
  double accuracy = 0.0;
};

struct SweepResult {
  TransformKind kind;
  double base_level = 0.0;
  std::vector<SweepRow> rows;
  double best_level = 0.0;
  double best_accuracy = 0.0;
  double gap = 0.0;  // best_accuracy - accuracy at base_level
};

// Varies one kind's level via the config override map while every other
// kind stays at base_level.
SweepResult magnitude_sweep(TransformKind kind, const std::vector<double>& levels,
                            double base_level, const Evaluator& eval,
                            const RandAugmentConfig& base, uint64_t eval_seed = 0);

// Nearest-rank percentile, q in [0, 1]. Values need not be sorted.
double percentile_nearest_rank(std::vector<double> values, double q);

std::string grid_csv(const GridResult& r);
std::string ablation_csv(const AblationReport& r);  // kind,delta descending
std::string ablation_curve_csv(const AblationReport& r);
std::string sweep_csv(const SweepResult& r);
std::string grid_summary(const GridResult& r);

}  // namespace ra
