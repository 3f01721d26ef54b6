#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ra/transforms.hpp"

namespace ra {

// Global magnitude M as a function of training progress.
struct MagnitudeSchedule {
  enum class Type { kConstant, kRandom, kLinear, kRandomIncreasingUpper };
  Type type = Type::kConstant;
  double a = 0.0;  // Constant: m | Random: lo | Linear: m_start | RIU: lo
  double b = 0.0;  // Random: hi | Linear: m_end | RIU: hi_start
  double c = 0.0;  // RIU: hi_end

  static MagnitudeSchedule constant(double m) { return {Type::kConstant, m, 0, 0}; }
  static MagnitudeSchedule random(double lo, double hi) {
    return {Type::kRandom, lo, hi, 0};
  }
  static MagnitudeSchedule linear(double m_start, double m_end) {
    return {Type::kLinear, m_start, m_end, 0};
  }
  static MagnitudeSchedule random_increasing_upper(double lo, double hi_start,
                                                   double hi_end) {
    return {Type::kRandomIncreasingUpper, lo, hi_start, hi_end};
  }

  void validate() const;
  bool operator==(const MagnitudeSchedule&) const = default;
};

inline std::set<TransformKind> full_transform_set() {
  const auto all = all_transform_kinds();
  return {all.begin(), all.end()};
}

// The full policy: N, the magnitude schedule, the allowed-kind subset, a
// seed, optional baseline ops applied before the policy and an optional
// cutout applied after. level_overrides pins individual kinds to a fixed
// level for single-transform sweeps; absent kinds use the shared M.
struct RandAugmentConfig {
  int n = 2;
  MagnitudeSchedule schedule = MagnitudeSchedule::constant(9);
  std::set<TransformKind> subset = full_transform_set();
  uint64_t seed = 0;
  std::vector<BaselineOp> baseline;
  std::optional<int> cutout_after;
  std::map<TransformKind, double> level_overrides;

  void validate() const;
  bool operator==(const RandAugmentConfig&) const = default;
};

struct PolicyRealization {
  std::vector<std::pair<TransformKind, Level>> ops;
};

double schedule_value(const MagnitudeSchedule& s, long step, long total_steps,
                      DeterministicRng& rng);

PolicyRealization sample_policy(const RandAugmentConfig& cfg, long step,
                                long total_steps, DeterministicRng& rng);

// Baselines, then the N sampled ops, then optional cutout, on the stream
// split(seed, step, image_index).
ImageBuffer augment_image(const ImageBuffer& img, const RandAugmentConfig& cfg,
                          long step, long total_steps, uint64_t image_index);

// K^N, exact; throws Overflow past 64 bits.
uint64_t policy_space_size(uint64_t k, uint64_t n);

std::string serialize_config(const RandAugmentConfig& cfg);
RandAugmentConfig parse_config(const std::string& text);

std::string serialize_realization(const PolicyRealization& r);

}  // namespace ra
