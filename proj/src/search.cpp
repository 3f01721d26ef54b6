#include "ra/search.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <set>
#include <sstream>
#include <thread>

namespace ra {

namespace {

std::string fmt6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string fmt_level(double v) {
  // integer levels print bare, fractional levels with 6 decimals
  if (v == std::floor(v) && std::abs(v) < 1e9) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.0f", v);
    return buf;
  }
  return fmt6(v);
}

}  // namespace

void GridSpec::validate() const {
  if (n_candidates.empty()) throw InvalidRange("grid: n_candidates must be non-empty");
  if (m_candidates.empty()) throw InvalidRange("grid: m_candidates must be non-empty");
  if (seeds.empty()) throw InvalidRange("grid: seeds must be non-empty");
  std::set<std::pair<int, double>> seen;
  for (int n : n_candidates)
    for (double m : m_candidates)
      if (!seen.emplace(n, m).second)
        throw InvalidRange("grid: duplicate (n, m) cell");
}

GridResult grid_search(const GridSpec& spec, const Evaluator& eval, int jobs) {
  spec.validate();
  if (jobs < 1) jobs = 1;

  struct Task {
    size_t cell;
    size_t seed_idx;
  };
  std::vector<GridCell> cells;
  std::vector<Task> tasks;
  for (int n : spec.n_candidates) {
    for (double m : spec.m_candidates) {
      GridCell c;
      c.n = n;
      c.m = m;
      c.per_seed.assign(spec.seeds.size(), 0.0);
      for (size_t s = 0; s < spec.seeds.size(); ++s)
        tasks.push_back({cells.size(), s});
      cells.push_back(std::move(c));
    }
  }

  std::atomic<size_t> next{0};
  std::atomic<bool> failed{false};
  std::string failure_msg;
  std::mutex failure_mu;
  auto worker = [&]() {
    for (;;) {
      size_t i = next.fetch_add(1);
      if (i >= tasks.size() || failed.load()) return;
      const Task& t = tasks[i];
      GridCell& cell = cells[t.cell];
      RandAugmentConfig cfg = spec.base;
      cfg.n = cell.n;
      cfg.schedule = MagnitudeSchedule::constant(cell.m);
      try {
        cell.per_seed[t.seed_idx] = eval.evaluate(cfg, spec.seeds[t.seed_idx]);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(failure_mu);
        if (!failed.exchange(true))
          failure_msg = "grid cell (n=" + std::to_string(cell.n) +
                        ", m=" + fmt_level(cell.m) + "): " + e.what();
      }
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failed.load()) throw EvaluatorFailure(failure_msg);

  GridResult r;
  r.cells = std::move(cells);
  bool first = true;
  for (auto& c : r.cells) {
    double sum = 0.0;
    for (double v : c.per_seed) sum += v;
    c.mean = sum / static_cast<double>(c.per_seed.size());
    // tie-break: smaller n, then smaller m
    bool better = first || c.mean > r.best_mean ||
                  (c.mean == r.best_mean &&
                   (c.n < r.best_n || (c.n == r.best_n && c.m < r.best_m)));
    if (better) {
      r.best_n = c.n;
      r.best_m = c.m;
      r.best_mean = c.mean;
      first = false;
    }
  }
  return r;
}

std::vector<AblationSample> run_ablation(int num_samples, int size_lo, int size_hi,
                                         const Evaluator& eval, DeterministicRng rng,
                                         uint64_t eval_seed) {
  if (size_lo < 1 || size_hi > kNumTransformKinds || size_lo > size_hi)
    throw InvalidSizeRange("ablation: need 1 <= lo <= hi <= 14");
  const auto kinds = all_transform_kinds();
  std::vector<AblationSample> samples;
  samples.reserve(num_samples);
  for (int i = 0; i < num_samples; ++i) {
    const int size =
        size_lo + static_cast<int>(rng.choice(static_cast<uint64_t>(size_hi - size_lo + 1)));
    // Fisher-Yates prefix for a uniform subset without replacement
    std::array<TransformKind, kNumTransformKinds> pool = kinds;
    std::set<TransformKind> subset;
    for (int j = 0; j < size; ++j) {
      const int pick = j + static_cast<int>(rng.choice(static_cast<uint64_t>(kNumTransformKinds - j)));
      std::swap(pool[j], pool[pick]);
      subset.insert(pool[j]);
    }
    RandAugmentConfig cfg;
    cfg.n = 3;
    cfg.schedule = MagnitudeSchedule::constant(4);
    cfg.subset = subset;
    cfg.baseline.clear();
    cfg.cutout_after.reset();
    samples.push_back({std::move(subset), eval.evaluate(cfg, eval_seed)});
  }
  return samples;
}

double percentile_nearest_rank(std::vector<double> values, double q) {
  if (values.empty()) throw InvalidRange("percentile: empty input");
  std::sort(values.begin(), values.end());
  const size_t n = values.size();
  size_t rank = static_cast<size_t>(std::ceil(q * static_cast<double>(n)));
  if (rank < 1) rank = 1;
  if (rank > n) rank = n;
  return values[rank - 1];
}

AblationReport per_transform_delta(const std::vector<AblationSample>& samples) {
  AblationReport report;
  for (TransformKind k : all_transform_kinds()) {
    double with_sum = 0.0, without_sum = 0.0;
    long with_n = 0, without_n = 0;
    for (const auto& s : samples) {
      if (s.subset.count(k)) {
        with_sum += s.accuracy;
        ++with_n;
      } else {
        without_sum += s.accuracy;
        ++without_n;
      }
    }
    if (with_n == 0 || without_n == 0)
      throw InsufficientCoverage("ablation: kind \"" + kind_name(k) +
                                 "\" missing from one group");
    report.per_kind_delta[k] = with_sum / with_n - without_sum / without_n;
  }
  std::map<int, std::vector<double>> by_size;
  for (const auto& s : samples) by_size[static_cast<int>(s.subset.size())].push_back(s.accuracy);
  for (const auto& [size, accs] : by_size) {
    SizeBinStats b;
    b.size = size;
    b.count = static_cast<int>(accs.size());
    b.median = percentile_nearest_rank(accs, 0.5);
    b.p30 = percentile_nearest_rank(accs, 0.3);
    b.p70 = percentile_nearest_rank(accs, 0.7);
    report.curve_by_size.push_back(b);
  }
  return report;
}

SweepResult magnitude_sweep(TransformKind kind, const std::vector<double>& levels,
                            double base_level, const Evaluator& eval,
                            const RandAugmentConfig& base, uint64_t eval_seed) {
  if (levels.empty()) throw InvalidRange("sweep: levels must be non-empty");
  SweepResult r;
  r.kind = kind;
  r.base_level = base_level;
  double base_acc = 0.0;
  bool have_base = false;
  for (double lv : levels) {
    RandAugmentConfig cfg = base;
    cfg.schedule = MagnitudeSchedule::constant(base_level);
    cfg.level_overrides[kind] = lv;
    const double acc = eval.evaluate(cfg, eval_seed);
    r.rows.push_back({lv, acc});
    if (r.rows.size() == 1 || acc > r.best_accuracy) {
      r.best_accuracy = acc;
      r.best_level = lv;
    }
    if (lv == base_level) {
      base_acc = acc;
      have_base = true;
    }
  }
  if (!have_base) {
    RandAugmentConfig cfg = base;
    cfg.schedule = MagnitudeSchedule::constant(base_level);
    cfg.level_overrides[kind] = base_level;
    base_acc = eval.evaluate(cfg, eval_seed);
  }
  r.gap = r.best_accuracy - base_acc;
  return r;
}

std::string grid_csv(const GridResult& r) {
  std::ostringstream out;
  out << "n,m,seed,accuracy\n";
  for (const auto& c : r.cells)
    for (size_t s = 0; s < c.per_seed.size(); ++s)
      out << c.n << "," << fmt_level(c.m) << "," << s << "," << fmt6(c.per_seed[s]) << "\n";
  return out.str();
}

std::string grid_summary(const GridResult& r) {
  std::ostringstream out;
  out << "grid cells: " << r.cells.size() << "\n";
  for (const auto& c : r.cells)
    out << "  n=" << c.n << " m=" << fmt_level(c.m) << " mean=" << fmt6(c.mean) << "\n";
  out << "best: n=" << r.best_n << " m=" << fmt_level(r.best_m)
      << " mean=" << fmt6(r.best_mean) << "\n";
  return out.str();
}

std::string ablation_csv(const AblationReport& r) {
  std::vector<std::pair<TransformKind, double>> rows(r.per_kind_delta.begin(),
                                                     r.per_kind_delta.end());
  std::stable_sort(rows.begin(), rows.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::ostringstream out;
  out << "kind,delta\n";
  for (const auto& [k, d] : rows) out << kind_name(k) << "," << fmt6(d) << "\n";
  return out.str();
}

std::string ablation_curve_csv(const AblationReport& r) {
  std::ostringstream out;
  out << "subset_size,count,median,p30,p70\n";
  for (const auto& b : r.curve_by_size)
    out << b.size << "," << b.count << "," << fmt6(b.median) << "," << fmt6(b.p30)
        << "," << fmt6(b.p70) << "\n";
  return out.str();
}

std::string sweep_csv(const SweepResult& r) {
  std::ostringstream out;
  out << "kind,level,accuracy\n";
  for (const auto& row : r.rows)
    out << kind_name(r.kind) << "," << fmt_level(row.level) << "," << fmt6(row.accuracy)
        << "\n";
  return out.str();
}

}  // namespace ra
