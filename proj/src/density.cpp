#include "ra/density.hpp"

#include <cmath>
#include <sstream>

#include "ra/transforms.hpp"

namespace ra {

namespace {

Dataset take_batch(const Dataset& data, DeterministicRng& rng, int batch_size) {
  Dataset b;
  b.num_classes = data.num_classes;
  const int n = std::min<int>(batch_size, static_cast<int>(data.size()));
  for (int i = 0; i < n; ++i) {
    const size_t idx = rng.choice(data.size());
    b.images.push_back(data.images[idx]);
    b.labels.push_back(data.labels[idx]);
  }
  return b;
}

}  // namespace

DensityResult train_density(const AlphaMatrix& alpha0, const Dataset& train,
                            const Dataset& val, int steps,
                            const DensityTrainConfig& cfg,
                            const RealTransformSet& set) {
  if (steps < 1) throw InvalidRange("train_density: steps must be >= 1");
  cfg.bilevel.validate();
  train.validate();
  val.validate();
  if (train.size() == 0 || val.size() == 0)
    throw InvalidRange("train_density: empty dataset");

  DensityResult r;
  r.alpha = alpha0;
  const int dim = train.images[0].width * train.images[0].height * 3;
  r.model = TinyClassifier(dim, train.num_classes);

  DeterministicRng root(cfg.seed);
  for (int s = 0; s < steps; ++s) {
    DeterministicRng step_rng = root.split(static_cast<uint64_t>(s));
    Dataset train_batch = take_batch(train, step_rng, cfg.batch_size);
    Dataset val_batch = take_batch(val, step_rng, cfg.batch_size);

    // model step on the mixture-augmented train batch
    DensityProblem problem(r.model, r.alpha, train_batch, val_batch, cfg.m, set);
    auto w = problem.pack(r.model);
    const double train_loss = problem.train_loss(w);
    const auto gw = problem.grad_w_train(w);
    for (size_t i = 0; i < w.size(); ++i) w[i] -= cfg.model_lr * gw[i];
    r.model = problem.unpack(w);

    // alpha step: density-matching gradient on the validation batch
    double val_loss = 0.0;
    AlphaGrad fo =
        first_order_alpha_grad(r.alpha, r.model, val_batch, cfg.m, set, &val_loss);
    if (cfg.use_second_order) {
      const AlphaGrad so =
          second_order_term(r.alpha, r.model, train_batch, val_batch, cfg.m,
                            cfg.bilevel, set);
      for (size_t i = 0; i < fo.size(); ++i) fo[i] -= so[i];
    }
    for (size_t i = 0; i < r.alpha.logits.size(); ++i) {
      r.alpha.logits[i] -= cfg.bilevel.alpha_lr * fo[i];
      if (!std::isfinite(r.alpha.logits[i]))
        throw NonFiniteLoss("train_density: alpha diverged");
    }

    DensityTraceRow row;
    row.step = s;
    row.train_loss = train_loss;
    row.val_loss = val_loss;
    for (int j = 0; j < r.alpha.n; ++j) row.slot_probs.push_back(r.alpha.slot_probs(j));
    r.trace.push_back(std::move(row));
  }
  return r;
}

std::string density_trace_csv(const DensityResult& r) {
  std::ostringstream out;
  out << "step,train_loss,val_loss";
  const int n = r.alpha.n, k = r.alpha.k;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < n; ++j) {
      const std::string name =
          k == kNumTransformKinds ? kind_name(static_cast<TransformKind>(i))
                                  : "t" + std::to_string(i);
      out << "," << name << "@" << j;
    }
  out << "\n";
  char buf[32];
  for (const auto& row : r.trace) {
    out << row.step;
    std::snprintf(buf, sizeof(buf), ",%.6f,%.6f", row.train_loss, row.val_loss);
    out << buf;
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < n; ++j) {
        std::snprintf(buf, sizeof(buf), ",%.6f", row.slot_probs[j][i]);
        out << buf;
      }
    out << "\n";
  }
  return out.str();
}

}  // namespace ra
