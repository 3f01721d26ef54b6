#pragma once

#include <vector>

#include "ra/mixture.hpp"

namespace ra {

struct BilevelConfig {
  double xi = 0.01;       // virtual learning rate, >= 0
  double epsilon = 1e-3;  // finite-difference scale, > 0, <= 0.1
  double alpha_lr = 0.1;

  void validate() const;
};

// Abstract bilevel instance: train loss over (w, alpha) with alpha held at
// its current value, plus the validation loss over w. Lets the
// finite-difference term be exercised on analytic toy problems.
class BilevelProblem {
 public:
  virtual ~BilevelProblem() = default;
  virtual std::vector<double> grad_w_train(const std::vector<double>& w) const = 0;
  virtual std::vector<double> grad_alpha_train(const std::vector<double>& w) const = 0;
  virtual std::vector<double> grad_w_val(const std::vector<double>& w) const = 0;
};

// w' = w - xi * grad_w L_train(w, alpha).
std::vector<double> virtual_step(const BilevelProblem& problem,
                                 const std::vector<double>& w, double xi);

// xi * (grad_alpha L_train(w + eps v) - grad_alpha L_train(w - eps v)) / (2 eps)
// with v = grad_w L_val at the virtual point and eps = cfg.epsilon / ||v||.
// Returns zeros when ||v|| < 1e-12 or xi == 0.
std::vector<double> second_order_term(const BilevelProblem& problem,
                                      const std::vector<double>& w,
                                      const BilevelConfig& cfg);

// Density-matching instance: TinyClassifier weights (w then b, flattened)
// against mixture-augmented train/val batches at magnitude m.
class DensityProblem : public BilevelProblem {
 public:
  DensityProblem(const TinyClassifier& shape, const AlphaMatrix& alpha,
                 const Dataset& train_batch, const Dataset& val_batch, double m,
                 const RealTransformSet& set = standard_real_transforms());

  std::vector<double> grad_w_train(const std::vector<double>& w) const override;
  std::vector<double> grad_alpha_train(const std::vector<double>& w) const override;
  std::vector<double> grad_w_val(const std::vector<double>& w) const override;

  std::vector<double> pack(const TinyClassifier& model) const;
  TinyClassifier unpack(const std::vector<double>& w) const;

  double train_loss(const std::vector<double>& w) const;
  double val_loss(const std::vector<double>& w) const;

 private:
  std::vector<std::vector<double>> mixture_feats(const Dataset& batch) const;
  int dim_, classes_;
  const AlphaMatrix& alpha_;
  const Dataset& train_;
  const Dataset& val_;
  double m_;
  const RealTransformSet& set_;
  std::vector<std::vector<double>> train_feats_;  // cached, alpha-dependent
  std::vector<std::vector<double>> val_feats_;
};

// Convenience wrappers on the classifier itself.
TinyClassifier virtual_step(const TinyClassifier& model, const Dataset& train_batch,
                            const AlphaMatrix& alpha, double m, double xi,
                            const RealTransformSet& set = standard_real_transforms());

AlphaGrad second_order_term(const AlphaMatrix& alpha, const TinyClassifier& model,
                            const Dataset& train_batch, const Dataset& val_batch,
                            double m, const BilevelConfig& cfg,
                            const RealTransformSet& set = standard_real_transforms());

}  // namespace ra
