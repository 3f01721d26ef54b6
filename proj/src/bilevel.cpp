#include "ra/bilevel.hpp"

#include <cmath>

namespace ra {

void BilevelConfig::validate() const {
  if (!(xi >= 0.0) || !std::isfinite(xi))
    throw InvalidRange("bilevel: xi must be finite and >= 0");
  if (!(epsilon > 0.0) || !(epsilon <= 0.1))
    throw InvalidRange("bilevel: epsilon must be in (0, 0.1]");
  if (!std::isfinite(alpha_lr)) throw InvalidRange("bilevel: alpha_lr must be finite");
}

std::vector<double> virtual_step(const BilevelProblem& problem,
                                 const std::vector<double>& w, double xi) {
  if (!(xi >= 0.0)) throw InvalidRange("virtual_step: xi must be >= 0");
  if (xi == 0.0) return w;
  const auto g = problem.grad_w_train(w);
  std::vector<double> wp(w.size());
  for (size_t i = 0; i < w.size(); ++i) wp[i] = w[i] - xi * g[i];
  return wp;
}

std::vector<double> second_order_term(const BilevelProblem& problem,
                                      const std::vector<double>& w,
                                      const BilevelConfig& cfg) {
  cfg.validate();
  const auto wp = virtual_step(problem, w, cfg.xi);
  const auto v = problem.grad_w_val(wp);
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  const size_t alpha_dim = problem.grad_alpha_train(w).size();
  if (cfg.xi == 0.0 || norm < 1e-12) return std::vector<double>(alpha_dim, 0.0);
  const double eps = cfg.epsilon / norm;
  std::vector<double> w_plus(w), w_minus(w);
  for (size_t i = 0; i < w.size(); ++i) {
    w_plus[i] += eps * v[i];
    w_minus[i] -= eps * v[i];
  }
  const auto gp = problem.grad_alpha_train(w_plus);
  const auto gm = problem.grad_alpha_train(w_minus);
  std::vector<double> out(gp.size());
  for (size_t i = 0; i < gp.size(); ++i) {
    out[i] = cfg.xi * (gp[i] - gm[i]) / (2.0 * eps);
    if (!std::isfinite(out[i])) throw NonFiniteLoss("second_order_term: non-finite output");
  }
  return out;
}

DensityProblem::DensityProblem(const TinyClassifier& shape, const AlphaMatrix& alpha,
                               const Dataset& train_batch, const Dataset& val_batch,
                               double m, const RealTransformSet& set)
    : dim_(shape.dim),
      classes_(shape.classes),
      alpha_(alpha),
      train_(train_batch),
      val_(val_batch),
      m_(m),
      set_(set) {
  train_feats_ = mixture_feats(train_);
  val_feats_ = mixture_feats(val_);
}

std::vector<std::vector<double>> DensityProblem::mixture_feats(const Dataset& batch) const {
  std::vector<std::vector<double>> feats;
  feats.reserve(batch.size());
  for (const auto& img : batch.images)
    feats.push_back(mixture_forward(img, alpha_, m_, set_).v);
  return feats;
}

std::vector<double> DensityProblem::pack(const TinyClassifier& model) const {
  std::vector<double> w = model.w;
  w.insert(w.end(), model.b.begin(), model.b.end());
  return w;
}

TinyClassifier DensityProblem::unpack(const std::vector<double>& w) const {
  TinyClassifier model(dim_, classes_);
  if (w.size() != model.w.size() + model.b.size())
    throw DimensionMismatch("DensityProblem: weight vector size mismatch");
  std::copy(w.begin(), w.begin() + model.w.size(), model.w.begin());
  std::copy(w.begin() + model.w.size(), w.end(), model.b.begin());
  return model;
}

std::vector<double> DensityProblem::grad_w_train(const std::vector<double>& w) const {
  const TinyClassifier model = unpack(w);
  WeightGrad g;
  batch_loss_grad(model, train_feats_, train_.labels, &g);
  std::vector<double> out = g.dw;
  out.insert(out.end(), g.db.begin(), g.db.end());
  return out;
}

std::vector<double> DensityProblem::grad_w_val(const std::vector<double>& w) const {
  const TinyClassifier model = unpack(w);
  WeightGrad g;
  batch_loss_grad(model, val_feats_, val_.labels, &g);
  std::vector<double> out = g.dw;
  out.insert(out.end(), g.db.begin(), g.db.end());
  return out;
}

std::vector<double> DensityProblem::grad_alpha_train(const std::vector<double>& w) const {
  return first_order_alpha_grad(alpha_, unpack(w), train_, m_, set_);
}

double DensityProblem::train_loss(const std::vector<double>& w) const {
  return batch_loss_grad(unpack(w), train_feats_, train_.labels, nullptr);
}

double DensityProblem::val_loss(const std::vector<double>& w) const {
  return batch_loss_grad(unpack(w), val_feats_, val_.labels, nullptr);
}

TinyClassifier virtual_step(const TinyClassifier& model, const Dataset& train_batch,
                            const AlphaMatrix& alpha, double m, double xi,
                            const RealTransformSet& set) {
  DensityProblem problem(model, alpha, train_batch, train_batch, m, set);
  return problem.unpack(virtual_step(problem, problem.pack(model), xi));
}

AlphaGrad second_order_term(const AlphaMatrix& alpha, const TinyClassifier& model,
                            const Dataset& train_batch, const Dataset& val_batch,
                            double m, const BilevelConfig& cfg,
                            const RealTransformSet& set) {
  DensityProblem problem(model, alpha, train_batch, val_batch, m, set);
  return second_order_term(problem, problem.pack(model), cfg);
}

}  // namespace ra
