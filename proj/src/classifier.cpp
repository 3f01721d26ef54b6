#include "ra/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "ra/rng.hpp"

namespace ra {

void Dataset::validate() const {
  if (images.size() != labels.size())
    throw DimensionMismatch("dataset: image/label count mismatch");
  for (int l : labels)
    if (l < 0 || l >= num_classes) throw LabelOutOfRange("dataset: label out of range");
}

std::vector<double> features_of(const ImageBuffer& img) {
  std::vector<double> x(img.size());
  for (size_t i = 0; i < img.size(); ++i) x[i] = img.data[i] / 255.0;
  return x;
}

std::vector<double> TinyClassifier::logits(const std::vector<double>& x) const {
  if (static_cast<int>(x.size()) != dim)
    throw DimensionMismatch("classifier: feature dimension mismatch");
  std::vector<double> z(b);
  for (int d = 0; d < dim; ++d) {
    const double xv = x[d];
    if (xv == 0.0) continue;
    const double* wd = &w[static_cast<size_t>(d) * classes];
    for (int c = 0; c < classes; ++c) z[c] += wd[c] * xv;
  }
  return z;
}

int TinyClassifier::predict(const std::vector<double>& x) const {
  const auto z = logits(x);
  int best = 0;
  for (int c = 1; c < classes; ++c)
    if (z[c] > z[best]) best = c;
  return best;
}

double softmax_ce(const std::vector<double>& logits, int label,
                  std::vector<double>* dlogits) {
  const double zmax = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  std::vector<double> p(logits.size());
  for (size_t c = 0; c < logits.size(); ++c) {
    p[c] = std::exp(logits[c] - zmax);
    sum += p[c];
  }
  for (auto& v : p) v /= sum;
  const double loss = -std::log(std::max(p[label], 1e-300));
  if (dlogits) {
    *dlogits = p;
    (*dlogits)[label] -= 1.0;
  }
  return loss;
}

double batch_loss_grad(const TinyClassifier& model,
                       const std::vector<std::vector<double>>& feats,
                       const std::vector<int>& labels, WeightGrad* grad) {
  if (feats.empty()) throw InvalidRange("batch_loss_grad: empty batch");
  if (grad) {
    grad->dw.assign(model.w.size(), 0.0);
    grad->db.assign(model.b.size(), 0.0);
  }
  double total = 0.0;
  std::vector<double> dlogits;
  for (size_t i = 0; i < feats.size(); ++i) {
    total += softmax_ce(model.logits(feats[i]), labels[i], grad ? &dlogits : nullptr);
    if (grad) {
      for (int d = 0; d < model.dim; ++d) {
        const double xv = feats[i][d];
        if (xv == 0.0) continue;
        double* gd = &grad->dw[static_cast<size_t>(d) * model.classes];
        for (int c = 0; c < model.classes; ++c) gd[c] += xv * dlogits[c];
      }
      for (int c = 0; c < model.classes; ++c) grad->db[c] += dlogits[c];
    }
  }
  const double inv = 1.0 / static_cast<double>(feats.size());
  if (grad) {
    for (auto& v : grad->dw) v *= inv;
    for (auto& v : grad->db) v *= inv;
  }
  return total * inv;
}

std::vector<double> input_grad(const TinyClassifier& model,
                               const std::vector<double>& x, int label,
                               double* loss_out) {
  std::vector<double> dlogits;
  const double loss = softmax_ce(model.logits(x), label, &dlogits);
  if (loss_out) *loss_out = loss;
  std::vector<double> gx(model.dim, 0.0);
  for (int d = 0; d < model.dim; ++d) {
    const double* wd = &model.w[static_cast<size_t>(d) * model.classes];
    double acc = 0.0;
    for (int c = 0; c < model.classes; ++c) acc += wd[c] * dlogits[c];
    gx[d] = acc;
  }
  return gx;
}

TinyClassifier train_classifier(const Dataset& train, const RandAugmentConfig& cfg,
                                int epochs, double lr, uint64_t seed,
                                int batch_size) {
  train.validate();
  if (epochs < 1) throw InvalidRange("train_classifier: epochs must be >= 1");
  if (!(lr > 0.0)) throw InvalidRange("train_classifier: lr must be > 0");
  if (train.size() == 0) throw InvalidRange("train_classifier: empty dataset");
  std::set<int> present(train.labels.begin(), train.labels.end());
  if (present.size() < 2)
    throw DegenerateDataset("train_classifier: need at least two classes present");

  const int dim = train.images[0].width * train.images[0].height * 3;
  TinyClassifier model(dim, train.num_classes);
  const long total_steps =
      std::max<long>(1, static_cast<long>(epochs) *
                            ((train.size() + batch_size - 1) / batch_size));
  long step = 0;
  DeterministicRng shuffle_root = DeterministicRng(seed).split(0x5u);
  std::vector<size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  for (int e = 0; e < epochs; ++e) {
    DeterministicRng sh = shuffle_root.split(static_cast<uint64_t>(e));
    for (size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[sh.choice(i)]);
    for (size_t start = 0; start < order.size(); start += batch_size) {
      const size_t end = std::min(order.size(), start + batch_size);
      std::vector<std::vector<double>> feats;
      std::vector<int> labels;
      feats.reserve(end - start);
      for (size_t i = start; i < end; ++i) {
        const size_t idx = order[i];
        ImageBuffer aug = augment_image(train.images[idx], cfg, step, total_steps, idx);
        feats.push_back(features_of(aug));
        labels.push_back(train.labels[idx]);
      }
      WeightGrad g;
      batch_loss_grad(model, feats, labels, &g);
      for (size_t i = 0; i < model.w.size(); ++i) model.w[i] -= lr * g.dw[i];
      for (size_t i = 0; i < model.b.size(); ++i) model.b[i] -= lr * g.db[i];
      ++step;
    }
  }
  return model;
}

double evaluate_accuracy(const TinyClassifier& model, const Dataset& data) {
  data.validate();
  if (data.size() == 0) throw InvalidRange("evaluate_accuracy: empty dataset");
  long correct = 0;
  for (size_t i = 0; i < data.size(); ++i)
    if (model.predict(features_of(data.images[i])) == data.labels[i]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

}  // namespace ra
