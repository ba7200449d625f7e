#ifndef SPAPNET_FOCAL_HPP
#define SPAPNET_FOCAL_HPP

#include <cmath>
#include <vector>

#include "spapnet/graph.hpp"

namespace spapnet {

constexpr double kFocalProbFloor = 1e-12;  // clamp before the log

inline Vec softmax(const Vec& logits) {
  Vec z = logits.array() - logits.maxCoeff();
  Vec e = z.array().exp();
  return e / e.sum();
}

// Focal loss for one sample: -alpha[label] * (1 - p_t)^gamma * log(p_t).
// gamma = 0 with unit alpha reduces to cross-entropy.
inline double focal_loss(const Vec& logits, int label, double gamma, const Vec& alpha) {
  if (gamma < 0.0) throw ValidationError("focal loss: gamma must be >= 0");
  if (label < 0 || label >= logits.size()) throw ValidationError("focal loss: label out of range");
  if (alpha.size() != logits.size()) throw ValidationError("focal loss: alpha size mismatch");
  const Vec p = softmax(logits);
  const double pt = p(label);
  const double clamped = std::max(pt, kFocalProbFloor);
  return -alpha(label) * std::pow(1.0 - pt, gamma) * std::log(clamped);
}

// dLoss/dlogits for one sample.
inline Vec focal_loss_grad(const Vec& logits, int label, double gamma, const Vec& alpha) {
  const Vec p = softmax(logits);
  const double pt = p(label);
  const double clamped = std::max(pt, kFocalProbFloor);
  const double one_minus = 1.0 - pt;
  // dL/dp_t, with the gamma=0 and p_t=1 ends handled so no 0*inf appears
  double focal_term = 0.0;
  if (gamma > 0.0 && one_minus > 0.0) {
    focal_term = gamma * std::pow(one_minus, gamma - 1.0) * std::log(clamped);
  }
  double log_term = 0.0;
  if (pt > kFocalProbFloor) {
    log_term = std::pow(one_minus, gamma) / pt;
  }
  const double dl_dpt = -alpha(label) * (log_term - focal_term);
  Vec grad = (-dl_dpt * pt) * p;
  grad(label) += dl_dpt * pt;
  return grad;
}

struct BatchLoss {
  double loss = 0.0;
  Mat dlogits;  // mean-reduced gradient
};

inline BatchLoss focal_loss_batch(const Mat& logits, const std::vector<int>& labels, double gamma,
                                  const Vec& alpha) {
  if (static_cast<Eigen::Index>(labels.size()) != logits.rows()) {
    throw ValidationError("focal loss: labels/logits row mismatch");
  }
  BatchLoss out;
  out.dlogits = Mat::Zero(logits.rows(), logits.cols());
  const double inv_n = 1.0 / static_cast<double>(logits.rows());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    Vec z = logits.row(i).transpose();
    out.loss += focal_loss(z, labels[i], gamma, alpha);
    out.dlogits.row(i) = (focal_loss_grad(z, labels[i], gamma, alpha) * inv_n).transpose();
  }
  out.loss *= inv_n;
  return out;
}

// Inverse-class-frequency weights: alpha_c = N / (K * N_c); a balanced
// dataset gives all-ones.
inline Vec inverse_frequency_alpha(const std::vector<int>& labels, int num_classes) {
  Vec counts = Vec::Zero(num_classes);
  for (int l : labels) {
    if (l < 0 || l >= num_classes) throw ValidationError("alpha: label out of range");
    counts(l) += 1.0;
  }
  const double n = static_cast<double>(labels.size());
  Vec alpha(num_classes);
  for (int c = 0; c < num_classes; ++c) {
    alpha(c) = n / (static_cast<double>(num_classes) * std::max(counts(c), 1.0));
  }
  return alpha;
}

}  // namespace spapnet

#endif  // SPAPNET_FOCAL_HPP
