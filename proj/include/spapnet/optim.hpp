#ifndef SPAPNET_OPTIM_HPP
#define SPAPNET_OPTIM_HPP

#include <cmath>
#include <limits>
#include <vector>

#include "spapnet/layers.hpp"

namespace spapnet {

class Adam {
 public:
  Adam(std::vector<ParamRef> params, double lr, double beta1 = 0.9, double beta2 = 0.999,
       double eps = 1e-8)
      : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
    for (const auto& p : params_) {
      m_.push_back(Mat::Zero(p.value->rows(), p.value->cols()));
      v_.push_back(Mat::Zero(p.value->rows(), p.value->cols()));
    }
  }

  double learning_rate() const { return lr_; }
  void set_learning_rate(double lr) { lr_ = lr; }

  void zero_grad() {
    for (auto& p : params_) p.grad->setZero();
  }

  void step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, t_);
    const double bc2 = 1.0 - std::pow(beta2_, t_);
    for (std::size_t i = 0; i < params_.size(); ++i) {
      const Mat& g = *params_[i].grad;
      m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * g;
      v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * g.cwiseProduct(g);
      Mat mhat = m_[i] / bc1;
      Mat vhat = v_[i] / bc2;
      params_[i].value->array() -= lr_ * mhat.array() / (vhat.array().sqrt() + eps_);
    }
  }

 private:
  std::vector<ParamRef> params_;
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<Mat> m_, v_;
};

// Reduce-on-plateau: when the observed validation loss has not improved for
// `patience` consecutive epochs, multiply the learning rate by `factor`
// (never below `floor`) and restart the count.
class PlateauScheduler {
 public:
  PlateauScheduler(double factor, int patience, double floor)
      : factor_(factor), patience_(patience), floor_(floor) {}

  // Returns true when this observation triggered a decay.
  bool observe(double val_loss, double& lr) {
    if (val_loss < best_) {
      best_ = val_loss;
      bad_epochs_ = 0;
      return false;
    }
    ++bad_epochs_;
    if (bad_epochs_ >= patience_) {
      bad_epochs_ = 0;
      double next = std::max(lr * factor_, floor_);
      bool changed = next < lr;
      lr = next;
      return changed;
    }
    return false;
  }

 private:
  double factor_;
  int patience_;
  double floor_;
  double best_ = std::numeric_limits<double>::infinity();
  int bad_epochs_ = 0;
};

}  // namespace spapnet

#endif  // SPAPNET_OPTIM_HPP
