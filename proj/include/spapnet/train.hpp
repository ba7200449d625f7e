#ifndef SPAPNET_TRAIN_HPP
#define SPAPNET_TRAIN_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "spapnet/clips.hpp"
#include "spapnet/focal.hpp"
#include "spapnet/folds.hpp"
#include "spapnet/model.hpp"
#include "spapnet/optim.hpp"

namespace spapnet {

struct TrainConfig {
  std::string mode = "binary";  // binary | multiclass
  double lr = 0.01;
  double lr_decay_factor = 0.1;
  double lr_floor = 1e-5;
  int batch_size = 16;
  int max_epochs = 500;
  double focal_gamma = 2.0;
  std::vector<double> focal_alpha;  // empty -> inverse class frequency
  std::uint64_t seed = 0;
  int plateau_patience = 25;
  int folds = 5;
  bool group_by_participant = false;

  static TrainConfig defaults(const std::string& mode) {
    TrainConfig c;
    c.mode = mode;
    if (mode == "multiclass") {
      c.lr = 0.001;
      c.batch_size = 8;
    }
    return c;
  }

  bool binary() const { return mode == "binary"; }

  void validate() const {
    if (mode != "binary" && mode != "multiclass") {
      throw ValidationError("train config: mode must be binary or multiclass");
    }
    if (lr <= 0.0) throw ValidationError("train config: lr must be > 0");
    if (lr_decay_factor <= 0.0 || lr_decay_factor > 1.0) {
      throw ValidationError("train config: lr_decay_factor must lie in (0,1]");
    }
    if (batch_size < 1) throw ValidationError("train config: batch_size must be >= 1");
    if (max_epochs < 1) throw ValidationError("train config: max_epochs must be >= 1");
    if (focal_gamma < 0.0) throw ValidationError("train config: focal_gamma must be >= 0");
    for (double a : focal_alpha) {
      if (a < 0.0) throw ValidationError("train config: focal_alpha entries must be >= 0");
    }
    if (plateau_patience < 1) throw ValidationError("train config: plateau_patience must be >= 1");
    if (folds < 2) throw ValidationError("train config: folds must be >= 2");
  }
};

struct EpochRecord {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_bal_acc = 0.0;
  double lr = 0.0;  // rate used for this epoch's updates
};

inline std::string history_to_text(const std::vector<EpochRecord>& history) {
  std::string out = "epoch,train_loss,val_loss,val_bal_acc,lr\n";
  for (const auto& r : history) {
    out += std::to_string(r.epoch) + "," + format_double(r.train_loss) + "," +
           format_double(r.val_loss) + "," + format_double(r.val_bal_acc) + "," +
           format_double(r.lr) + "\n";
  }
  return out;
}

struct FoldResult {
  std::unique_ptr<SpapNet> best_model;
  int best_epoch = 0;
  double best_val_loss = 0.0;
  std::vector<EpochRecord> history;
  Vec alpha;  // class weights actually used
};

namespace detail {

// Balanced accuracy over clip-level predictions: mean recall over the
// classes present in the truth labels.
inline double balanced_accuracy(const std::vector<int>& truth, const std::vector<int>& pred,
                                int num_classes) {
  std::vector<long> correct(num_classes, 0), total(num_classes, 0);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ++total[truth[i]];
    if (truth[i] == pred[i]) ++correct[truth[i]];
  }
  double sum = 0.0;
  int present = 0;
  for (int c = 0; c < num_classes; ++c) {
    if (total[c] == 0) continue;
    sum += static_cast<double>(correct[c]) / static_cast<double>(total[c]);
    ++present;
  }
  return present > 0 ? sum / present : 0.0;
}

inline void copy_model_state(SpapNet& from, SpapNet& to) {
  auto src_p = from.named_params();
  auto dst_p = to.named_params();
  for (std::size_t i = 0; i < src_p.size(); ++i) *dst_p[i].value = *src_p[i].value;
  auto src_b = from.named_buffers();
  auto dst_b = to.named_buffers();
  for (std::size_t i = 0; i < src_b.size(); ++i) *dst_b[i].value = *src_b[i].value;
}

}  // namespace detail

// Trains one cross-validation fold to max_epochs with Adam and
// reduce-on-plateau decay, returning the best-validation-loss snapshot and
// the per-epoch history. Fully deterministic for fixed (seed, data, config).
inline FoldResult train_fold(const ClipSet& clips, const FoldPlan& plan, int fold,
                             const TrainConfig& tcfg, const ModelConfig& mcfg,
                             const SkeletalGraph& graph) {
  tcfg.validate();
  mcfg.validate();
  if (fold < 0 || fold >= plan.k) throw ValidationError("train_fold: fold id out of range");

  const ClassMap classes = class_map(tcfg.binary());
  if (classes.size() != mcfg.num_classes) {
    throw ValidationError("train_fold: model num_classes does not match mode vocabulary");
  }

  std::vector<const Clip*> train_clips, val_clips;
  std::vector<int> train_labels, val_labels;
  for (const auto& clip : clips.clips) {
    const bool in_val = plan.in_fold(fold, clip.video_id);
    (in_val ? val_clips : train_clips).push_back(&clip);
    (in_val ? val_labels : train_labels).push_back(classes.index_of(clip.label));
  }
  if (train_clips.empty()) {
    throw ValidationError("train_fold: fold " + std::to_string(fold) + " has no training clips");
  }
  if (val_clips.empty()) {
    throw ValidationError("train_fold: fold " + std::to_string(fold) + " has no validation clips");
  }

  Vec alpha;
  if (!tcfg.focal_alpha.empty()) {
    if (static_cast<int>(tcfg.focal_alpha.size()) != classes.size()) {
      throw ValidationError("train_fold: focal_alpha must have one weight per class");
    }
    alpha = Eigen::Map<const Vec>(tcfg.focal_alpha.data(), classes.size());
  } else {
    alpha = inverse_frequency_alpha(train_labels, classes.size());
  }

  FoldResult result;
  result.alpha = alpha;

  SpapNet model(mcfg, graph);
  model.init_params(mix_seed(tcfg.seed, static_cast<std::uint64_t>(fold), 1));
  Rng dropout_rng(mix_seed(tcfg.seed, static_cast<std::uint64_t>(fold), 2));
  Rng shuffle_rng(mix_seed(tcfg.seed, static_cast<std::uint64_t>(fold), 3));

  Adam adam(model.named_params(), tcfg.lr);
  PlateauScheduler plateau(tcfg.lr_decay_factor, tcfg.plateau_patience, tcfg.lr_floor);

  result.best_model = std::make_unique<SpapNet>(mcfg, graph);
  result.best_val_loss = std::numeric_limits<double>::infinity();

  std::vector<std::size_t> order(train_clips.size());
  std::iota(order.begin(), order.end(), 0);

  auto evaluate_validation = [&](double& loss, double& bal_acc) {
    double total = 0.0;
    std::vector<int> preds(val_clips.size());
    constexpr std::size_t kChunk = 64;
    for (std::size_t start = 0; start < val_clips.size(); start += kChunk) {
      const std::size_t count = std::min(kChunk, val_clips.size() - start);
      std::vector<const Clip*> chunk(val_clips.begin() + start, val_clips.begin() + start + count);
      NodeBatch x = node_batch_from_clips(chunk);
      auto out = model.forward(x, static_cast<int>(count), false, nullptr, nullptr);
      for (std::size_t i = 0; i < count; ++i) {
        Vec z = out.logits.row(static_cast<Eigen::Index>(i)).transpose();
        total += focal_loss(z, val_labels[start + i], tcfg.focal_gamma, alpha);
        Eigen::Index arg;
        z.maxCoeff(&arg);
        preds[start + i] = static_cast<int>(arg);
      }
    }
    loss = total / static_cast<double>(val_clips.size());
    bal_acc = detail::balanced_accuracy(val_labels, preds, classes.size());
  };

  for (int epoch = 1; epoch <= tcfg.max_epochs; ++epoch) {
    const double epoch_lr = adam.learning_rate();
    shuffle_rng.shuffle(order);
    double train_loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += tcfg.batch_size) {
      const std::size_t count =
          std::min(static_cast<std::size_t>(tcfg.batch_size), order.size() - start);
      std::vector<const Clip*> batch(count);
      std::vector<int> labels(count);
      for (std::size_t i = 0; i < count; ++i) {
        batch[i] = train_clips[order[start + i]];
        labels[i] = train_labels[order[start + i]];
      }
      NodeBatch x = node_batch_from_clips(batch);
      SpapNet::ForwardCache cache;
      auto out = model.forward(x, static_cast<int>(count), true, &dropout_rng, &cache);
      BatchLoss bl = focal_loss_batch(out.logits, labels, tcfg.focal_gamma, alpha);
      adam.zero_grad();
      model.backward(cache, bl.dlogits);
      adam.step();
      train_loss_sum += bl.loss * static_cast<double>(count);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = train_loss_sum / static_cast<double>(train_clips.size());
    evaluate_validation(rec.val_loss, rec.val_bal_acc);
    rec.lr = epoch_lr;
    result.history.push_back(rec);

    if (rec.val_loss < result.best_val_loss) {
      result.best_val_loss = rec.val_loss;
      result.best_epoch = epoch;
      detail::copy_model_state(model, *result.best_model);
    }

    double lr = adam.learning_rate();
    plateau.observe(rec.val_loss, lr);
    adam.set_learning_rate(lr);
  }
  return result;
}

}  // namespace spapnet

#endif  // SPAPNET_TRAIN_HPP
