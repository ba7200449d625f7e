#ifndef SPAPNET_INFER_HPP
#define SPAPNET_INFER_HPP

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "spapnet/focal.hpp"
#include "spapnet/model.hpp"

namespace spapnet {

struct ClipPrediction {
  std::string clip_id;
  std::string video_id;
  Vec probs;       // softmax class probabilities
  int pred_class = 0;
  Vec attention;   // clip-level 7-vector, sums to 1
  Mat per_frame_attention;  // frames x 7
};

inline ClipPrediction predict_clip(const Clip& clip, SpapNet& model) {
  auto out = model.forward_clip(clip);
  ClipPrediction pred;
  pred.clip_id = clip.clip_id;
  pred.video_id = clip.video_id;
  pred.probs = softmax(out.logits.row(0).transpose());
  Eigen::Index arg;
  pred.probs.maxCoeff(&arg);
  pred.pred_class = static_cast<int>(arg);
  AttentionResult att = attention_weights(out.node_norms);
  pred.attention = att.clip;
  pred.per_frame_attention = std::move(att.per_frame);
  return pred;
}

struct VideoVerdict {
  std::string video_id;
  int voted_class = 0;
  Vec mean_probs;      // per-class mean over clips
  Vec mean_attention;  // per-joint mean, renormalized
  int clip_count = 0;
};

// Majority vote over clip predictions; ties go to the tied class with the
// highest mean probability. Clips are aggregated in a canonical order so the
// verdict is exactly permutation-invariant.
inline VideoVerdict vote_video(const std::string& video_id,
                               const std::vector<ClipPrediction>& preds) {
  if (preds.empty()) {
    throw ValidationError("vote_video: no clip predictions for video " + video_id);
  }
  const int num_classes = static_cast<int>(preds[0].probs.size());

  std::vector<const ClipPrediction*> sorted;
  for (const auto& p : preds) {
    if (p.probs.size() != num_classes) {
      throw ValidationError("vote_video: mixed class counts for video " + video_id);
    }
    sorted.push_back(&p);
  }
  std::sort(sorted.begin(), sorted.end(), [](const ClipPrediction* a, const ClipPrediction* b) {
    if (a->pred_class != b->pred_class) return a->pred_class < b->pred_class;
    for (Eigen::Index i = 0; i < a->probs.size(); ++i) {
      if (a->probs(i) != b->probs(i)) return a->probs(i) < b->probs(i);
    }
    return a->clip_id < b->clip_id;
  });

  VideoVerdict verdict;
  verdict.video_id = video_id;
  verdict.clip_count = static_cast<int>(preds.size());

  std::vector<int> votes(num_classes, 0);
  Vec prob_sum = Vec::Zero(num_classes);
  Vec att_sum = Vec::Zero(kNodeCount);
  for (const ClipPrediction* p : sorted) {
    ++votes[p->pred_class];
    prob_sum += p->probs;
    att_sum += p->attention;
  }
  verdict.mean_probs = prob_sum / static_cast<double>(preds.size());
  verdict.mean_attention = att_sum / att_sum.sum();

  const int top_votes = *std::max_element(votes.begin(), votes.end());
  int winner = -1;
  double winner_prob = -1.0;
  for (int c = 0; c < num_classes; ++c) {
    if (votes[c] == top_votes && verdict.mean_probs(c) > winner_prob) {
      winner = c;
      winner_prob = verdict.mean_probs(c);
    }
  }
  verdict.voted_class = winner;
  return verdict;
}

inline std::string verdicts_header(const ClassMap& classes) {
  std::string h = "video_id,true_label,voted_label,clip_count";
  for (const auto& c : classes.classes) h += ",p_" + c;
  for (int j = 1; j <= kNodeCount; ++j) h += ",att_j" + std::to_string(j);
  return h;
}

inline std::string verdicts_to_text(const std::vector<VideoVerdict>& verdicts,
                                    const std::map<std::string, std::string>& truth_labels,
                                    const ClassMap& classes) {
  std::string out = verdicts_header(classes) + "\n";
  for (const auto& v : verdicts) {
    auto it = truth_labels.find(v.video_id);
    const std::string truth = it == truth_labels.end() ? "NA" : it->second;
    out += v.video_id + "," + truth + "," + classes.classes[v.voted_class] + "," +
           std::to_string(v.clip_count);
    for (Eigen::Index c = 0; c < v.mean_probs.size(); ++c) {
      out += "," + format_double(v.mean_probs(c));
    }
    for (int j = 0; j < kNodeCount; ++j) out += "," + format_double(v.mean_attention(j));
    out += "\n";
  }
  return out;
}

}  // namespace spapnet

#endif  // SPAPNET_INFER_HPP
