#ifndef SPAPNET_MODEL_HPP
#define SPAPNET_MODEL_HPP

#include <memory>
#include <string>
#include <vector>

#include "spapnet/clips.hpp"
#include "spapnet/layers.hpp"

namespace spapnet {

struct ModelConfig {
  int input_channels = 3;
  std::vector<int> block_channels = {64, 128};
  double leaky_slope = 0.2;
  double dropout_rate = 0.2;
  int pcsf_out_channels = 128;
  int num_classes = 2;
  double b = 0.9;
  double d = 0.125;
  int clip_len = kDefaultClipLen;

  void validate() const {
    if (input_channels < 1) throw ValidationError("model config: input_channels must be >= 1");
    if (block_channels.size() != 2 || block_channels[0] < 1 || block_channels[1] < 1) {
      throw ValidationError("model config: block_channels must be two positive counts");
    }
    if (dropout_rate < 0.0 || dropout_rate >= 1.0) {
      throw ValidationError("model config: dropout_rate must lie in [0,1)");
    }
    if (leaky_slope < 0.0 || leaky_slope > 1.0) {
      throw ValidationError("model config: leaky_slope must lie in [0,1]");
    }
    if (pcsf_out_channels < 1) throw ValidationError("model config: pcsf_out_channels >= 1");
    if (num_classes < 2) throw ValidationError("model config: num_classes must be >= 2");
    if (!(b > 0.0 && b <= 1.0) || !(d > 0.0 && d <= 1.0)) {
      throw ValidationError("model config: squeezing ratios must lie in (0,1]");
    }
    if (clip_len < 1) throw ValidationError("model config: clip_len must be >= 1");
  }
};

// Assembles a clip batch into per-node sample matrices (rows clip-major).
inline NodeBatch node_batch_from_clips(const std::vector<const Clip*>& clips) {
  if (clips.empty()) throw ValidationError("empty clip batch");
  const int len = clips[0]->clip_len;
  for (const Clip* c : clips) {
    if (c->clip_len != len) throw ValidationError("clip batch with mixed clip lengths");
  }
  const Eigen::Index n = static_cast<Eigen::Index>(clips.size()) * len;
  NodeBatch x = NodeBatch::zeros(kNodeCount, n, kClipChannels);
  for (std::size_t b = 0; b < clips.size(); ++b) {
    for (int f = 0; f < len; ++f) {
      const Eigen::Index row = static_cast<Eigen::Index>(b) * len + f;
      for (int node = 0; node < kNodeCount; ++node)
        for (int ch = 0; ch < kClipChannels; ++ch)
          x.node[node](row, ch) = clips[b]->at(f, node, ch);
    }
  }
  return x;
}

// SPAPNet: two locally connected GNN blocks, the pyramidal channel-
// squeezing-fusion block, global average pooling over frames and nodes, and
// a fully connected classifier head. Post-fusion per-node activation norms
// are retained for attention readout.
class SpapNet {
 public:
  SpapNet(const ModelConfig& config, const SkeletalGraph& graph)
      : config_(config),
        graph_(graph),
        lcn1_(graph.a_hat, graph.neighbors, config.input_channels, config.block_channels[0]),
        bn1_(SkeletalGraph::kNodes, config.block_channels[0]),
        lcn2_(graph.a_hat, graph.neighbors, config.block_channels[0], config.block_channels[1]),
        bn2_(SkeletalGraph::kNodes, config.block_channels[1]),
        pcsf_(graph, config.block_channels[1], config.pcsf_out_channels, config.b, config.d),
        head_(config.pcsf_out_channels, config.num_classes) {
    config_.validate();
  }

  const ModelConfig& config() const { return config_; }
  const SkeletalGraph& graph() const { return graph_; }
  PcsfBlock& pcsf() { return pcsf_; }
  Linear& head() { return head_; }
  LcnLayer& lcn1() { return lcn1_; }
  LcnLayer& lcn2() { return lcn2_; }

  // Parameters are initialized in canonical name order from a single stream,
  // so one seed pins every tensor.
  void init_params(std::uint64_t seed) {
    Rng rng(mix_seed(seed, 0x5eedu));
    lcn1_.init_params(rng);
    lcn2_.init_params(rng);
    pcsf_.init_params(rng);
    head_.init_params(rng);
  }

  struct ForwardCache {
    NodeBatch x;
    NodeBatch lcn1_out;
    BatchNorm::Cache bn1;
    NodeBatch bn1_out;
    DropoutMask mask1;
    NodeBatch h1;
    NodeBatch lcn2_out;
    BatchNorm::Cache bn2;
    NodeBatch bn2_out;
    DropoutMask mask2;
    NodeBatch h2;
    PcsfBlock::Cache pcsf;
    Mat gap;  // batch_clips x pcsf_out_channels
    int batch_clips = 0;
  };

  struct Output {
    Mat logits;      // batch_clips x num_classes
    Mat node_norms;  // (batch_clips*clip_len) x 7, post-fusion L2 norms
  };

  // x holds batch_clips*clip_len rows per node. In train mode dropout draws
  // from `dropout_rng` (required) and batch-norm running statistics advance;
  // eval mode is deterministic and uses the running statistics.
  Output forward(const NodeBatch& x, int batch_clips, bool train, Rng* dropout_rng,
                 ForwardCache* cache) {
    if (x.nodes() != kNodeCount || x.cols() != config_.input_channels) {
      throw ValidationError("model: input batch must be 7 nodes x " +
                            std::to_string(config_.input_channels) + " channels");
    }
    if (x.rows() != static_cast<Eigen::Index>(batch_clips) * config_.clip_len) {
      throw ValidationError("model: batch rows must equal clips * clip_len (clip_len " +
                            std::to_string(config_.clip_len) + ")");
    }
    if (train && dropout_rng == nullptr) {
      throw ValidationError("model: train-mode forward needs a dropout rng");
    }

    NodeBatch lcn1_out = lcn1_.forward(x);
    BatchNorm::Cache bn1_cache;
    NodeBatch bn1_out = bn1_.forward(lcn1_out, train, cache ? &bn1_cache : nullptr);
    NodeBatch act1 = leaky_relu(bn1_out, config_.leaky_slope);
    DropoutMask mask1;
    NodeBatch h1;
    if (train && config_.dropout_rate > 0.0) {
      mask1 = make_dropout_mask(kNodeCount, act1.rows(), act1.cols(), config_.dropout_rate,
                                *dropout_rng);
      h1 = apply_mask(act1, mask1);
    } else {
      h1 = act1;
    }

    NodeBatch lcn2_out = lcn2_.forward(h1);
    BatchNorm::Cache bn2_cache;
    NodeBatch bn2_out = bn2_.forward(lcn2_out, train, cache ? &bn2_cache : nullptr);
    NodeBatch act2 = leaky_relu(bn2_out, config_.leaky_slope);
    DropoutMask mask2;
    NodeBatch h2;
    if (train && config_.dropout_rate > 0.0) {
      mask2 = make_dropout_mask(kNodeCount, act2.rows(), act2.cols(), config_.dropout_rate,
                                *dropout_rng);
      h2 = apply_mask(act2, mask2);
    } else {
      h2 = act2;
    }

    PcsfBlock::Cache pcsf_cache;
    NodeBatch fused = pcsf_.forward(h2, cache ? &pcsf_cache : nullptr);

    Output out;
    out.node_norms.resize(x.rows(), kNodeCount);
    for (int k = 0; k < kNodeCount; ++k) {
      out.node_norms.col(k) = fused.node[k].rowwise().norm();
    }

    // Node sum in a fixed mirror-symmetric pairing, then frame average.
    Mat node_sum = fused.node[0] + fused.node[6];
    node_sum += fused.node[1] + fused.node[5];
    node_sum += fused.node[2] + fused.node[4];
    node_sum += fused.node[3];
    Mat gap(batch_clips, config_.pcsf_out_channels);
    const double denom = static_cast<double>(kNodeCount) * config_.clip_len;
    for (int b = 0; b < batch_clips; ++b) {
      gap.row(b) =
          node_sum.middleRows(static_cast<Eigen::Index>(b) * config_.clip_len, config_.clip_len)
              .colwise()
              .sum() /
          denom;
    }
    out.logits = head_.forward(gap);

    if (cache) {
      cache->x = x;
      cache->lcn1_out = std::move(lcn1_out);
      cache->bn1 = std::move(bn1_cache);
      cache->bn1_out = std::move(bn1_out);
      cache->mask1 = std::move(mask1);
      cache->h1 = std::move(h1);
      cache->lcn2_out = std::move(lcn2_out);
      cache->bn2 = std::move(bn2_cache);
      cache->bn2_out = std::move(bn2_out);
      cache->mask2 = std::move(mask2);
      cache->h2 = std::move(h2);
      cache->pcsf = std::move(pcsf_cache);
      cache->gap = std::move(gap);
      cache->batch_clips = batch_clips;
    }
    return out;
  }

  // Convenience single-clip eval pass.
  Output forward_clip(const Clip& clip) {
    if (clip.clip_len != config_.clip_len) {
      throw ValidationError("model: clip " + clip.clip_id + " has length " +
                            std::to_string(clip.clip_len) + ", model expects " +
                            std::to_string(config_.clip_len));
    }
    return forward(node_batch_from_clips({&clip}), 1, false, nullptr, nullptr);
  }

  // Accumulates gradients for every trainable tensor from dLoss/dlogits.
  void backward(const ForwardCache& cache, const Mat& dlogits) {
    Mat dgap = head_.backward(cache.gap, dlogits);

    const double denom = static_cast<double>(kNodeCount) * config_.clip_len;
    NodeBatch dfused =
        NodeBatch::zeros(kNodeCount, cache.x.rows(), config_.pcsf_out_channels);
    for (int b = 0; b < cache.batch_clips; ++b) {
      RowVec g = dgap.row(b) / denom;
      for (int f = 0; f < config_.clip_len; ++f) {
        const Eigen::Index row = static_cast<Eigen::Index>(b) * config_.clip_len + f;
        for (int k = 0; k < kNodeCount; ++k) dfused.node[k].row(row) = g;
      }
    }

    NodeBatch dh2 = pcsf_.backward(cache.pcsf, dfused);
    if (cache.mask2.mask.size()) dh2 = apply_mask(dh2, cache.mask2);
    NodeBatch dbn2 = leaky_relu_backward(cache.bn2_out, dh2, config_.leaky_slope);
    NodeBatch dlcn2 = bn2_.backward(cache.bn2, dbn2);
    NodeBatch dh1 = lcn2_.backward(cache.h1, dlcn2);
    if (cache.mask1.mask.size()) dh1 = apply_mask(dh1, cache.mask1);
    NodeBatch dbn1 = leaky_relu_backward(cache.bn1_out, dh1, config_.leaky_slope);
    NodeBatch dlcn1 = bn1_.backward(cache.bn1, dbn1);
    lcn1_.backward(cache.x, dlcn1);
  }

  std::vector<ParamRef> named_params() {
    std::vector<ParamRef> out;
    lcn1_.collect_params("block1.lcn", out);
    bn1_.collect_params("block1.bn", out);
    lcn2_.collect_params("block2.lcn", out);
    bn2_.collect_params("block2.bn", out);
    pcsf_.collect_params("pcsf", out);
    head_.collect_params("head", out);
    return out;
  }

  std::vector<ParamRef> named_buffers() {
    std::vector<ParamRef> out;
    bn1_.collect_buffers("block1.bn", out);
    bn2_.collect_buffers("block2.bn", out);
    return out;
  }

  std::size_t parameter_count() {
    std::size_t n = 0;
    for (const auto& p : named_params()) n += static_cast<std::size_t>(p.value->size());
    return n;
  }

  void zero_grad() {
    for (auto& p : named_params()) p.grad->setZero();
  }

 private:
  ModelConfig config_;
  SkeletalGraph graph_;
  LcnLayer lcn1_;
  BatchNorm bn1_;
  LcnLayer lcn2_;
  BatchNorm bn2_;
  PcsfBlock pcsf_;
  Linear head_;
};

// Attention readout from retained post-fusion activation norms: each frame's
// seven norms are normalized to sum 1 (uniform fallback when a frame is all
// zero); the clip-level weights are the frame mean, renormalized.
struct AttentionResult {
  Mat per_frame;  // frames x 7
  Vec clip;       // 7
};

inline AttentionResult attention_weights(const Mat& norms) {
  AttentionResult res;
  res.per_frame.resize(norms.rows(), norms.cols());
  for (Eigen::Index f = 0; f < norms.rows(); ++f) {
    double s = norms.row(f).sum();
    if (s <= 0.0) {
      res.per_frame.row(f).setConstant(1.0 / static_cast<double>(norms.cols()));
    } else {
      res.per_frame.row(f) = norms.row(f) / s;
    }
  }
  RowVec mean = res.per_frame.colwise().mean();
  res.clip = (mean / mean.sum()).transpose();
  return res;
}

}  // namespace spapnet

#endif  // SPAPNET_MODEL_HPP
