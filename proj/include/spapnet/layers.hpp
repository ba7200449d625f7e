#ifndef SPAPNET_LAYERS_HPP
#define SPAPNET_LAYERS_HPP

#include <cmath>
#include <string>
#include <vector>

#include "spapnet/graph.hpp"
#include "spapnet/rng.hpp"

namespace spapnet {

using RowVec = Eigen::RowVectorXd;

// Batch of per-node features: node[k] is N x C, one row per frame sample.
// Frames from a batch of clips are stacked clip-major.
struct NodeBatch {
  std::vector<Mat> node;

  static NodeBatch zeros(int n_nodes, Eigen::Index rows, Eigen::Index cols) {
    NodeBatch b;
    b.node.assign(static_cast<std::size_t>(n_nodes), Mat::Zero(rows, cols));
    return b;
  }
  int nodes() const { return static_cast<int>(node.size()); }
  Eigen::Index rows() const { return node.empty() ? 0 : node[0].rows(); }
  Eigen::Index cols() const { return node.empty() ? 0 : node[0].cols(); }
};

// Named handle onto one trainable tensor and its gradient accumulator.
struct ParamRef {
  std::string name;
  Mat* value;
  Mat* grad;
};

namespace detail {

// Canonical fill order for weight init: rows outer, columns inner.
inline void fill_uniform(Mat& m, Rng& rng, double bound) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = rng.uniform(-bound, bound);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Locally connected graph layer: every (target, neighbor) pair owns its own
// weight matrix, so node i's update h_i = sum_j a_hat_ij * x_j W_j^i can
// weight each relation independently instead of sharing one kernel.
// Non-self contributions are accumulated before the self term with a fixed
// pairing so a left-right mirrored input yields exactly mirrored output.
class LcnLayer {
 public:
  LcnLayer(Mat a_hat, std::vector<std::vector<int>> neighbors, int c_in, int c_out)
      : a_hat_(std::move(a_hat)),
        neighbors_(std::move(neighbors)),
        c_in_(c_in),
        c_out_(c_out) {
    const int n = static_cast<int>(neighbors_.size());
    w_.resize(n);
    dw_.resize(n);
    for (int i = 0; i < n; ++i) {
      w_[i].assign(neighbors_[i].size(), Mat::Zero(c_in_, c_out_));
      dw_[i].assign(neighbors_[i].size(), Mat::Zero(c_in_, c_out_));
    }
    bias_.assign(n, Mat::Zero(1, c_out_));
    dbias_.assign(n, Mat::Zero(1, c_out_));
  }

  int nodes() const { return static_cast<int>(neighbors_.size()); }
  int in_channels() const { return c_in_; }
  int out_channels() const { return c_out_; }

  void init_params(Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(c_in_));
    for (int i = 0; i < nodes(); ++i)
      for (auto& w : w_[i]) detail::fill_uniform(w, rng, bound);
    for (auto& b : bias_) b.setZero();
  }

  NodeBatch forward(const NodeBatch& x) const {
    check_input(x);
    const Eigen::Index n_rows = x.rows();
    NodeBatch y = NodeBatch::zeros(nodes(), n_rows, c_out_);
    for (int i = 0; i < nodes(); ++i) {
      Mat& acc = y.node[i];
      bool started = false;
      int self_slot = -1;
      for (std::size_t s = 0; s < neighbors_[i].size(); ++s) {
        int j = neighbors_[i][s];
        if (j == i) {
          self_slot = static_cast<int>(s);
          continue;
        }
        if (!started) {
          acc.noalias() = a_hat_(i, j) * (x.node[j] * w_[i][s]);
          started = true;
        } else {
          acc.noalias() += a_hat_(i, j) * (x.node[j] * w_[i][s]);
        }
      }
      if (self_slot >= 0) {
        if (!started) {
          acc.noalias() = a_hat_(i, i) * (x.node[i] * w_[i][self_slot]);
        } else {
          acc.noalias() += a_hat_(i, i) * (x.node[i] * w_[i][self_slot]);
        }
      }
      acc.rowwise() += bias_[i].row(0);
    }
    return y;
  }

  // Accumulates parameter gradients and returns the input gradient.
  NodeBatch backward(const NodeBatch& x, const NodeBatch& dy) {
    check_input(x);
    NodeBatch dx = NodeBatch::zeros(nodes(), x.rows(), c_in_);
    for (int i = 0; i < nodes(); ++i) {
      dbias_[i].row(0) += dy.node[i].colwise().sum();
      for (std::size_t s = 0; s < neighbors_[i].size(); ++s) {
        int j = neighbors_[i][s];
        double a = a_hat_(i, j);
        dw_[i][s].noalias() += a * (x.node[j].transpose() * dy.node[i]);
        dx.node[j].noalias() += a * (dy.node[i] * w_[i][s].transpose());
      }
    }
    return dx;
  }

  // Weight access by (target, neighbor) node pair.
  Mat& weight(int i, int j) { return w_[i][slot(i, j)]; }
  const Mat& weight(int i, int j) const { return w_[i][slot(i, j)]; }
  Mat& bias(int i) { return bias_[i]; }
  const std::vector<std::vector<int>>& neighbor_lists() const { return neighbors_; }

  void collect_params(const std::string& prefix, std::vector<ParamRef>& out) {
    for (int i = 0; i < nodes(); ++i) {
      for (std::size_t s = 0; s < neighbors_[i].size(); ++s) {
        int j = neighbors_[i][s];
        out.push_back({prefix + ".W." + std::to_string(i + 1) + "." + std::to_string(j + 1),
                       &w_[i][s], &dw_[i][s]});
      }
    }
    for (int i = 0; i < nodes(); ++i) {
      out.push_back({prefix + ".b." + std::to_string(i + 1), &bias_[i], &dbias_[i]});
    }
  }

 private:
  int slot(int i, int j) const {
    for (std::size_t s = 0; s < neighbors_[i].size(); ++s)
      if (neighbors_[i][s] == j) return static_cast<int>(s);
    throw ValidationError("lcn: no weight for node pair (" + std::to_string(i + 1) + "," +
                          std::to_string(j + 1) + ")");
  }

  void check_input(const NodeBatch& x) const {
    if (x.nodes() != nodes() || x.cols() != c_in_) {
      throw ValidationError("lcn layer: input shape (" + std::to_string(x.nodes()) + " nodes x " +
                            std::to_string(x.cols()) + " ch) does not match (" +
                            std::to_string(nodes()) + " x " + std::to_string(c_in_) + ")");
    }
  }

  Mat a_hat_;
  std::vector<std::vector<int>> neighbors_;
  int c_in_, c_out_;
  std::vector<std::vector<Mat>> w_, dw_;
  std::vector<Mat> bias_, dbias_;
};

// ---------------------------------------------------------------------------
// Batch normalization over the batch x frame axis, with separate statistics
// and affine parameters per (node, channel). Running statistics start at
// (0, 1), so an untrained model can run eval passes.
class BatchNorm {
 public:
  BatchNorm(int n_nodes, int channels, double eps = 1e-5, double momentum = 0.1)
      : n_nodes_(n_nodes), channels_(channels), eps_(eps), momentum_(momentum) {
    gamma_.assign(n_nodes_, Mat::Ones(1, channels_));
    beta_.assign(n_nodes_, Mat::Zero(1, channels_));
    dgamma_.assign(n_nodes_, Mat::Zero(1, channels_));
    dbeta_.assign(n_nodes_, Mat::Zero(1, channels_));
    running_mean_.assign(n_nodes_, Mat::Zero(1, channels_));
    running_var_.assign(n_nodes_, Mat::Ones(1, channels_));
  }

  struct Cache {
    NodeBatch xhat;
    std::vector<RowVec> inv_std;
  };

  NodeBatch forward(const NodeBatch& x, bool train, Cache* cache) {
    check_input(x);
    const Eigen::Index n = x.rows();
    NodeBatch y = NodeBatch::zeros(n_nodes_, n, channels_);
    if (cache) {
      cache->xhat = NodeBatch::zeros(n_nodes_, n, channels_);
      cache->inv_std.assign(n_nodes_, RowVec::Zero(channels_));
    }
    for (int k = 0; k < n_nodes_; ++k) {
      for (int c = 0; c < channels_; ++c) {
        double mu, var;
        if (train) {
          mu = x.node[k].col(c).mean();
          var = (x.node[k].col(c).array() - mu).matrix().squaredNorm() / static_cast<double>(n);
          running_mean_[k](0, c) = (1.0 - momentum_) * running_mean_[k](0, c) + momentum_ * mu;
          running_var_[k](0, c) = (1.0 - momentum_) * running_var_[k](0, c) + momentum_ * var;
        } else {
          mu = running_mean_[k](0, c);
          var = running_var_[k](0, c);
        }
        const double inv = 1.0 / std::sqrt(var + eps_);
        Vec xhat = (x.node[k].col(c).array() - mu) * inv;
        y.node[k].col(c) = gamma_[k](0, c) * xhat.array() + beta_[k](0, c);
        if (cache) {
          cache->xhat.node[k].col(c) = xhat;
          cache->inv_std[k](c) = inv;
        }
      }
    }
    return y;
  }

  // Train-mode gradient; the batch statistics' dependence on x is included.
  NodeBatch backward(const Cache& cache, const NodeBatch& dy) {
    const Eigen::Index n = dy.rows();
    NodeBatch dx = NodeBatch::zeros(n_nodes_, n, channels_);
    for (int k = 0; k < n_nodes_; ++k) {
      for (int c = 0; c < channels_; ++c) {
        const auto xhat = cache.xhat.node[k].col(c);
        const auto dyc = dy.node[k].col(c);
        const double sum_dy = dyc.sum();
        const double sum_dy_xhat = dyc.dot(xhat);
        dgamma_[k](0, c) += sum_dy_xhat;
        dbeta_[k](0, c) += sum_dy;
        const double scale = gamma_[k](0, c) * cache.inv_std[k](c) / static_cast<double>(n);
        dx.node[k].col(c) =
            scale * (static_cast<double>(n) * dyc.array() - sum_dy - xhat.array() * sum_dy_xhat);
      }
    }
    return dx;
  }

  void collect_params(const std::string& prefix, std::vector<ParamRef>& out) {
    for (int k = 0; k < n_nodes_; ++k) {
      out.push_back({prefix + ".gamma." + std::to_string(k + 1), &gamma_[k], &dgamma_[k]});
      out.push_back({prefix + ".beta." + std::to_string(k + 1), &beta_[k], &dbeta_[k]});
    }
  }

  // Non-trainable state that still belongs in a checkpoint.
  void collect_buffers(const std::string& prefix, std::vector<ParamRef>& out) {
    for (int k = 0; k < n_nodes_; ++k) {
      out.push_back(
          {prefix + ".running_mean." + std::to_string(k + 1), &running_mean_[k], nullptr});
      out.push_back({prefix + ".running_var." + std::to_string(k + 1), &running_var_[k], nullptr});
    }
  }

 private:
  void check_input(const NodeBatch& x) const {
    if (x.nodes() != n_nodes_ || x.cols() != channels_) {
      throw ValidationError("batchnorm: input shape mismatch");
    }
  }

  int n_nodes_, channels_;
  double eps_, momentum_;
  std::vector<Mat> gamma_, beta_, dgamma_, dbeta_;
  std::vector<Mat> running_mean_, running_var_;
};

// ---------------------------------------------------------------------------

inline NodeBatch leaky_relu(const NodeBatch& x, double slope) {
  NodeBatch y = x;
  for (auto& m : y.node) m = m.array().max(slope * m.array());
  return y;
}

inline NodeBatch leaky_relu_backward(const NodeBatch& pre, const NodeBatch& dy, double slope) {
  NodeBatch dx = dy;
  for (int k = 0; k < dx.nodes(); ++k) {
    dx.node[k].array() *= (pre.node[k].array() > 0.0).select(Mat::Ones(pre.rows(), pre.cols()),
                                                             Mat::Constant(pre.rows(), pre.cols(),
                                                                           slope))
                              .array();
  }
  return dx;
}

// Inverted dropout; mask entries are 0 or 1/(1-rate) so eval needs no rescale.
struct DropoutMask {
  std::vector<Mat> mask;
};

inline DropoutMask make_dropout_mask(int n_nodes, Eigen::Index rows, Eigen::Index cols,
                                     double rate, Rng& rng) {
  DropoutMask m;
  m.mask.assign(static_cast<std::size_t>(n_nodes), Mat::Zero(rows, cols));
  const double keep = 1.0 - rate;
  const double scale = 1.0 / keep;
  for (auto& mm : m.mask) {
    for (Eigen::Index c = 0; c < cols; ++c)
      for (Eigen::Index r = 0; r < rows; ++r) mm(r, c) = rng.uniform() < keep ? scale : 0.0;
  }
  return m;
}

inline NodeBatch apply_mask(const NodeBatch& x, const DropoutMask& m) {
  NodeBatch y = x;
  for (int k = 0; k < y.nodes(); ++k) y.node[k].array() *= m.mask[k].array();
  return y;
}

// ---------------------------------------------------------------------------
// Parameter-free channel squeezing: contiguous group average pooling from
// c_in down to c_out channels. Group g spans input channels
// [floor(g*c_in/c_out), floor((g+1)*c_in/c_out)).

inline std::pair<int, int> squeeze_group(int g, int c_in, int c_out) {
  return {(g * c_in) / c_out, ((g + 1) * c_in) / c_out};
}

inline Mat channel_squeeze(const Mat& x, int c_out) {
  const int c_in = static_cast<int>(x.cols());
  if (c_out < 1 || c_out > c_in) {
    throw ValidationError("channel_squeeze: target channels " + std::to_string(c_out) +
                          " outside [1, " + std::to_string(c_in) + "]");
  }
  if (c_out == c_in) return x;
  Mat y(x.rows(), c_out);
  for (int g = 0; g < c_out; ++g) {
    auto [lo, hi] = squeeze_group(g, c_in, c_out);
    y.col(g) = x.middleCols(lo, hi - lo).rowwise().sum() / static_cast<double>(hi - lo);
  }
  return y;
}

// Adjoint of the group mean: each member channel receives 1/group_size.
inline Mat channel_squeeze_backward(const Mat& dy, int c_in) {
  const int c_out = static_cast<int>(dy.cols());
  if (c_out == c_in) return dy;
  Mat dx = Mat::Zero(dy.rows(), c_in);
  for (int g = 0; g < c_out; ++g) {
    auto [lo, hi] = squeeze_group(g, c_in, c_out);
    const double inv = 1.0 / static_cast<double>(hi - lo);
    for (int c = lo; c < hi; ++c) dx.col(c) = dy.col(g) * inv;
  }
  return dx;
}

// ---------------------------------------------------------------------------
// Pyramidal channel-squeezing-fusion block. For each target node the related
// nodes' features are squeezed to the scheduled widths, concatenated as
// [self, short-range (node order), long-range (node order)], and projected by
// that node's output weight. Squeezing and fusion themselves carry no
// trainable parameters; the projections W^m are the block's only weights.
class PcsfBlock {
 public:
  PcsfBlock(const SkeletalGraph& g, int c_in, int c_out, double b, double d)
      : dist_(g.dist), c_in_(c_in), c_out_(c_out) {
    for (int m = 0; m < SkeletalGraph::kNodes; ++m) {
      sched_[m] = squeeze_schedule(g, m, c_in, b, d);
      order_[m].push_back(m);
      for (int k = 0; k < SkeletalGraph::kNodes; ++k) {
        int hop = dist_(m, k);
        if (hop >= 1 && hop <= 2) order_[m].push_back(k);
      }
      for (int k = 0; k < SkeletalGraph::kNodes; ++k) {
        if (dist_(m, k) > 2) order_[m].push_back(k);
      }
      int off = 0;
      for (int k : order_[m]) {
        offset_[m].push_back(off);
        off += sched_[m].c_out[k];
      }
      if (off != sched_[m].fused_width()) {
        throw ValidationError("pcsf: fused width mismatch for node " + std::to_string(m + 1));
      }
      wm_[m] = Mat::Zero(off, c_out_);
      dwm_[m] = Mat::Zero(off, c_out_);
    }
  }

  int in_channels() const { return c_in_; }
  int out_channels() const { return c_out_; }
  const SqueezeSchedule& schedule(int m) const { return sched_[m]; }
  int fused_width(int m) const { return sched_[m].fused_width(); }
  Mat& projection(int m) { return wm_[m]; }

  // The squeezing and fusion stages are pooling and concatenation only.
  static constexpr int squeeze_fusion_param_count() { return 0; }

  void init_params(Rng& rng) {
    for (int m = 0; m < SkeletalGraph::kNodes; ++m) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(wm_[m].rows()));
      detail::fill_uniform(wm_[m], rng, bound);
    }
  }

  struct Cache {
    std::vector<Mat> fused;  // fused[m]: N x fused_width(m)
  };

  // No activation inside the block. Contributions are added self-first, then
  // distance by distance with the two equidistant nodes combined first, so a
  // mirrored input maps to exactly mirrored output.
  NodeBatch forward(const NodeBatch& h, Cache* cache) const {
    if (h.nodes() != SkeletalGraph::kNodes || h.cols() != c_in_) {
      throw ValidationError("pcsf: input must be " + std::to_string(SkeletalGraph::kNodes) +
                            " nodes x " + std::to_string(c_in_) + " channels");
    }
    const Eigen::Index n = h.rows();
    NodeBatch y = NodeBatch::zeros(SkeletalGraph::kNodes, n, c_out_);
    if (cache) cache->fused.assign(SkeletalGraph::kNodes, Mat());
    for (int m = 0; m < SkeletalGraph::kNodes; ++m) {
      Mat fused(n, fused_width(m));
      for (std::size_t s = 0; s < order_[m].size(); ++s) {
        int k = order_[m][s];
        fused.middleCols(offset_[m][s], sched_[m].c_out[k]) =
            channel_squeeze(h.node[k], sched_[m].c_out[k]);
      }
      auto contrib = [&](int k) {
        int s = slot_of(m, k);
        return fused.middleCols(offset_[m][s], sched_[m].c_out[k]) *
               wm_[m].middleRows(offset_[m][s], sched_[m].c_out[k]);
      };
      Mat& out = y.node[m];
      out.noalias() = contrib(m);
      for (int hop = 1; hop < SkeletalGraph::kNodes; ++hop) {
        int lo = -1, hi = -1;
        for (int k = 0; k < SkeletalGraph::kNodes; ++k) {
          if (dist_(m, k) == hop) (k < m ? lo : hi) = k;
        }
        if (lo >= 0 && hi >= 0) {
          Mat pair = contrib(lo);
          pair.noalias() += contrib(hi);
          out += pair;
        } else if (lo >= 0) {
          out.noalias() += contrib(lo);
        } else if (hi >= 0) {
          out.noalias() += contrib(hi);
        }
      }
      if (cache) cache->fused[m] = std::move(fused);
    }
    return y;
  }

  NodeBatch backward(const Cache& cache, const NodeBatch& dy) {
    const Eigen::Index n = dy.rows();
    NodeBatch dh = NodeBatch::zeros(SkeletalGraph::kNodes, n, c_in_);
    for (int m = 0; m < SkeletalGraph::kNodes; ++m) {
      dwm_[m].noalias() += cache.fused[m].transpose() * dy.node[m];
      Mat dfused = dy.node[m] * wm_[m].transpose();
      for (std::size_t s = 0; s < order_[m].size(); ++s) {
        int k = order_[m][s];
        dh.node[k].noalias() += channel_squeeze_backward(
            dfused.middleCols(offset_[m][s], sched_[m].c_out[k]), c_in_);
      }
    }
    return dh;
  }

  void collect_params(const std::string& prefix, std::vector<ParamRef>& out) {
    for (int m = 0; m < SkeletalGraph::kNodes; ++m) {
      out.push_back({prefix + ".Wm." + std::to_string(m + 1), &wm_[m], &dwm_[m]});
    }
  }

 private:
  int slot_of(int m, int k) const {
    for (std::size_t s = 0; s < order_[m].size(); ++s)
      if (order_[m][s] == k) return static_cast<int>(s);
    throw ValidationError("pcsf: node not in fused order");
  }

  Eigen::Matrix<int, SkeletalGraph::kNodes, SkeletalGraph::kNodes> dist_;
  int c_in_, c_out_;
  std::array<SqueezeSchedule, SkeletalGraph::kNodes> sched_;
  std::array<std::vector<int>, SkeletalGraph::kNodes> order_;
  std::array<std::vector<int>, SkeletalGraph::kNodes> offset_;
  std::array<Mat, SkeletalGraph::kNodes> wm_, dwm_;
};

// ---------------------------------------------------------------------------

class Linear {
 public:
  Linear(int in, int out) : w_(Mat::Zero(in, out)), b_(Mat::Zero(1, out)) {
    dw_ = Mat::Zero(in, out);
    db_ = Mat::Zero(1, out);
  }

  void init_params(Rng& rng) {
    detail::fill_uniform(w_, rng, 1.0 / std::sqrt(static_cast<double>(w_.rows())));
    b_.setZero();
  }

  Mat forward(const Mat& x) const {
    if (x.cols() != w_.rows()) throw ValidationError("linear: input width mismatch");
    return (x * w_).rowwise() + b_.row(0);
  }

  Mat backward(const Mat& x, const Mat& dy) {
    dw_.noalias() += x.transpose() * dy;
    db_.row(0) += dy.colwise().sum();
    return dy * w_.transpose();
  }

  Mat& weights() { return w_; }
  Mat& bias() { return b_; }

  void collect_params(const std::string& prefix, std::vector<ParamRef>& out) {
    out.push_back({prefix + ".W", &w_, &dw_});
    out.push_back({prefix + ".b", &b_, &db_});
  }

 private:
  Mat w_, b_, dw_, db_;
};

}  // namespace spapnet

#endif  // SPAPNET_LAYERS_HPP
