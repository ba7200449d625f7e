#ifndef SPAPNET_GRAPH_HPP
#define SPAPNET_GRAPH_HPP

#include <array>
#include <cmath>
#include <queue>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "spapnet/error.hpp"
#include "spapnet/normalize.hpp"

namespace spapnet {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// The upper-body skeletal graph: a 7-node chain RWrist-RElbow-RShoulder-
// Neck-LShoulder-LElbow-LWrist. Nodes are 0-based internally; docs and CLI
// use the 1-based numbering.
struct SkeletalGraph {
  static constexpr int kNodes = kNodeCount;

  std::vector<std::pair<int, int>> edges;        // intra-frame skeleton edges
  Mat a_hat;                                     // symmetric, rows sum to 1
  Eigen::Matrix<int, kNodes, kNodes> dist;       // shortest-path hop counts
  std::vector<std::vector<int>> neighbors;       // 1-hop + self, ascending
  bool has_interframe_edges = true;              // part of the graph definition;
                                                 // the network applies spatial
                                                 // convolution only
};

namespace detail {

inline Eigen::Matrix<int, SkeletalGraph::kNodes, SkeletalGraph::kNodes> bfs_distances(
    const std::vector<std::vector<int>>& adjacency, int n) {
  Eigen::Matrix<int, SkeletalGraph::kNodes, SkeletalGraph::kNodes> dist;
  dist.setConstant(-1);
  for (int s = 0; s < n; ++s) {
    std::queue<int> q;
    dist(s, s) = 0;
    q.push(s);
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (int v : adjacency[u]) {
        if (dist(s, v) < 0) {
          dist(s, v) = dist(s, u) + 1;
          q.push(v);
        }
      }
    }
  }
  return dist;
}

}  // namespace detail

inline SkeletalGraph build_graph() {
  SkeletalGraph g;
  const int n = SkeletalGraph::kNodes;
  for (int i = 0; i + 1 < n; ++i) g.edges.emplace_back(i, i + 1);

  std::vector<std::vector<int>> adjacency(n);
  for (auto [a, b] : g.edges) {
    adjacency[a].push_back(b);
    adjacency[b].push_back(a);
  }

  g.neighbors.resize(n);
  for (int i = 0; i < n; ++i) {
    if (i > 0) g.neighbors[i].push_back(i - 1);
    g.neighbors[i].push_back(i);
    if (i + 1 < n) g.neighbors[i].push_back(i + 1);
  }

  // Symmetric self-loop normalization D^(-1/2)(A+I)D^(-1/2), then balanced
  // scaling until every row sums to 1. The one-sided row rescale would break
  // symmetry; iterating the symmetric rescale converges to the unique
  // doubly-stochastic scaling, which keeps both properties.
  Mat a = Mat::Identity(n, n);
  for (auto [u, v] : g.edges) {
    a(u, v) = 1.0;
    a(v, u) = 1.0;
  }
  Vec deg = a.rowwise().sum();
  Vec dinv_sqrt = deg.array().rsqrt();
  Mat s = dinv_sqrt.asDiagonal() * a * dinv_sqrt.asDiagonal();
  for (int iter = 0; iter < 1000; ++iter) {
    Vec rows = s.rowwise().sum();
    if ((rows.array() - 1.0).abs().maxCoeff() < 1e-14) break;
    Vec r = rows.array().rsqrt();
    s = r.asDiagonal() * s * r.asDiagonal();
  }
  g.a_hat = 0.5 * (s + s.transpose());  // enforce exact symmetry

  g.dist = detail::bfs_distances(adjacency, n);
  return g;
}

// Per-target-node channel budget: the self node keeps every channel,
// short-range nodes (1-2 hops) keep floor(b*C_in), and long-range nodes decay
// as floor(d^dist * C_in). Entries never drop below one channel; with the
// default d=0.125 the raw long-range values fall under 1 and the clamp is
// what keeps those nodes represented at all.
struct SqueezeSchedule {
  int target = 0;  // 0-based node
  int c_in = 0;
  double b = 0.0;
  double d = 0.0;
  std::array<int, SkeletalGraph::kNodes> c_out{};

  int fused_width() const {
    int s = 0;
    for (int v : c_out) s += v;
    return s;
  }
};

inline SqueezeSchedule squeeze_schedule(const SkeletalGraph& g, int target, int c_in, double b,
                                        double d) {
  if (target < 0 || target >= SkeletalGraph::kNodes) {
    throw ValidationError("squeeze_schedule: target node out of range");
  }
  if (c_in < 1) throw ValidationError("squeeze_schedule: C_in must be >= 1");
  if (!(b > 0.0 && b <= 1.0) || !(d > 0.0 && d <= 1.0)) {
    throw ValidationError("squeeze_schedule: ratios b and d must lie in (0,1]");
  }
  SqueezeSchedule sched;
  sched.target = target;
  sched.c_in = c_in;
  sched.b = b;
  sched.d = d;
  for (int k = 0; k < SkeletalGraph::kNodes; ++k) {
    int hop = g.dist(target, k);
    if (hop == 0) {
      sched.c_out[k] = c_in;
    } else if (hop <= 2) {
      sched.c_out[k] = std::max(1, static_cast<int>(std::floor(b * c_in)));
    } else {
      sched.c_out[k] = std::max(1, static_cast<int>(std::floor(std::pow(d, hop) * c_in)));
    }
  }
  return sched;
}

}  // namespace spapnet

#endif  // SPAPNET_GRAPH_HPP
