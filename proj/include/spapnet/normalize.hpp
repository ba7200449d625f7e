#ifndef SPAPNET_NORMALIZE_HPP
#define SPAPNET_NORMALIZE_HPP

#include <array>
#include <optional>

#include "spapnet/pose.hpp"

namespace spapnet {

constexpr int kNodeCount = 7;

// Upper-body node order, node 1..7 = RWrist through LWrist across the Neck.
// Index distance along this chain equals skeletal path distance.
constexpr std::array<CocoJoint, kNodeCount> kNodeJoints = {
    kRWrist, kRElbow, kRShoulder, kNeck, kLShoulder, kLElbow, kLWrist};

inline const char* node_name(int node) {
  static const char* names[kNodeCount] = {"RWrist",    "RElbow", "RShoulder", "Neck",
                                          "LShoulder", "LElbow", "LWrist"};
  return names[node];
}

struct NormalizedFrame {
  // per node: x', y' relative to the global origin, plus raw confidence
  std::array<std::array<double, 3>, kNodeCount> nodes{};
  double origin_x = 0.0;
  double origin_y = 0.0;
};

struct NormalizeOptions {
  double min_origin_conf = 0.1;  // Neck and both hips must clear this
  bool zero_confidence = false;  // drop the confidence input channel
};

// Centers the seven upper-body landmarks on the neck/hip triangle centroid.
// Returns nullopt when the origin joints are unreliable; undetected feature
// joints pass through as (0,0,0) rather than being origin-subtracted.
inline std::optional<NormalizedFrame> normalize_frame(const RawFrame& frame,
                                                      const NormalizeOptions& opts = {}) {
  const Keypoint& neck = frame.joints[kNeck];
  const Keypoint& rhip = frame.joints[kRHip];
  const Keypoint& lhip = frame.joints[kLHip];
  if (neck.c <= opts.min_origin_conf || rhip.c <= opts.min_origin_conf ||
      lhip.c <= opts.min_origin_conf) {
    return std::nullopt;
  }
  NormalizedFrame out;
  out.origin_x = (neck.x + rhip.x + lhip.x) / 3.0;
  out.origin_y = (neck.y + rhip.y + lhip.y) / 3.0;
  for (int n = 0; n < kNodeCount; ++n) {
    const Keypoint& kp = frame.joints[kNodeJoints[n]];
    if (!kp.detected()) {
      out.nodes[n] = {0.0, 0.0, 0.0};
      continue;
    }
    out.nodes[n] = {kp.x - out.origin_x, kp.y - out.origin_y,
                    opts.zero_confidence ? 0.0 : kp.c};
  }
  return out;
}

}  // namespace spapnet

#endif  // SPAPNET_NORMALIZE_HPP
