#ifndef SPAPNET_SYNTH_HPP
#define SPAPNET_SYNTH_HPP

#include <cmath>
#include <string>

#include "spapnet/manifest.hpp"
#include "spapnet/pose.hpp"
#include "spapnet/rng.hpp"

namespace spapnet {

// Deterministic pose-sequence generator with separable tremor classes, so the
// whole pipeline can be exercised without clinical recordings. A seated
// skeleton gets white positional noise everywhere; tremor classes add
// class-specific oscillations to wrist (full amplitude) and elbow (half):
//   PT - unilateral continuous sinusoid
//   ET - bilateral continuous sinusoid
//   FT - unilateral sinusoid gated by on/off bursts
//   DT - unilateral sinusoid with random-walk phase jitter
//   NoTremor - noise only
struct SynthParams {
  std::string label = "PT";
  double tremor_freq_hz = 0.0;  // 0 -> sampled uniformly in [4,6]
  double amplitude_px = 6.0;
  std::string affected_side;  // "left"/"right"; empty -> sampled
  double fps = 30.0;
  int duration_frames = 300;
  double noise_std_px = 1.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (!is_valid_label(label) || label == "Other") {
      throw ValidationError("synth: label must be one of PT, ET, FT, DT, NoTremor");
    }
    if (fps <= 0.0) throw ValidationError("synth: fps must be > 0");
    if (tremor_freq_hz < 0.0 || tremor_freq_hz >= fps / 2.0) {
      throw ValidationError("synth: tremor frequency must lie in [0, fps/2)");
    }
    if (amplitude_px < 0.0) throw ValidationError("synth: amplitude must be >= 0");
    if (duration_frames < kDefaultClipLen) {
      throw ValidationError("synth: duration must be at least " +
                            std::to_string(kDefaultClipLen) + " frames");
    }
    if (noise_std_px < 0.0) throw ValidationError("synth: noise std must be >= 0");
    if (!affected_side.empty() && affected_side != "left" && affected_side != "right") {
      throw ValidationError("synth: affected_side must be left or right");
    }
  }
};

namespace detail {

// Seated, camera-facing base skeleton in pixels (image y grows downward).
inline const std::array<std::array<double, 2>, kCocoJointCount>& base_skeleton() {
  static const std::array<std::array<double, 2>, kCocoJointCount> base = {{
      {320.0, 120.0},  // Nose
      {320.0, 160.0},  // Neck
      {280.0, 165.0},  // RShoulder
      {263.0, 215.0},  // RElbow
      {258.0, 262.0},  // RWrist
      {360.0, 165.0},  // LShoulder
      {377.0, 215.0},  // LElbow
      {382.0, 262.0},  // LWrist
      {295.0, 290.0},  // RHip
      {290.0, 370.0},  // RKnee
      {286.0, 442.0},  // RAnkle
      {345.0, 290.0},  // LHip
      {350.0, 370.0},  // LKnee
      {354.0, 442.0},  // LAnkle
      {310.0, 112.0},  // REye
      {330.0, 112.0},  // LEye
      {300.0, 118.0},  // REar
      {340.0, 118.0},  // LEar
  }};
  return base;
}

}  // namespace detail

struct SynthVideo {
  PoseSequence sequence;
  ManifestRecord record;  // path left empty; the writer fills it in
  std::string affected_side;
  double tremor_freq_hz = 0.0;
};

inline SynthVideo generate_video(const SynthParams& params, const std::string& video_id) {
  params.validate();
  Rng rng(mix_seed(params.seed, 0x5f9cf7a1u));

  // video-level draws, in fixed order
  double freq = params.tremor_freq_hz > 0.0 ? params.tremor_freq_hz : rng.uniform(4.0, 6.0);
  std::string side = params.affected_side;
  if (side.empty()) side = rng.bernoulli(0.5) ? "right" : "left";
  const double phase_r = rng.uniform(0.0, 2.0 * M_PI);
  const double phase_l = rng.uniform(0.0, 2.0 * M_PI);
  const double burst_offset = rng.uniform(0.0, 2.0);  // seconds

  const bool right = side == "right";
  const int wrist = right ? kRWrist : kLWrist;
  const int elbow = right ? kRElbow : kLElbow;
  const int wrist2 = right ? kLWrist : kRWrist;
  const int elbow2 = right ? kLElbow : kRElbow;

  SynthVideo out;
  out.affected_side = side;
  out.tremor_freq_hz = freq;
  out.sequence.video_id = video_id;

  double jitter_phase = 0.0;  // DT phase random walk
  for (int f = 0; f < params.duration_frames; ++f) {
    const double t = static_cast<double>(f) / params.fps;
    double osc1 = 0.0, osc2 = 0.0;  // affected side / contralateral side
    if (params.label == "PT") {
      osc1 = params.amplitude_px * std::sin(2.0 * M_PI * freq * t + phase_r);
    } else if (params.label == "ET") {
      osc1 = params.amplitude_px * std::sin(2.0 * M_PI * freq * t + phase_r);
      osc2 = params.amplitude_px * std::sin(2.0 * M_PI * freq * t + phase_l);
    } else if (params.label == "FT") {
      const double cycle = std::fmod(t + burst_offset, 2.0);  // 1 s on, 1 s off
      if (cycle < 1.0) osc1 = params.amplitude_px * std::sin(2.0 * M_PI * freq * t + phase_r);
    } else if (params.label == "DT") {
      jitter_phase += rng.normal(0.0, 0.3);
      osc1 = params.amplitude_px * std::sin(2.0 * M_PI * freq * t + phase_r + jitter_phase);
    }

    RawFrame frame;
    frame.frame_index = f;
    for (int j = 0; j < kCocoJointCount; ++j) {
      const auto& base = detail::base_skeleton()[j];
      double nx = rng.normal(0.0, params.noise_std_px);
      double ny = rng.normal(0.0, params.noise_std_px);
      double conf = rng.uniform(0.7, 1.0);
      frame.joints[j] = {base[0] + nx, base[1] + ny, conf};
    }
    frame.joints[wrist].x += osc1;
    frame.joints[elbow].x += 0.5 * osc1;
    frame.joints[wrist2].x += osc2;
    frame.joints[elbow2].x += 0.5 * osc2;
    out.sequence.frames.push_back(frame);
  }

  out.record.video_id = video_id;
  out.record.participant_id = "p_" + video_id;
  out.record.label = params.label;
  out.record.task_id = "synthetic";
  return out;
}

}  // namespace spapnet

#endif  // SPAPNET_SYNTH_HPP
