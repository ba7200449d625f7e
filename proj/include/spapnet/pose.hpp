#ifndef SPAPNET_POSE_HPP
#define SPAPNET_POSE_HPP

#include <algorithm>
#include <array>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "spapnet/error.hpp"
#include "spapnet/io.hpp"

namespace spapnet {

// One detected landmark: image-plane position plus detector confidence.
// (0,0,0) is the conventional sentinel for an undetected joint.
struct Keypoint {
  double x = 0.0;
  double y = 0.0;
  double c = 0.0;

  bool detected() const { return c > 0.0; }
};

constexpr int kCocoJointCount = 18;

// COCO-18 landmark indices as emitted by the pose detector.
enum CocoJoint : int {
  kNose = 0,
  kNeck = 1,
  kRShoulder = 2,
  kRElbow = 3,
  kRWrist = 4,
  kLShoulder = 5,
  kLElbow = 6,
  kLWrist = 7,
  kRHip = 8,
  kRKnee = 9,
  kRAnkle = 10,
  kLHip = 11,
  kLKnee = 12,
  kLAnkle = 13,
  kREye = 14,
  kLEye = 15,
  kREar = 16,
  kLEar = 17,
};

struct RawFrame {
  int frame_index = 0;
  std::array<Keypoint, kCocoJointCount> joints{};
};

struct PoseSequence {
  std::string video_id;
  std::vector<RawFrame> frames;
};

namespace detail {

inline RawFrame frame_from_flat(const nlohmann::json& arr, int frame_index,
                                const std::string& where) {
  if (!arr.is_array() || arr.size() != 3 * kCocoJointCount) {
    throw ValidationError("format error at " + where + ": expected " +
                          std::to_string(3 * kCocoJointCount) +
                          " keypoint values (18 joints x [x,y,c]), got " +
                          std::to_string(arr.is_array() ? arr.size() : 0));
  }
  RawFrame f;
  f.frame_index = frame_index;
  for (int j = 0; j < kCocoJointCount; ++j) {
    const auto& vx = arr[3 * j];
    const auto& vy = arr[3 * j + 1];
    const auto& vc = arr[3 * j + 2];
    if (!vx.is_number() || !vy.is_number() || !vc.is_number()) {
      throw ValidationError("parse error at " + where + ": keypoint " +
                            std::to_string(j) + " is not numeric");
    }
    f.joints[j] = {vx.get<double>(), vy.get<double>(), vc.get<double>()};
    if (f.joints[j].c < 0.0 || f.joints[j].c > 1.0) {
      throw ValidationError("parse error at " + where + ": joint " +
                            std::to_string(j) + " confidence " +
                            format_double(f.joints[j].c) + " outside [0,1]");
    }
  }
  return f;
}

// Per-video document: a top-level array of frame objects, each carrying
// "frame_index" and a flat 54-number "keypoints" list.
inline PoseSequence parse_video_document(const fs::path& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("parse error in " + path.string() + ": " + e.what());
  }
  if (!doc.is_array()) {
    throw ValidationError("format error in " + path.string() +
                          ": expected a top-level array of frames");
  }
  PoseSequence seq;
  seq.video_id = path.stem().string();
  int prev_index = -1;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& fr = doc[i];
    std::string where = path.filename().string() + " frame " + std::to_string(i);
    if (!fr.is_object() || !fr.contains("frame_index") || !fr.contains("keypoints")) {
      throw ValidationError("format error at " + where +
                            ": frame must be an object with frame_index and keypoints");
    }
    if (!fr["frame_index"].is_number_integer()) {
      throw ValidationError("parse error at " + where + ": frame_index must be an integer");
    }
    int idx = fr["frame_index"].get<int>();
    if (idx < 0 || idx <= prev_index) {
      throw ValidationError("format error at " + where +
                            ": frame_index must be non-negative and strictly increasing");
    }
    prev_index = idx;
    seq.frames.push_back(frame_from_flat(fr["keypoints"], idx, where));
  }
  return seq;
}

// Detector-native variant: a directory of per-frame documents, each with a
// "people" array whose first entry carries "pose_keypoints_2d". An empty
// people list means no detection for that frame (all joints (0,0,0)).
inline PoseSequence parse_frame_directory(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      files.push_back(entry.path());
    }
  }
  if (files.empty()) {
    throw ValidationError("no .json frame files found in directory: " + dir.string());
  }
  std::sort(files.begin(), files.end());
  PoseSequence seq;
  seq.video_id = dir.filename().string();
  for (std::size_t i = 0; i < files.size(); ++i) {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(read_text_file(files[i]));
    } catch (const nlohmann::json::parse_error& e) {
      throw ValidationError("parse error in frame " + std::to_string(i) + " (" +
                            files[i].filename().string() + "): " + e.what());
    }
    std::string where = files[i].filename().string();
    if (!doc.is_object() || !doc.contains("people") || !doc["people"].is_array()) {
      throw ValidationError("format error in " + where + ": expected object with a people array");
    }
    RawFrame f;
    f.frame_index = static_cast<int>(i);
    if (!doc["people"].empty()) {
      const auto& person = doc["people"][0];
      if (!person.contains("pose_keypoints_2d")) {
        throw ValidationError("format error in " + where + ": person lacks pose_keypoints_2d");
      }
      f = frame_from_flat(person["pose_keypoints_2d"], static_cast<int>(i), where);
    }
    seq.frames.push_back(f);
  }
  return seq;
}

}  // namespace detail

// Accepts either a per-video document (regular file) or a directory of
// detector-native per-frame documents.
inline PoseSequence parse_keypoint_file(const fs::path& path) {
  if (!fs::exists(path)) {
    throw ValidationError("keypoint path does not exist: " + path.string());
  }
  if (fs::is_directory(path)) return detail::parse_frame_directory(path);
  return detail::parse_video_document(path);
}

inline void write_keypoint_file(const fs::path& path, const PoseSequence& seq) {
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& f : seq.frames) {
    nlohmann::json kp = nlohmann::json::array();
    for (const auto& j : f.joints) {
      kp.push_back(j.x);
      kp.push_back(j.y);
      kp.push_back(j.c);
    }
    doc.push_back({{"frame_index", f.frame_index}, {"keypoints", std::move(kp)}});
  }
  atomic_write_file(path, doc.dump());
}

}  // namespace spapnet

#endif  // SPAPNET_POSE_HPP
