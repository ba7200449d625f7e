#ifndef SPAPNET_CLIPS_HPP
#define SPAPNET_CLIPS_HPP

#include <cstdint>
#include <cstring>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "spapnet/io.hpp"
#include "spapnet/normalize.hpp"
#include "spapnet/pose.hpp"

namespace spapnet {

constexpr int kClipChannels = 3;
constexpr int kDefaultClipLen = 100;

// A fixed-length training sample cut from one video. Data is row-major
// (frame, node, channel) with channels (x', y', c).
struct Clip {
  std::string clip_id;
  std::string video_id;
  std::string participant_id;
  std::string label;
  int clip_len = 0;
  std::vector<double> data;  // clip_len * kNodeCount * kClipChannels

  double& at(int frame, int node, int ch) {
    return data[(static_cast<std::size_t>(frame) * kNodeCount + node) * kClipChannels + ch];
  }
  double at(int frame, int node, int ch) const {
    return data[(static_cast<std::size_t>(frame) * kNodeCount + node) * kClipChannels + ch];
  }
};

struct ClipSet {
  std::vector<Clip> clips;
};

// Splits the maximal runs of valid frames into non-overlapping clips of
// exactly clip_len frames; trailing remainders are discarded.
inline std::vector<Clip> segment_clips(const std::vector<std::optional<NormalizedFrame>>& frames,
                                       const std::string& video_id,
                                       const std::string& participant_id,
                                       const std::string& label, int clip_len) {
  if (clip_len < 1) throw ValidationError("clip_len must be >= 1");
  std::vector<Clip> clips;
  std::size_t run_start = 0;
  int clip_counter = 0;
  auto flush_run = [&](std::size_t begin, std::size_t end) {
    std::size_t run_len = end - begin;
    std::size_t n_clips = run_len / static_cast<std::size_t>(clip_len);
    for (std::size_t ci = 0; ci < n_clips; ++ci) {
      Clip clip;
      clip.video_id = video_id;
      clip.participant_id = participant_id;
      clip.label = label;
      clip.clip_len = clip_len;
      clip.clip_id = video_id + "_c" + std::to_string(clip_counter++);
      clip.data.resize(static_cast<std::size_t>(clip_len) * kNodeCount * kClipChannels);
      for (int f = 0; f < clip_len; ++f) {
        const NormalizedFrame& nf = *frames[begin + ci * clip_len + f];
        for (int n = 0; n < kNodeCount; ++n)
          for (int ch = 0; ch < kClipChannels; ++ch) clip.at(f, n, ch) = nf.nodes[n][ch];
      }
      clips.push_back(std::move(clip));
    }
  };
  for (std::size_t i = 0; i <= frames.size(); ++i) {
    bool valid = i < frames.size() && frames[i].has_value();
    if (!valid) {
      flush_run(run_start, i);
      run_start = i + 1;
    }
  }
  return clips;
}

inline std::vector<Clip> segment_clips(const PoseSequence& seq, const std::string& participant_id,
                                       const std::string& label, int clip_len,
                                       const NormalizeOptions& opts = {}) {
  std::vector<std::optional<NormalizedFrame>> frames;
  frames.reserve(seq.frames.size());
  for (const auto& f : seq.frames) frames.push_back(normalize_frame(f, opts));
  return segment_clips(frames, seq.video_id, participant_id, label, clip_len);
}

// --- clip store -------------------------------------------------------------
//
// Text record (canonical, diffable): a small header followed by one line per
// frame holding 21 numbers (7 nodes x [x', y', c]) at full double precision.
// Binary cache: 16-byte header (magic "SPCL", u32 version, u32 clip_len,
// u16 nodes, u16 channels) followed by little-endian float32 data.

inline std::string clip_to_text(const Clip& clip) {
  std::ostringstream out;
  out << "spapnet-clip v1\n";
  out << "clip_id " << clip.clip_id << "\n";
  out << "video_id " << clip.video_id << "\n";
  out << "participant_id " << clip.participant_id << "\n";
  out << "label " << clip.label << "\n";
  out << "shape " << clip.clip_len << " " << kNodeCount << " " << kClipChannels << "\n";
  for (int f = 0; f < clip.clip_len; ++f) {
    for (int n = 0; n < kNodeCount; ++n) {
      for (int ch = 0; ch < kClipChannels; ++ch) {
        if (n != 0 || ch != 0) out << " ";
        out << format_double(clip.at(f, n, ch));
      }
    }
    out << "\n";
  }
  return out.str();
}

inline Clip clip_from_text(const std::string& text, const std::string& origin) {
  auto lines = split_lines(text);
  if (lines.size() < 6 || lines[0] != "spapnet-clip v1") {
    throw ValidationError("not a spapnet clip record: " + origin);
  }
  auto field = [&](std::size_t idx, const std::string& key) {
    std::istringstream ss(lines[idx]);
    std::string k, v;
    ss >> k;
    std::getline(ss, v);
    if (k != key) throw ValidationError("clip record " + origin + ": expected '" + key + "'");
    if (!v.empty() && v[0] == ' ') v.erase(0, 1);
    return v;
  };
  Clip clip;
  clip.clip_id = field(1, "clip_id");
  clip.video_id = field(2, "video_id");
  clip.participant_id = field(3, "participant_id");
  clip.label = field(4, "label");
  {
    std::istringstream ss(lines[5]);
    std::string k;
    int nodes = 0, channels = 0;
    ss >> k >> clip.clip_len >> nodes >> channels;
    if (k != "shape" || nodes != kNodeCount || channels != kClipChannels || clip.clip_len < 1) {
      throw ValidationError("clip record " + origin + ": bad shape line");
    }
  }
  if (lines.size() < 6 + static_cast<std::size_t>(clip.clip_len)) {
    throw ValidationError("clip record " + origin + ": truncated frame data");
  }
  clip.data.resize(static_cast<std::size_t>(clip.clip_len) * kNodeCount * kClipChannels);
  for (int f = 0; f < clip.clip_len; ++f) {
    std::istringstream ss(lines[6 + f]);
    for (int n = 0; n < kNodeCount; ++n) {
      for (int ch = 0; ch < kClipChannels; ++ch) {
        if (!(ss >> clip.at(f, n, ch))) {
          throw ValidationError("clip record " + origin + ": bad frame line " +
                                std::to_string(f));
        }
      }
    }
  }
  return clip;
}

constexpr char kClipBinaryMagic[4] = {'S', 'P', 'C', 'L'};
constexpr std::uint32_t kClipBinaryVersion = 1;

inline std::string clip_to_binary(const Clip& clip) {
  std::string out;
  auto put_u32 = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  };
  auto put_u16 = [&](std::uint16_t v) {
    for (int i = 0; i < 2; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  };
  out.append(kClipBinaryMagic, 4);
  put_u32(kClipBinaryVersion);
  put_u32(static_cast<std::uint32_t>(clip.clip_len));
  put_u16(static_cast<std::uint16_t>(kNodeCount));
  put_u16(static_cast<std::uint16_t>(kClipChannels));
  for (double v : clip.data) {
    float f = static_cast<float>(v);
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    put_u32(bits);
  }
  return out;
}

inline Clip clip_from_binary(const std::string& bytes, const std::string& origin) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kClipBinaryMagic, 4) != 0) {
    throw ValidationError("not a spapnet binary clip: " + origin);
  }
  auto get_u32 = [&](std::size_t off) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[off + i])) << (8 * i);
    return v;
  };
  auto get_u16 = [&](std::size_t off) {
    std::uint16_t v = 0;
    for (int i = 0; i < 2; ++i)
      v |= static_cast<std::uint16_t>(static_cast<unsigned char>(bytes[off + i])) << (8 * i);
    return v;
  };
  if (get_u32(4) != kClipBinaryVersion) {
    throw ValidationError("unsupported binary clip version in " + origin);
  }
  Clip clip;
  clip.clip_len = static_cast<int>(get_u32(8));
  if (get_u16(12) != kNodeCount || get_u16(14) != kClipChannels || clip.clip_len < 1) {
    throw ValidationError("bad binary clip header in " + origin);
  }
  std::size_t count = static_cast<std::size_t>(clip.clip_len) * kNodeCount * kClipChannels;
  if (bytes.size() != 16 + 4 * count) {
    throw ValidationError("binary clip size mismatch in " + origin);
  }
  clip.data.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint32_t bits = get_u32(16 + 4 * i);
    float f;
    std::memcpy(&f, &bits, 4);
    clip.data[i] = static_cast<double>(f);
  }
  return clip;
}

inline const char* kClipIndexHeader = "clip_id,video_id,participant_id,label,file";

inline void write_clip_store(const fs::path& dir, const ClipSet& set, bool binary_cache = false) {
  fs::create_directories(dir);
  std::string index = std::string(kClipIndexHeader) + "\n";
  for (const auto& clip : set.clips) {
    std::string file = clip.clip_id + ".txt";
    atomic_write_file(dir / file, clip_to_text(clip));
    if (binary_cache) atomic_write_file(dir / (clip.clip_id + ".clipbin"), clip_to_binary(clip));
    index += clip.clip_id + "," + clip.video_id + "," + clip.participant_id + "," + clip.label +
             "," + file + "\n";
  }
  atomic_write_file(dir / "clips.csv", index);
}

inline ClipSet load_clip_store(const fs::path& dir, bool prefer_binary = false) {
  auto lines = split_lines(read_text_file(dir / "clips.csv"));
  if (lines.empty() || split_csv_line(lines[0]) != split_csv_line(kClipIndexHeader)) {
    throw ValidationError("bad clip index header in " + (dir / "clips.csv").string());
  }
  ClipSet set;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto fields = split_csv_line(lines[i]);
    if (fields.size() != 5) {
      throw ValidationError("bad clip index line " + std::to_string(i + 1));
    }
    fs::path text_path = dir / fields[4];
    fs::path bin_path = dir / (fields[0] + ".clipbin");
    Clip clip;
    if (prefer_binary && fs::exists(bin_path)) {
      clip = clip_from_binary(read_text_file(bin_path), bin_path.string());
      clip.clip_id = fields[0];
      clip.video_id = fields[1];
      clip.participant_id = fields[2];
      clip.label = fields[3];
    } else {
      clip = clip_from_text(read_text_file(text_path), text_path.string());
    }
    set.clips.push_back(std::move(clip));
  }
  return set;
}

}  // namespace spapnet

#endif  // SPAPNET_CLIPS_HPP
