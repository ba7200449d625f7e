#ifndef SPAPNET_MANIFEST_HPP
#define SPAPNET_MANIFEST_HPP

#include <set>
#include <string>
#include <vector>

#include "spapnet/error.hpp"
#include "spapnet/io.hpp"

namespace spapnet {

inline const std::vector<std::string>& tremor_labels() {
  static const std::vector<std::string> labels = {"PT", "ET", "FT", "DT", "NoTremor", "Other"};
  return labels;
}

inline bool is_valid_label(const std::string& label) {
  for (const auto& l : tremor_labels())
    if (l == label) return true;
  return false;
}

struct ManifestRecord {
  std::string video_id;
  std::string participant_id;
  std::string label;
  std::string task_id;
  std::string path;  // keypoint file, relative to the manifest's directory
};

struct DatasetManifest {
  std::vector<ManifestRecord> records;
};

// Class vocabulary for a classification mode. Binary keeps PT as the
// positive class (index 1) against the pooled NonPT class (index 0).
struct ClassMap {
  std::vector<std::string> classes;

  int index_of(const std::string& label) const {
    for (std::size_t i = 0; i < classes.size(); ++i)
      if (classes[i] == label) return static_cast<int>(i);
    throw ValidationError("label '" + label + "' not in class vocabulary");
  }

  int size() const { return static_cast<int>(classes.size()); }
};

inline ClassMap class_map(bool binary) {
  if (binary) return ClassMap{{"NonPT", "PT"}};
  return ClassMap{{"PT", "ET", "FT", "DT", "NoTremor"}};
}

inline const char* kManifestHeader = "video_id,participant_id,label,task_id,path";

inline DatasetManifest parse_manifest_text(const std::string& text, const std::string& origin) {
  auto lines = split_lines(text);
  if (lines.empty()) throw ValidationError("manifest is empty: " + origin);
  if (split_csv_line(lines[0]) != split_csv_line(kManifestHeader)) {
    throw ValidationError("manifest header must be '" + std::string(kManifestHeader) +
                          "' in " + origin);
  }
  DatasetManifest m;
  std::set<std::string> seen;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto fields = split_csv_line(lines[i]);
    if (fields.size() != 5) {
      throw ValidationError("manifest line " + std::to_string(i + 1) + " has " +
                            std::to_string(fields.size()) + " fields, expected 5");
    }
    ManifestRecord r{fields[0], fields[1], fields[2], fields[3], fields[4]};
    if (!is_valid_label(r.label)) {
      throw ValidationError("manifest line " + std::to_string(i + 1) +
                            ": unknown label '" + r.label + "'");
    }
    if (!seen.insert(r.video_id).second) {
      throw ValidationError("duplicate video_id in manifest: " + r.video_id);
    }
    m.records.push_back(std::move(r));
  }
  return m;
}

inline DatasetManifest read_manifest(const fs::path& path) {
  return parse_manifest_text(read_text_file(path), path.string());
}

inline std::string manifest_to_text(const DatasetManifest& m) {
  std::string out = std::string(kManifestHeader) + "\n";
  for (const auto& r : m.records) {
    out += r.video_id + "," + r.participant_id + "," + r.label + "," + r.task_id + "," +
           r.path + "\n";
  }
  return out;
}

inline void write_manifest(const fs::path& path, const DatasetManifest& m) {
  atomic_write_file(path, manifest_to_text(m));
}

struct FilterRules {
  std::set<std::string> drop_tasks;
  bool binary = false;
};

// Drops ambiguous recordings, drops configured task ids, and in binary mode
// pools every non-PT label into NonPT.
inline DatasetManifest filter_manifest(const DatasetManifest& manifest, const FilterRules& rules) {
  DatasetManifest out;
  for (const auto& r : manifest.records) {
    if (!is_valid_label(r.label)) {
      throw ValidationError("unknown label '" + r.label + "' for video " + r.video_id);
    }
    if (r.label == "Other") continue;
    if (rules.drop_tasks.count(r.task_id)) continue;
    ManifestRecord kept = r;
    if (rules.binary && kept.label != "PT") kept.label = "NonPT";
    out.records.push_back(std::move(kept));
  }
  return out;
}

}  // namespace spapnet

#endif  // SPAPNET_MANIFEST_HPP
