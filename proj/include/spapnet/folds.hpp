#ifndef SPAPNET_FOLDS_HPP
#define SPAPNET_FOLDS_HPP

#include <algorithm>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "spapnet/manifest.hpp"
#include "spapnet/rng.hpp"

namespace spapnet {

struct FoldPlan {
  int k = 0;
  std::vector<std::vector<std::string>> val_videos;  // per fold

  bool in_fold(int fold, const std::string& video_id) const {
    const auto& v = val_videos[fold];
    return std::find(v.begin(), v.end(), video_id) != v.end();
  }
};

// Grouped k-fold split: every clip of one video (or one participant, with
// the stricter flag) lands in exactly one fold. Stratified by label via
// per-class round-robin; classes with fewer units than folds trigger a
// warning and a plain grouped split.
inline FoldPlan make_folds(const DatasetManifest& manifest, int k, std::uint64_t seed,
                           bool group_by_participant = false, std::ostream* warn = nullptr) {
  if (k < 2) throw ValidationError("make_folds: k must be >= 2");

  // unit -> (label of first record, member video ids)
  std::map<std::string, std::pair<std::string, std::vector<std::string>>> units;
  for (const auto& r : manifest.records) {
    const std::string& unit = group_by_participant ? r.participant_id : r.video_id;
    auto& entry = units[unit];
    if (entry.second.empty()) entry.first = r.label;
    entry.second.push_back(r.video_id);
  }
  if (static_cast<int>(units.size()) < k) {
    throw ValidationError("make_folds: fewer groups (" + std::to_string(units.size()) +
                          ") than folds (" + std::to_string(k) + ")");
  }

  std::map<std::string, std::vector<std::string>> by_label;  // label -> unit ids (sorted map)
  for (const auto& [unit, info] : units) by_label[info.first].push_back(unit);

  bool stratify = true;
  for (const auto& [label, ids] : by_label) {
    if (static_cast<int>(ids.size()) < k) {
      stratify = false;
      if (warn) {
        *warn << "warning: class '" << label << "' has " << ids.size() << " groups (< " << k
              << " folds); falling back to a grouped-only split\n";
      }
    }
  }

  FoldPlan plan;
  plan.k = k;
  plan.val_videos.assign(k, {});
  Rng rng(mix_seed(seed, 0xf01d5u));
  auto assign = [&](std::vector<std::string>& ids, int start_fold) {
    rng.shuffle(ids);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      int fold = (start_fold + static_cast<int>(i)) % k;
      for (const auto& vid : units[ids[i]].second) plan.val_videos[fold].push_back(vid);
    }
    return (start_fold + static_cast<int>(ids.size())) % k;
  };

  if (stratify) {
    int start = 0;
    for (auto& [label, ids] : by_label) start = assign(ids, start);
  } else {
    std::vector<std::string> all;
    for (const auto& [unit, info] : units) all.push_back(unit);
    assign(all, 0);
  }
  for (auto& fold : plan.val_videos) std::sort(fold.begin(), fold.end());
  return plan;
}

inline std::string fold_plan_to_text(const FoldPlan& plan) {
  std::string out = "fold,video_id\n";
  for (int f = 0; f < plan.k; ++f) {
    for (const auto& vid : plan.val_videos[f]) out += std::to_string(f) + "," + vid + "\n";
  }
  return out;
}

inline FoldPlan fold_plan_from_text(const std::string& text) {
  auto lines = split_lines(text);
  if (lines.empty() || lines[0] != "fold,video_id") {
    throw ValidationError("bad fold plan header");
  }
  FoldPlan plan;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto fields = split_csv_line(lines[i]);
    if (fields.size() != 2) throw ValidationError("bad fold plan line " + std::to_string(i + 1));
    int fold = std::stoi(fields[0]);
    if (fold < 0) throw ValidationError("bad fold id in fold plan");
    if (fold >= plan.k) {
      plan.k = fold + 1;
      plan.val_videos.resize(plan.k);
    }
    plan.val_videos[fold].push_back(fields[1]);
  }
  return plan;
}

}  // namespace spapnet

#endif  // SPAPNET_FOLDS_HPP
