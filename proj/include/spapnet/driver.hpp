#ifndef SPAPNET_DRIVER_HPP
#define SPAPNET_DRIVER_HPP

#include <atomic>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "spapnet/checkpoint.hpp"
#include "spapnet/clips.hpp"
#include "spapnet/infer.hpp"
#include "spapnet/manifest.hpp"
#include "spapnet/metrics.hpp"
#include "spapnet/report.hpp"
#include "spapnet/synth.hpp"
#include "spapnet/train.hpp"

namespace spapnet {

// ---------------------------------------------------------------------------
// ingest

struct IngestOptions {
  int clip_len = kDefaultClipLen;
  NormalizeOptions norm;
  FilterRules filter;
  int workers = 1;
};

// Parses, filters, normalizes and segments every video in a manifest.
// Relative keypoint paths resolve against the manifest's directory. Videos
// are processed independently (optionally in parallel); the output order
// always follows the manifest.
inline ClipSet ingest_manifest(const fs::path& manifest_path, const IngestOptions& opts) {
  const DatasetManifest manifest = filter_manifest(read_manifest(manifest_path), opts.filter);
  const fs::path base = manifest_path.parent_path();

  auto ingest_one = [&](const ManifestRecord& rec) {
    fs::path kp = rec.path;
    if (kp.is_relative()) kp = base / kp;
    PoseSequence seq = parse_keypoint_file(kp);
    seq.video_id = rec.video_id;
    return segment_clips(seq, rec.participant_id, rec.label, opts.clip_len, opts.norm);
  };

  std::vector<std::vector<Clip>> per_video(manifest.records.size());
  const int workers = std::max(1, opts.workers);
  if (workers == 1) {
    for (std::size_t i = 0; i < manifest.records.size(); ++i) {
      per_video[i] = ingest_one(manifest.records[i]);
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::future<void>> pool;
    std::mutex error_mutex;
    std::exception_ptr first_error;
    for (int w = 0; w < workers; ++w) {
      pool.push_back(std::async(std::launch::async, [&] {
        for (;;) {
          const std::size_t i = next.fetch_add(1);
          if (i >= manifest.records.size()) return;
          try {
            per_video[i] = ingest_one(manifest.records[i]);
          } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
          }
        }
      }));
    }
    for (auto& f : pool) f.get();
    if (first_error) std::rethrow_exception(first_error);
  }

  ClipSet set;
  for (auto& clips : per_video) {
    for (auto& c : clips) set.clips.push_back(std::move(c));
  }
  return set;
}

// Reconstructs the per-video manifest view of a clip set (used for fold
// planning; videos that produced no clips are necessarily absent).
inline DatasetManifest manifest_from_clips(const ClipSet& clips) {
  DatasetManifest m;
  std::set<std::string> seen;
  for (const auto& c : clips.clips) {
    if (seen.insert(c.video_id).second) {
      m.records.push_back({c.video_id, c.participant_id, c.label, "", ""});
    }
  }
  return m;
}

// ---------------------------------------------------------------------------
// synth

struct SynthDatasetOptions {
  std::vector<std::string> classes = {"PT", "NoTremor"};
  int videos_per_class = 20;
  std::uint64_t seed = 0;
  int frames = 300;
  double fps = 30.0;
  double amplitude_px = 6.0;
  double noise_std_px = 1.0;
  int workers = 1;
};

struct SynthDataset {
  std::vector<SynthVideo> videos;
  DatasetManifest manifest;
};

inline SynthDataset generate_dataset(const SynthDatasetOptions& opts) {
  if (opts.videos_per_class < 1) throw ValidationError("synth: videos-per-class must be >= 1");
  if (opts.classes.empty()) throw ValidationError("synth: at least one class required");
  SynthDataset out;
  int index = 0;
  for (const auto& cls : opts.classes) {
    for (int v = 0; v < opts.videos_per_class; ++v, ++index) {
      SynthParams params;
      params.label = cls;
      params.amplitude_px = opts.amplitude_px;
      params.noise_std_px = opts.noise_std_px;
      params.fps = opts.fps;
      params.duration_frames = opts.frames;
      params.seed = mix_seed(opts.seed, static_cast<std::uint64_t>(index));
      char id[64];
      std::snprintf(id, sizeof(id), "synth_%s_%04d", cls.c_str(), v);
      out.videos.push_back(generate_video(params, id));
      out.manifest.records.push_back(out.videos.back().record);
    }
  }
  return out;
}

// Writes keypoints/<video_id>.json files plus manifest.csv under out_dir.
inline void write_synth_dataset(const fs::path& out_dir, SynthDataset& dataset) {
  fs::create_directories(out_dir / "keypoints");
  for (auto& video : dataset.videos) {
    const std::string rel = "keypoints/" + video.record.video_id + ".json";
    write_keypoint_file(out_dir / rel, video.sequence);
    video.record.path = rel;
  }
  for (std::size_t i = 0; i < dataset.manifest.records.size(); ++i) {
    dataset.manifest.records[i].path = dataset.videos[i].record.path;
  }
  write_manifest(out_dir / "manifest.csv", dataset.manifest);
}

// ---------------------------------------------------------------------------
// cross-validated training

struct TrainRun {
  FoldPlan plan;
  std::vector<FoldResult> folds;
  TrainConfig train_config;
  ModelConfig model_config;
};

inline std::string train_config_to_text(const TrainConfig& c) {
  std::string alpha;
  for (std::size_t i = 0; i < c.focal_alpha.size(); ++i) {
    if (i) alpha += ",";
    alpha += format_double(c.focal_alpha[i]);
  }
  std::string out;
  out += "mode=" + c.mode + "\n";
  out += "lr=" + format_double(c.lr) + "\n";
  out += "lr_decay_factor=" + format_double(c.lr_decay_factor) + "\n";
  out += "lr_floor=" + format_double(c.lr_floor) + "\n";
  out += "batch_size=" + std::to_string(c.batch_size) + "\n";
  out += "max_epochs=" + std::to_string(c.max_epochs) + "\n";
  out += "focal_gamma=" + format_double(c.focal_gamma) + "\n";
  out += "focal_alpha=" + alpha + "\n";
  out += "seed=" + std::to_string(c.seed) + "\n";
  out += "plateau_patience=" + std::to_string(c.plateau_patience) + "\n";
  out += "folds=" + std::to_string(c.folds) + "\n";
  out += std::string("group_by_participant=") + (c.group_by_participant ? "true" : "false") + "\n";
  return out;
}

// Runs the full k-fold loop. When out_dir is non-empty, writes folds.csv,
// train_config.txt, and per-fold checkpoint.json + history.csv.
inline TrainRun run_cv_training(const ClipSet& clips, const TrainConfig& tcfg,
                                const ModelConfig& mcfg, const SkeletalGraph& graph,
                                const fs::path& out_dir = {}, std::ostream* log = nullptr) {
  tcfg.validate();
  if (clips.clips.empty()) throw ValidationError("training requires a non-empty clip set");
  TrainRun run;
  run.train_config = tcfg;
  run.model_config = mcfg;
  run.plan = make_folds(manifest_from_clips(clips), tcfg.folds, tcfg.seed,
                        tcfg.group_by_participant, log);
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    atomic_write_file(out_dir / "folds.csv", fold_plan_to_text(run.plan));
    atomic_write_file(out_dir / "train_config.txt", train_config_to_text(tcfg));
  }
  for (int fold = 0; fold < run.plan.k; ++fold) {
    if (log) *log << "fold " << fold << ": training " << tcfg.max_epochs << " epochs...\n";
    FoldResult res = train_fold(clips, run.plan, fold, tcfg, mcfg, graph);
    if (!out_dir.empty()) {
      const fs::path fold_dir = out_dir / ("fold_" + std::to_string(fold));
      fs::create_directories(fold_dir);
      save_checkpoint(fold_dir / "checkpoint.json", *res.best_model, tcfg.seed);
      atomic_write_file(fold_dir / "history.csv", history_to_text(res.history));
    }
    if (log) {
      *log << "fold " << fold << ": best val loss " << res.best_val_loss << " at epoch "
           << res.best_epoch << "\n";
    }
    run.folds.push_back(std::move(res));
  }
  return run;
}

// ---------------------------------------------------------------------------
// cross-validated evaluation

struct CvEvaluation {
  std::vector<VideoVerdict> verdicts;  // every video exactly once, sorted
  std::map<std::string, std::string> truth;
  std::map<std::string, Mat> per_frame_attention;  // clip frames concatenated
  std::vector<MetricsReport> fold_reports;
  MetricsReport pooled;
  ClassMap classes;
};

// Scores every video with the model of the fold that held it out.
inline CvEvaluation evaluate_cv(const ClipSet& clips, const FoldPlan& plan,
                                const std::vector<SpapNet*>& fold_models, bool binary) {
  if (static_cast<int>(fold_models.size()) != plan.k) {
    throw ValidationError("evaluate_cv: one model per fold required");
  }
  CvEvaluation eval;
  eval.classes = class_map(binary);

  std::map<std::string, std::vector<const Clip*>> by_video;
  for (const auto& c : clips.clips) {
    by_video[c.video_id].push_back(&c);
    eval.truth[c.video_id] = c.label;
  }

  std::vector<std::vector<int>> fold_truth(plan.k), fold_pred(plan.k);
  std::vector<int> all_truth, all_pred;
  for (const auto& [video_id, video_clips] : by_video) {
    int fold = -1;
    for (int f = 0; f < plan.k; ++f) {
      if (plan.in_fold(f, video_id)) {
        fold = f;
        break;
      }
    }
    if (fold < 0) {
      throw ValidationError("evaluate_cv: video " + video_id + " missing from the fold plan");
    }
    std::vector<ClipPrediction> preds;
    Eigen::Index total_frames = 0;
    for (const Clip* c : video_clips) {
      preds.push_back(predict_clip(*c, *fold_models[fold]));
      total_frames += preds.back().per_frame_attention.rows();
    }
    Mat traces(total_frames, kNodeCount);
    Eigen::Index row = 0;
    for (const auto& p : preds) {
      traces.middleRows(row, p.per_frame_attention.rows()) = p.per_frame_attention;
      row += p.per_frame_attention.rows();
    }
    eval.per_frame_attention[video_id] = std::move(traces);
    eval.verdicts.push_back(vote_video(video_id, preds));

    const int t = eval.classes.index_of(eval.truth[video_id]);
    const int p = eval.verdicts.back().voted_class;
    fold_truth[fold].push_back(t);
    fold_pred[fold].push_back(p);
    all_truth.push_back(t);
    all_pred.push_back(p);
  }

  for (int f = 0; f < plan.k; ++f) {
    if (fold_truth[f].empty()) {
      throw ValidationError("evaluate_cv: fold " + std::to_string(f) + " has no videos");
    }
    eval.fold_reports.push_back(
        compute_metrics(fold_truth[f], fold_pred[f], eval.classes.size(), binary));
  }
  eval.pooled = compute_metrics(all_truth, all_pred, eval.classes.size(), binary);
  return eval;
}

// Disk variant: loads the fold plan and per-fold checkpoints from a training
// run directory.
inline CvEvaluation evaluate_run_dir(const fs::path& run_dir, const ClipSet& clips,
                                     const SkeletalGraph& graph, bool binary) {
  FoldPlan plan = fold_plan_from_text(read_text_file(run_dir / "folds.csv"));
  std::vector<LoadedCheckpoint> loaded;
  std::vector<SpapNet*> models;
  for (int f = 0; f < plan.k; ++f) {
    loaded.push_back(
        load_checkpoint(run_dir / ("fold_" + std::to_string(f)) / "checkpoint.json", graph));
    models.push_back(loaded.back().model.get());
  }
  return evaluate_cv(clips, plan, models, binary);
}

inline std::string evaluation_verdicts_text(const CvEvaluation& eval) {
  return verdicts_to_text(eval.verdicts, eval.truth, eval.classes);
}

inline std::string evaluation_metrics_text(const CvEvaluation& eval) {
  return metrics_table_text(eval.fold_reports, eval.pooled);
}

}  // namespace spapnet

#endif  // SPAPNET_DRIVER_HPP
