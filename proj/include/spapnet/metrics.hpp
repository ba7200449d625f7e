#ifndef SPAPNET_METRICS_HPP
#define SPAPNET_METRICS_HPP

#include <cmath>
#include <string>
#include <vector>

#include "spapnet/io.hpp"
#include "spapnet/manifest.hpp"

namespace spapnet {

struct ClassMetrics {
  long tp = 0, fn = 0, tn = 0, fp = 0;
  double se = 0.0, sp = 0.0, f1 = 0.0;
  bool defined = true;  // false when the class is absent from the truth set
};

struct MetricsReport {
  double ac = 0.0;  // balanced accuracy: mean per-class recall
  double se = 0.0;  // binary: positive-class recall; multiclass: macro mean
  double sp = 0.0;
  double f1 = 0.0;
  std::vector<ClassMetrics> per_class;  // one-vs-rest (multiclass mode)
  std::vector<std::string> warnings;
};

// Confusion-matrix metrics. Binary mode treats class 1 as positive with
// AC = (SE+SP)/2; multiclass computes one-vs-rest per class, macro-averages
// over defined classes, and takes AC as the mean per-class recall. Classes
// absent from the truth set are flagged undefined and excluded with a
// warning rather than imputed.
inline MetricsReport compute_metrics(const std::vector<int>& truth, const std::vector<int>& pred,
                                     int num_classes, bool binary_mode) {
  if (truth.size() != pred.size()) {
    throw ValidationError("compute_metrics: truth/prediction size mismatch");
  }
  if (truth.empty()) throw ValidationError("compute_metrics: empty input");
  MetricsReport report;

  if (binary_mode) {
    if (num_classes != 2) throw ValidationError("compute_metrics: binary mode needs 2 classes");
    ClassMetrics m;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      const bool t = truth[i] == 1, p = pred[i] == 1;
      if (t && p) ++m.tp;
      if (t && !p) ++m.fn;
      if (!t && !p) ++m.tn;
      if (!t && p) ++m.fp;
    }
    const long pos = m.tp + m.fn, neg = m.tn + m.fp, f1_den = 2 * m.tp + m.fp + m.fn;
    if (pos == 0 || neg == 0) {
      m.defined = false;
      report.warnings.push_back("binary metrics undefined: one class absent from truth");
    }
    m.se = pos > 0 ? static_cast<double>(m.tp) / pos : 0.0;
    m.sp = neg > 0 ? static_cast<double>(m.tn) / neg : 0.0;
    m.f1 = f1_den > 0 ? 2.0 * m.tp / static_cast<double>(f1_den) : 0.0;
    report.se = m.se;
    report.sp = m.sp;
    report.f1 = m.f1;
    report.ac = 0.5 * (m.se + m.sp);
    report.per_class = {m};
    return report;
  }

  report.per_class.resize(num_classes);
  double recall_sum = 0.0;
  int present = 0;
  double se_sum = 0.0, sp_sum = 0.0, f1_sum = 0.0;
  int defined = 0;
  for (int c = 0; c < num_classes; ++c) {
    ClassMetrics& m = report.per_class[c];
    for (std::size_t i = 0; i < truth.size(); ++i) {
      const bool t = truth[i] == c, p = pred[i] == c;
      if (t && p) ++m.tp;
      if (t && !p) ++m.fn;
      if (!t && !p) ++m.tn;
      if (!t && p) ++m.fp;
    }
    const long pos = m.tp + m.fn, neg = m.tn + m.fp, f1_den = 2 * m.tp + m.fp + m.fn;
    if (pos == 0) {
      m.defined = false;
      report.warnings.push_back("class " + std::to_string(c) +
                                " absent from truth; excluded from macro averages");
      continue;
    }
    m.se = static_cast<double>(m.tp) / pos;
    m.sp = neg > 0 ? static_cast<double>(m.tn) / neg : 0.0;
    m.f1 = f1_den > 0 ? 2.0 * m.tp / static_cast<double>(f1_den) : 0.0;
    recall_sum += m.se;
    ++present;
    se_sum += m.se;
    sp_sum += m.sp;
    f1_sum += m.f1;
    ++defined;
  }
  report.ac = present > 0 ? recall_sum / present : 0.0;
  if (defined > 0) {
    report.se = se_sum / defined;
    report.sp = sp_sum / defined;
    report.f1 = f1_sum / defined;
  }
  return report;
}

struct Aggregate {
  double mean = 0.0;
  double stddev = 0.0;  // population
};

inline Aggregate aggregate(const std::vector<double>& values) {
  Aggregate a;
  if (values.empty()) return a;
  double sum = 0.0;
  for (double v : values) sum += v;
  a.mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - a.mean) * (v - a.mean);
  a.stddev = std::sqrt(sq / static_cast<double>(values.size()));
  return a;
}

// Fold-by-fold table with mean/std rows and a pooled row over every verdict.
inline std::string metrics_table_text(const std::vector<MetricsReport>& folds,
                                      const MetricsReport& pooled) {
  std::string out = "row,ac,se,sp,f1\n";
  std::vector<double> ac, se, sp, f1;
  for (std::size_t i = 0; i < folds.size(); ++i) {
    const auto& r = folds[i];
    out += "fold" + std::to_string(i) + "," + format_double(r.ac) + "," + format_double(r.se) +
           "," + format_double(r.sp) + "," + format_double(r.f1) + "\n";
    ac.push_back(r.ac);
    se.push_back(r.se);
    sp.push_back(r.sp);
    f1.push_back(r.f1);
  }
  out += "mean," + format_double(aggregate(ac).mean) + "," + format_double(aggregate(se).mean) +
         "," + format_double(aggregate(sp).mean) + "," + format_double(aggregate(f1).mean) + "\n";
  out += "std," + format_double(aggregate(ac).stddev) + "," + format_double(aggregate(se).stddev) +
         "," + format_double(aggregate(sp).stddev) + "," + format_double(aggregate(f1).stddev) +
         "\n";
  out += "pooled," + format_double(pooled.ac) + "," + format_double(pooled.se) + "," +
         format_double(pooled.sp) + "," + format_double(pooled.f1) + "\n";
  return out;
}

}  // namespace spapnet

#endif  // SPAPNET_METRICS_HPP
