#ifndef SPAPNET_REPORT_HPP
#define SPAPNET_REPORT_HPP

#include <algorithm>
#include <string>
#include <vector>

#include "spapnet/infer.hpp"
#include "spapnet/normalize.hpp"

namespace spapnet {

// Mean attention per joint across a set of video verdicts.
inline Vec mean_attention(const std::vector<VideoVerdict>& verdicts) {
  if (verdicts.empty()) throw ValidationError("attention report: no verdicts");
  Vec sum = Vec::Zero(kNodeCount);
  for (const auto& v : verdicts) sum += v.mean_attention;
  return sum / static_cast<double>(verdicts.size());
}

inline std::string attention_table_text(const std::vector<VideoVerdict>& verdicts) {
  std::string out = "video_id";
  for (int j = 1; j <= kNodeCount; ++j) out += ",att_j" + std::to_string(j);
  out += "\n";
  for (const auto& v : verdicts) {
    out += v.video_id;
    for (int j = 0; j < kNodeCount; ++j) out += "," + format_double(v.mean_attention(j));
    out += "\n";
  }
  Vec mean = mean_attention(verdicts);
  out += "mean";
  for (int j = 0; j < kNodeCount; ++j) out += "," + format_double(mean(j));
  out += "\n";
  return out;
}

inline std::string attention_trace_text(const Mat& per_frame) {
  std::string out = "frame";
  for (int j = 1; j <= kNodeCount; ++j) out += ",att_j" + std::to_string(j);
  out += "\n";
  for (Eigen::Index f = 0; f < per_frame.rows(); ++f) {
    out += std::to_string(f);
    for (int j = 0; j < kNodeCount; ++j) out += "," + format_double(per_frame(f, j));
    out += "\n";
  }
  return out;
}

namespace detail {

inline const char* kJointColors[kNodeCount] = {"#d62728", "#ff7f0e", "#bcbd22", "#7f7f7f",
                                               "#17becf", "#1f77b4", "#9467bd"};

}  // namespace detail

// Self-contained SVG bar chart of per-joint weights.
inline std::string svg_attention_bars(const Vec& weights, const std::string& title) {
  const int width = 560, height = 360, margin = 50;
  const double plot_w = width - 2.0 * margin, plot_h = height - 2.0 * margin;
  const double vmax = std::max(weights.maxCoeff() * 1.15, 1e-9);
  std::string svg = "<svg xmlns='http://www.w3.org/2000/svg' width='" + std::to_string(width) +
                    "' height='" + std::to_string(height) + "'>\n";
  svg += "<text x='" + std::to_string(width / 2) + "' y='24' text-anchor='middle' "
         "font-family='sans-serif' font-size='15'>" + title + "</text>\n";
  svg += "<line x1='" + std::to_string(margin) + "' y1='" + std::to_string(height - margin) +
         "' x2='" + std::to_string(width - margin) + "' y2='" +
         std::to_string(height - margin) + "' stroke='black'/>\n";
  const double bar_w = plot_w / kNodeCount * 0.7;
  for (int j = 0; j < kNodeCount; ++j) {
    const double x = margin + plot_w / kNodeCount * (j + 0.15);
    const double h = plot_h * weights(j) / vmax;
    const double y = height - margin - h;
    svg += "<rect x='" + format_double(x) + "' y='" + format_double(y) + "' width='" +
           format_double(bar_w) + "' height='" + format_double(h) + "' fill='" +
           detail::kJointColors[j] + "'/>\n";
    svg += "<text x='" + format_double(x + bar_w / 2) + "' y='" +
           std::to_string(height - margin + 16) +
           "' text-anchor='middle' font-family='sans-serif' font-size='11'>" + node_name(j) +
           "</text>\n";
    char val[32];
    std::snprintf(val, sizeof(val), "%.3f", weights(j));
    svg += "<text x='" + format_double(x + bar_w / 2) + "' y='" + format_double(y - 4) +
           "' text-anchor='middle' font-family='sans-serif' font-size='10'>" + val + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

// Per-frame attention traces as one polyline per joint.
inline std::string svg_attention_traces(const Mat& per_frame, const std::string& title) {
  const int width = 720, height = 360, margin = 50;
  const double plot_w = width - 2.0 * margin, plot_h = height - 2.0 * margin;
  const double vmax = std::max(per_frame.maxCoeff() * 1.1, 1e-9);
  const Eigen::Index frames = per_frame.rows();
  std::string svg = "<svg xmlns='http://www.w3.org/2000/svg' width='" + std::to_string(width) +
                    "' height='" + std::to_string(height) + "'>\n";
  svg += "<text x='" + std::to_string(width / 2) + "' y='24' text-anchor='middle' "
         "font-family='sans-serif' font-size='15'>" + title + "</text>\n";
  svg += "<line x1='" + std::to_string(margin) + "' y1='" + std::to_string(height - margin) +
         "' x2='" + std::to_string(width - margin) + "' y2='" +
         std::to_string(height - margin) + "' stroke='black'/>\n";
  for (int j = 0; j < kNodeCount; ++j) {
    std::string points;
    for (Eigen::Index f = 0; f < frames; ++f) {
      const double x = margin + plot_w * (frames > 1 ? static_cast<double>(f) / (frames - 1) : 0.5);
      const double y = height - margin - plot_h * per_frame(f, j) / vmax;
      points += format_double(x) + "," + format_double(y) + " ";
    }
    svg += "<polyline fill='none' stroke='" + std::string(detail::kJointColors[j]) +
           "' stroke-width='1.2' points='" + points + "'/>\n";
    svg += "<text x='" + std::to_string(width - margin + 4) + "' y='" +
           std::to_string(40 + 16 * j) + "' font-family='sans-serif' font-size='10' fill='" +
           detail::kJointColors[j] + "'>" + node_name(j) + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace spapnet

#endif  // SPAPNET_REPORT_HPP
