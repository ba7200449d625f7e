#ifndef SPAPNET_CHECKPOINT_HPP
#define SPAPNET_CHECKPOINT_HPP

#include <string>

#include <json.hpp>

#include "spapnet/io.hpp"
#include "spapnet/model.hpp"

namespace spapnet {

constexpr int kCheckpointVersion = 1;

namespace detail {

inline nlohmann::json mat_to_json(const Mat& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline void mat_from_json(const nlohmann::json& j, Mat& m, const std::string& name) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != m.rows()) {
    throw ValidationError("checkpoint tensor '" + name + "' has wrong row count");
  }
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const auto& row = j[r];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != m.cols()) {
      throw ValidationError("checkpoint tensor '" + name + "' has wrong column count");
    }
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = row[c].get<double>();
  }
}

inline nlohmann::json config_to_json(const ModelConfig& c) {
  return {{"input_channels", c.input_channels},
          {"block_channels", c.block_channels},
          {"leaky_slope", c.leaky_slope},
          {"dropout_rate", c.dropout_rate},
          {"pcsf_out_channels", c.pcsf_out_channels},
          {"num_classes", c.num_classes},
          {"b", c.b},
          {"d", c.d},
          {"clip_len", c.clip_len}};
}

inline ModelConfig config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.input_channels = j.at("input_channels").get<int>();
  c.block_channels = j.at("block_channels").get<std::vector<int>>();
  c.leaky_slope = j.at("leaky_slope").get<double>();
  c.dropout_rate = j.at("dropout_rate").get<double>();
  c.pcsf_out_channels = j.at("pcsf_out_channels").get<int>();
  c.num_classes = j.at("num_classes").get<int>();
  c.b = j.at("b").get<double>();
  c.d = j.at("d").get<double>();
  c.clip_len = j.at("clip_len").get<int>();
  c.validate();
  return c;
}

}  // namespace detail

// Single-file archive: config echo, every parameter tensor keyed by its
// canonical name, batch-norm running statistics, and the training seed.
inline void save_checkpoint(const fs::path& path, SpapNet& model, std::uint64_t seed) {
  nlohmann::json doc;
  doc["format"] = "spapnet-checkpoint";
  doc["version"] = kCheckpointVersion;
  doc["seed"] = seed;
  doc["config"] = detail::config_to_json(model.config());
  nlohmann::json params = nlohmann::json::object();
  for (const auto& p : model.named_params()) params[p.name] = detail::mat_to_json(*p.value);
  doc["params"] = std::move(params);
  nlohmann::json buffers = nlohmann::json::object();
  for (const auto& b : model.named_buffers()) buffers[b.name] = detail::mat_to_json(*b.value);
  doc["buffers"] = std::move(buffers);
  atomic_write_file(path, doc.dump());
}

struct LoadedCheckpoint {
  ModelConfig config;
  std::uint64_t seed = 0;
  std::unique_ptr<SpapNet> model;
};

inline LoadedCheckpoint load_checkpoint(const fs::path& path, const SkeletalGraph& graph) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("checkpoint parse error in " + path.string() + ": " + e.what());
  }
  if (!doc.is_object() || doc.value("format", "") != "spapnet-checkpoint") {
    throw ValidationError("not a spapnet checkpoint: " + path.string());
  }
  if (doc.value("version", -1) != kCheckpointVersion) {
    throw ValidationError("unsupported checkpoint version in " + path.string());
  }
  LoadedCheckpoint out;
  out.config = detail::config_from_json(doc.at("config"));
  out.seed = doc.value("seed", 0ULL);
  out.model = std::make_unique<SpapNet>(out.config, graph);
  const auto& params = doc.at("params");
  for (auto& p : out.model->named_params()) {
    if (!params.contains(p.name)) {
      throw ValidationError("checkpoint missing tensor '" + p.name + "'");
    }
    detail::mat_from_json(params.at(p.name), *p.value, p.name);
  }
  const auto& buffers = doc.at("buffers");
  for (auto& b : out.model->named_buffers()) {
    if (!buffers.contains(b.name)) {
      throw ValidationError("checkpoint missing buffer '" + b.name + "'");
    }
    detail::mat_from_json(buffers.at(b.name), *b.value, b.name);
  }
  return out;
}

}  // namespace spapnet

#endif  // SPAPNET_CHECKPOINT_HPP
