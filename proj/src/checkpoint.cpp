#include "insideout/checkpoint.hpp"

#include <map>

#include <fmt/format.h>

#include "insideout/error.hpp"
#include "insideout/json_io.hpp"

namespace insideout {

namespace {

namespace fs = std::filesystem;

json label_map() {
  json labels = json::array();
  for (std::size_t c = 0; c < kNumClasses; ++c) labels.push_back({{"index", c}, {"name", kEmotionNames[c]}});
  return labels;
}

json normalization() {
  return {{"mean", kImageNetMean},
          {"std", kImageNetStd},
          {"input_size", {kInputChannels, kInputSide, kInputSide}},
          {"scale", "divide by 255"},
          {"resize", "bilinear, half-pixel centres"},
          {"grayscale_to_rgb", "replicate"}};
}

// Writes into a sibling temp directory, then swaps it into place.
template <typename Fn>
void write_directory_atomically(const fs::path& dir, Fn&& fill) {
  const fs::path tmp = dir.string() + ".tmp";
  fs::remove_all(tmp);
  fs::create_directories(tmp);
  fill(tmp);
  fs::remove_all(dir);
  fs::rename(tmp, dir);
}

void write_inference_files(const Model& model, const fs::path& dir) {
  const auto state = model_state(model);
  write_tensors(dir / kParamsFile, state);
  write_json_file(dir / kModelConfigFile, json(model.config()));
  write_json_file(dir / kLabelsFile, label_map());
  write_json_file(dir / kNormalizationFile, normalization());
}

}  // namespace

std::vector<NamedTensor> model_state(const Model& model) {
  std::vector<NamedTensor> out;
  for (const Parameter* p : model.parameters()) out.push_back({p->name, p->value});
  for (const Buffer* b : model.buffers()) out.push_back({b->name, b->value});
  return out;
}

void load_model_state(Model& model, std::span<const NamedTensor> state) {
  std::map<std::string, const Matrix*> by_name;
  for (const NamedTensor& t : state) by_name.emplace(t.name, &t.value);
  auto assign = [&](const std::string& name, Matrix& target) {
    const auto it = by_name.find(name);
    if (it == by_name.end()) throw Error(fmt::format("checkpoint lacks tensor '{}'", name));
    const Matrix& src = *it->second;
    if (src.rows() != target.rows() || src.cols() != target.cols()) {
      throw Error(fmt::format("checkpoint tensor '{}' has shape {}x{}, model expects {}x{}", name, src.rows(),
                              src.cols(), target.rows(), target.cols()));
    }
    target = src;
  };
  for (Parameter* p : model.parameters()) assign(p->name, p->value);
  for (Buffer* b : model.buffers()) assign(b->name, b->value);
}

void save_checkpoint(const Model& model, const fs::path& dir) {
  write_directory_atomically(dir, [&](const fs::path& tmp) { write_inference_files(model, tmp); });
}

Model load_checkpoint(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(fmt::format("checkpoint directory '{}' not found", dir.string()));
  if (read_json_file(dir / kLabelsFile) != label_map()) {
    throw Error(fmt::format("checkpoint '{}' label mapping does not match the 7-class FER2013 coding",
                            dir.string()));
  }
  const json norm = read_json_file(dir / kNormalizationFile);
  if (norm.at("mean") != json(kImageNetMean) || norm.at("std") != json(kImageNetStd) ||
      norm.at("input_size") != json({kInputChannels, kInputSide, kInputSide})) {
    throw Error(fmt::format("checkpoint '{}' normalisation constants differ from this build", dir.string()));
  }
  const auto cfg = read_json_file(dir / kModelConfigFile).get<ModelConfig>();
  Model model = build_model(cfg, /*load_pretrained=*/false);
  const auto state = read_tensors(dir / kParamsFile);
  load_model_state(model, state);
  return model;
}

void save_resume_checkpoint(const Model& model, const Adam& adam, const TrainingState& state,
                            std::span<const NamedTensor> best_state, const fs::path& dir) {
  write_directory_atomically(dir, [&](const fs::path& tmp) {
    write_inference_files(model, tmp);
    write_tensors(tmp / kOptimizerFile, adam.state());
    write_tensors(tmp / kBestParamsFile, best_state);
    json js = state;
    js["optimizer_steps"] = adam.steps();
    write_json_file(tmp / kTrainingStateFile, js);
  });
}

ResumePoint load_resume_checkpoint(const fs::path& dir, Model& model, const AdamConfig& adam_cfg) {
  if (!fs::exists(dir / kTrainingStateFile)) {
    throw Error(fmt::format("'{}' is not a resumable checkpoint (no {})", dir.string(), kTrainingStateFile));
  }
  const auto params = read_tensors(dir / kParamsFile);
  load_model_state(model, params);
  const json js = read_json_file(dir / kTrainingStateFile);
  ResumePoint point{Adam(adam_cfg), js.get<TrainingState>(), read_tensors(dir / kBestParamsFile)};
  const auto moments = read_tensors(dir / kOptimizerFile);
  point.adam.load_state(moments, js.at("optimizer_steps").get<std::int64_t>());
  return point;
}

}  // namespace insideout
