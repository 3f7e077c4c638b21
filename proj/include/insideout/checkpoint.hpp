#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "insideout/model.hpp"
#include "insideout/optimizer.hpp"
#include "insideout/tensor_io.hpp"
#include "insideout/trainer.hpp"

namespace insideout {

inline constexpr const char* kParamsFile = "params.bin";
inline constexpr const char* kModelConfigFile = "model_config.json";
inline constexpr const char* kLabelsFile = "labels.json";
inline constexpr const char* kNormalizationFile = "normalization.json";
inline constexpr const char* kOptimizerFile = "optimizer.bin";
inline constexpr const char* kTrainingStateFile = "training_state.json";
inline constexpr const char* kBestParamsFile = "best_params.bin";

/// All parameters followed by all buffers.
std::vector<NamedTensor> model_state(const Model& model);

/// Strict load: every parameter and buffer must be present with its shape.
void load_model_state(Model& model, std::span<const NamedTensor> state);

/// Writes an inference-ready checkpoint directory: parameter blob, model
/// config, label mapping and normalisation constants. Replaces `dir` atomically.
void save_checkpoint(const Model& model, const std::filesystem::path& dir);

/// Rebuilds the model from a checkpoint. Throws when the label mapping or
/// normalisation constants differ from the ones this build uses.
Model load_checkpoint(const std::filesystem::path& dir);

/// A checkpoint plus optimizer moments, training state and the best-epoch
/// parameters, sufficient to resume an interrupted run.
void save_resume_checkpoint(const Model& model, const Adam& adam, const TrainingState& state,
                            std::span<const NamedTensor> best_state, const std::filesystem::path& dir);

struct ResumePoint {
  Adam adam;
  TrainingState state;
  std::vector<NamedTensor> best_state;
};

/// Loads parameters into `model` and returns the rest of the resume state.
ResumePoint load_resume_checkpoint(const std::filesystem::path& dir, Model& model, const AdamConfig& adam_cfg);

}  // namespace insideout
