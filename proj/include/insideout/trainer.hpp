#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "insideout/dataset.hpp"
#include "insideout/loss.hpp"
#include "insideout/model.hpp"
#include "insideout/optimizer.hpp"
#include "insideout/splitter.hpp"
#include "insideout/transforms.hpp"

namespace insideout {

struct TrainingConfig {
  double initial_lr = 1e-3;
  double min_lr = 1e-5;
  int batch_size = 64;
  int max_epochs = 100;
  int patience = 10;
  double min_delta = 1e-4;
  std::uint64_t seed = 0;
  AdamConfig adam;
  Reduction reduction = Reduction::WeightedMean;
  bool use_class_weights = true;  ///< false trains with unit weights
  bool augment = true;            ///< false feeds eval-path tensors to training

  void validate() const;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double train_acc = 0.0;
  double val_acc = 0.0;
  double lr = 0.0;
  double wall_time = 0.0;  ///< seconds
};

struct TrainingState {
  double best_val_loss = std::numeric_limits<double>::infinity();
  int best_epoch = -1;
  int epochs_since_improvement = 0;
  int epochs_observed = 0;
  bool stopped_early = false;
  std::vector<EpochRecord> history;
};

/// Per-epoch cosine annealing from initial_lr (epoch 0) to min_lr
/// (epoch max_epochs - 1). A single-epoch schedule stays at initial_lr.
double cosine_lr(int epoch, const TrainingConfig& cfg);

/// Records one validation loss. An improvement must beat the best by more
/// than min_delta; stopped_early is set once `patience` epochs pass without one.
TrainingState early_stop_update(TrainingState state, double val_loss, const TrainingConfig& cfg);

struct Prediction {
  std::size_t sample = 0;  ///< index into the dataset
  int label = 0;
  double confidence = 0.0;  ///< max softmax probability
};

struct EvalResult {
  double loss = 0.0;  ///< unweighted mean cross-entropy
  double accuracy = 0.0;
  std::vector<int> truths;
  std::vector<Prediction> predictions;
};

/// Eval-mode pass over `indices` with deterministic transforms. Never
/// mutates the predictor. Throws InvalidArgument on an empty partition.
EvalResult evaluate_pass(const Predictor& predictor, const LabeledDataset& ds,
                         std::span<const std::size_t> indices, int batch_size = 64);

/// Preprocessed batch for the given sample indices.
ImageBatch make_batch(const LabeledDataset& ds, std::span<const std::size_t> indices,
                      const AugmentConfig* augment, std::uint64_t epoch);

struct TrainingOptions {
  /// When set, `best/` is written on every improvement and `last/` after every
  /// epoch (with optimizer state, for resuming).
  std::optional<std::filesystem::path> checkpoint_dir;
  /// A `last/` checkpoint to continue from.
  std::optional<std::filesystem::path> resume_from;
  std::function<void(const EpochRecord&, const TrainingState&)> on_epoch;
};

/// Fine-tunes `model` on split.train, validating on split.val after every
/// epoch. On return the model holds the best-epoch parameters.
TrainingState run_training(const LabeledDataset& ds, const DatasetSplit& split, Model& model,
                           const AugmentConfig& augment, const ClassWeights& weights,
                           const TrainingConfig& cfg, const TrainingOptions& options = {});

}  // namespace insideout
