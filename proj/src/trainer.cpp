#include "insideout/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "insideout/checkpoint.hpp"
#include "insideout/error.hpp"
#include "insideout/rng.hpp"

namespace insideout {

namespace {

constexpr std::uint64_t kShuffleStream = 0x5f;
constexpr std::uint64_t kDropoutStream = 0xd0;

std::vector<int> labels_of(const LabeledDataset& ds, std::span<const std::size_t> indices) {
  std::vector<int> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(to_index(ds[i].label));
  return out;
}

}  // namespace

void TrainingConfig::validate() const {
  if (!(initial_lr > 0.0)) throw InvalidArgument("initial_lr must be positive");
  if (!(min_lr >= 0.0 && min_lr < initial_lr)) {
    throw InvalidArgument(fmt::format("min_lr must satisfy 0 <= min_lr < initial_lr, got {}", min_lr));
  }
  if (batch_size < 1) throw InvalidArgument("batch_size must be >= 1");
  if (max_epochs < 1) throw InvalidArgument("max_epochs must be >= 1");
  if (patience < 1 || patience > max_epochs) {
    throw InvalidArgument(fmt::format("patience must be in [1, max_epochs={}], got {}", max_epochs, patience));
  }
  if (!(min_delta >= 0.0)) throw InvalidArgument("min_delta must be >= 0");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0 && adam.beta2 >= 0.0 && adam.beta2 < 1.0 && adam.epsilon > 0.0)) {
    throw InvalidArgument("Adam requires beta1, beta2 in [0,1) and epsilon > 0");
  }
}

double cosine_lr(int epoch, const TrainingConfig& cfg) {
  if (epoch < 0 || epoch >= cfg.max_epochs) {
    throw InvalidArgument(fmt::format("epoch {} outside [0, {})", epoch, cfg.max_epochs));
  }
  if (cfg.max_epochs == 1) return cfg.initial_lr;
  const double c = std::cos(std::numbers::pi * epoch / (cfg.max_epochs - 1));
  const double lr = cfg.initial_lr * (0.5 * (1.0 + c)) + cfg.min_lr * (0.5 * (1.0 - c));
  return std::clamp(lr, cfg.min_lr, cfg.initial_lr);
}

TrainingState early_stop_update(TrainingState state, double val_loss, const TrainingConfig& cfg) {
  const int epoch = state.epochs_observed;
  if (val_loss < state.best_val_loss - cfg.min_delta) {
    state.best_val_loss = val_loss;
    state.best_epoch = epoch;
    state.epochs_since_improvement = 0;
  } else {
    ++state.epochs_since_improvement;
  }
  ++state.epochs_observed;
  if (state.epochs_since_improvement >= cfg.patience) state.stopped_early = true;
  return state;
}

ImageBatch make_batch(const LabeledDataset& ds, std::span<const std::size_t> indices,
                      const AugmentConfig* augment, std::uint64_t epoch) {
  std::vector<ImageTensor> tensors;
  tensors.reserve(indices.size());
  for (std::size_t i : indices) {
    tensors.push_back(augment ? preprocess_train(ds[i].image, *augment, {i, epoch})
                              : preprocess_eval(ds[i].image));
  }
  return ImageBatch::from(tensors);
}

EvalResult evaluate_pass(const Predictor& predictor, const LabeledDataset& ds,
                         std::span<const std::size_t> indices, int batch_size) {
  if (indices.empty()) throw InvalidArgument("cannot evaluate an empty partition");
  if (batch_size < 1) throw InvalidArgument("batch_size must be >= 1");
  EvalResult result;
  result.truths = labels_of(ds, indices);
  result.predictions.reserve(indices.size());
  const ClassWeights unit = ClassWeights::uniform();
  double loss_sum = 0.0;
  std::size_t correct = 0;
  for (std::size_t start = 0; start < indices.size(); start += static_cast<std::size_t>(batch_size)) {
    const std::size_t count = std::min(static_cast<std::size_t>(batch_size), indices.size() - start);
    const auto chunk = indices.subspan(start, count);
    const Matrix probs = predictor.predict_proba(make_batch(ds, chunk, nullptr, 0));
    const std::span<const int> targets(result.truths.data() + start, count);
    loss_sum += weighted_cross_entropy(probs, targets, unit, Reduction::Sum);
    for (std::size_t r = 0; r < count; ++r) {
      const auto row = static_cast<Eigen::Index>(r);
      const int label = argmax_row(probs, row);
      result.predictions.push_back({chunk[r], label, probs(row, label)});
      if (label == targets[r]) ++correct;
    }
  }
  const auto n = static_cast<double>(indices.size());
  result.loss = loss_sum / n;
  result.accuracy = static_cast<double>(correct) / n;
  return result;
}

TrainingState run_training(const LabeledDataset& ds, const DatasetSplit& split, Model& model,
                           const AugmentConfig& augment, const ClassWeights& weights,
                           const TrainingConfig& cfg, const TrainingOptions& options) {
  cfg.validate();
  augment.validate();
  if (split.train.empty()) throw InvalidArgument("train partition is empty");
  if (split.val.empty()) throw InvalidArgument("validation partition is empty");
  const ClassWeights applied = cfg.use_class_weights ? weights : ClassWeights::uniform();

  Adam adam(cfg.adam);
  TrainingState state;
  std::vector<NamedTensor> best_state;
  if (options.resume_from) {
    ResumePoint point = load_resume_checkpoint(*options.resume_from, model, cfg.adam);
    adam = std::move(point.adam);
    state = std::move(point.state);
    best_state = std::move(point.best_state);
  }

  const auto params = model.parameters();
  std::vector<std::size_t> order(split.train.begin(), split.train.end());
  const auto batch_size = static_cast<std::size_t>(cfg.batch_size);

  for (int epoch = state.epochs_observed; epoch < cfg.max_epochs && !state.stopped_early; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    const double lr = cosine_lr(epoch, cfg);
    const auto epoch_key = static_cast<std::uint64_t>(epoch);

    std::copy(split.train.begin(), split.train.end(), order.begin());
    Rng shuffler(stream_key(cfg.seed, {kShuffleStream, epoch_key}));
    shuffler.shuffle(std::span<std::size_t>(order));

    double loss_sum = 0.0;
    std::size_t correct = 0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < order.size(); start += batch_size, ++batch_index) {
      const std::size_t count = std::min(batch_size, order.size() - start);
      const std::span<const std::size_t> chunk(order.data() + start, count);
      const ImageBatch batch = make_batch(ds, chunk, cfg.augment ? &augment : nullptr, epoch_key);
      const std::vector<int> targets = labels_of(ds, chunk);

      model.zero_grad();
      const Matrix logits =
          model.forward(batch, true, stream_key(cfg.seed, {kDropoutStream, epoch_key, batch_index}));
      const LossAndGradient lg = weighted_cross_entropy_from_logits(logits, targets, applied, cfg.reduction);
      if (!std::isfinite(lg.loss) || !lg.grad_logits.allFinite()) {
        throw TrainingError(fmt::format("non-finite loss at epoch {}, batch {} (lr {:.6g}); aborting",
                                        epoch, batch_index, lr));
      }
      model.backward(lg.grad_logits);
      adam.step(params, lr);

      loss_sum += lg.loss * static_cast<double>(count);
      for (std::size_t r = 0; r < count; ++r) {
        if (argmax_row(lg.probs, static_cast<Eigen::Index>(r)) == targets[r]) ++correct;
      }
    }

    const EvalResult val = evaluate_pass(model, ds, split.val, cfg.batch_size);
    if (!std::isfinite(val.loss)) {
      throw TrainingError(fmt::format("non-finite validation loss at epoch {} (lr {:.6g})", epoch, lr));
    }

    EpochRecord record;
    record.epoch = epoch;
    record.train_loss = loss_sum / static_cast<double>(order.size());
    record.train_acc = static_cast<double>(correct) / static_cast<double>(order.size());
    record.val_loss = val.loss;
    record.val_acc = val.accuracy;
    record.lr = lr;
    record.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    state = early_stop_update(std::move(state), val.loss, cfg);
    state.history.push_back(record);

    if (state.best_epoch == epoch) {
      best_state = model_state(model);
      if (options.checkpoint_dir) save_checkpoint(model, *options.checkpoint_dir / "best");
    }
    if (options.checkpoint_dir) {
      save_resume_checkpoint(model, adam, state, best_state, *options.checkpoint_dir / "last");
    }
    if (options.on_epoch) options.on_epoch(record, state);
  }

  if (!best_state.empty()) load_model_state(model, best_state);
  return state;
}

}  // namespace insideout
