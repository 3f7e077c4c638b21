#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "insideout/emotion.hpp"
#include "insideout/linalg.hpp"
#include "insideout/rng.hpp"
#include "insideout/transforms.hpp"

namespace insideout {

/// A trainable tensor with its gradient accumulator.
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
  bool trainable = true;
  int stage = -1;  ///< backbone stage, -1 for the head
};

/// Non-trainable state saved with the model (BatchNorm running statistics).
struct Buffer {
  std::string name;
  Matrix value;
};

/// Backbone output for a batch: one (channels x height*width) matrix per sample.
struct FeatureMaps {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<FeatureMatrix> maps;
};

/// Anything that turns a batch into class probabilities. The trained model
/// implements it; tests substitute stubs.
class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual Matrix predict_proba(const ImageBatch& batch) const = 0;
};

/// Adapter around a feature extractor. Implementations must cache whatever
/// `backward` needs during `forward_train`.
class Backbone {
 public:
  virtual ~Backbone() = default;

  virtual std::string name() const = 0;
  virtual int feature_dim() const = 0;
  virtual int num_stages() const = 0;

  /// Training-mode forward (batch statistics, caching for backward).
  virtual FeatureMaps forward_train(const ImageBatch& batch) = 0;
  /// Inference-mode forward; pure.
  virtual FeatureMaps forward_eval(const ImageBatch& batch) const = 0;
  /// Accumulates gradients into trainable parameters from the last
  /// forward_train call.
  virtual void backward(const FeatureMaps& grad_features) = 0;

  virtual std::vector<Parameter*> parameters() = 0;
  virtual std::vector<Buffer*> buffers() = 0;

  std::vector<const Parameter*> parameters() const;
  std::vector<const Buffer*> buffers() const;

  /// Marks every parameter of `stage` trainable or frozen.
  void set_stage_trainable(int stage, bool trainable);
};

/// Stand-in backbone: three conv-BatchNorm-ReLU stages (3->16 4x4/4,
/// 16->32 3x3/2, 32->64 3x3/2). 224x224 input gives 64 x 14 x 14 features.
std::unique_ptr<Backbone> make_tiny_backbone(std::uint64_t seed, bool freeze_bn_stats);

/// Global average pooling -> dropout -> fully connected (feature_dim x 7).
class ClassifierHead {
 public:
  ClassifierHead(int feature_dim, double dropout_rate, std::uint64_t seed);

  Matrix forward_train(const FeatureMaps& features, std::uint64_t dropout_seed);
  Matrix forward_eval(const FeatureMaps& features) const;
  /// Returns the gradient with respect to the backbone features.
  FeatureMaps backward(const Matrix& grad_logits);

  std::vector<Parameter*> parameters() { return {&weight_, &bias_}; }
  std::vector<const Parameter*> parameters() const { return {&weight_, &bias_}; }
  double dropout_rate() const { return dropout_rate_; }
  int feature_dim() const { return feature_dim_; }

 private:
  int feature_dim_;
  double dropout_rate_;
  Parameter weight_;  // feature_dim x 7
  Parameter bias_;    // 1 x 7

  FeatureMaps cached_shape_;
  Matrix cached_dropped_;  // B x feature_dim, after dropout
  Matrix cached_mask_;     // B x feature_dim, scaled keep mask
};

enum class WeightsSource { ImageNetPretrained, RandomInit };
enum class FreezeKind { HeadOnly, FullFineTune, PartialLastK };

struct FreezePolicy {
  FreezeKind kind = FreezeKind::FullFineTune;
  int last_k = 0;  ///< trainable trailing stages for PartialLastK
};

std::string_view to_string(WeightsSource s);
WeightsSource weights_source_from_string(std::string_view text);
std::string to_string(const FreezePolicy& p);
/// Accepts "HeadOnly", "FullFineTune" and "PartialLastK(k)".
FreezePolicy freeze_policy_from_string(std::string_view text);

struct ModelConfig {
  static constexpr int kNumOutputs = static_cast<int>(kNumClasses);

  std::string backbone = "tiny_cnn";
  double dropout_rate = 0.3;
  WeightsSource weights_source = WeightsSource::RandomInit;
  std::filesystem::path pretrained_weights;  ///< backbone parameter blob
  FreezePolicy freeze_policy;
  bool freeze_bn_stats = false;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Backbone + classification head.
class Model : public Predictor {
 public:
  Model(ModelConfig cfg, std::unique_ptr<Backbone> backbone);

  /// B x 7 logits. Training mode applies dropout (seeded by `dropout_seed`)
  /// and caches activations for backward.
  Matrix forward(const ImageBatch& batch, bool training, std::uint64_t dropout_seed = 0);
  Matrix forward_eval(const ImageBatch& batch) const;
  Matrix predict_proba(const ImageBatch& batch) const override;

  /// Backpropagates dLoss/dLogits from the last training forward.
  void backward(const Matrix& grad_logits);
  void zero_grad();

  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;
  std::vector<Buffer*> buffers();
  std::vector<const Buffer*> buffers() const;

  const ModelConfig& config() const { return config_; }
  Backbone& backbone() { return *backbone_; }
  const Backbone& backbone() const { return *backbone_; }
  ClassifierHead& head() { return head_; }

  /// Applies the freeze policy to the backbone stage flags.
  void apply_freeze_policy(const FreezePolicy& policy);

 private:
  void check_batch(const ImageBatch& batch) const;

  ModelConfig config_;
  std::unique_ptr<Backbone> backbone_;
  ClassifierHead head_;
  bool backbone_needs_grad_ = true;
};

/// Builds backbone + fresh head, loads pretrained backbone weights when
/// requested (and `load_pretrained` is set), and applies the freeze policy.
Model build_model(const ModelConfig& cfg, bool load_pretrained = true);

}  // namespace insideout
