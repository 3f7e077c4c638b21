#include "insideout/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>

#include <fmt/format.h>

#include "insideout/error.hpp"
#include "insideout/tensor_io.hpp"

namespace insideout {

namespace {

constexpr double kBnEps = 1e-5;
constexpr double kBnMomentum = 0.1;

// Convolution (no bias) + BatchNorm + ReLU.
class ConvStage {
 public:
  ConvStage(int stage, int in_channels, int out_channels, int kernel, int stride, int pad,
            std::uint64_t seed)
      : in_c_(in_channels), out_c_(out_channels), kernel_(kernel), stride_(stride), pad_(pad) {
    const std::string prefix = fmt::format("backbone.stage{}", stage + 1);
    const int fan_in = in_channels * kernel * kernel;
    const double bound = std::sqrt(6.0 / fan_in);
    Rng rng(seed);
    weight_.name = prefix + ".conv.weight";
    weight_.value.resize(out_channels, fan_in);
    for (Eigen::Index i = 0; i < weight_.value.size(); ++i) {
      weight_.value.data()[i] = rng.uniform(-bound, bound);
    }
    gamma_.name = prefix + ".bn.gamma";
    gamma_.value = Matrix::Ones(out_channels, 1);
    beta_.name = prefix + ".bn.beta";
    beta_.value = Matrix::Zero(out_channels, 1);
    for (Parameter* p : {&weight_, &gamma_, &beta_}) {
      p->stage = stage;
      p->grad = Matrix::Zero(p->value.rows(), p->value.cols());
    }
    running_mean_.name = prefix + ".bn.running_mean";
    running_mean_.value = Matrix::Zero(out_channels, 1);
    running_var_.name = prefix + ".bn.running_var";
    running_var_.value = Matrix::Ones(out_channels, 1);
  }

  int out_size(int in) const { return (in + 2 * pad_ - kernel_) / stride_ + 1; }
  int out_channels() const { return out_c_; }

  bool trainable() const { return weight_.trainable || gamma_.trainable || beta_.trainable; }

  FeatureMaps forward_train(const FeatureMaps& in, bool batch_stats, bool cache) {
    check_input(in);
    const int oh = out_size(in.height);
    const int ow = out_size(in.width);
    const std::size_t batch = in.maps.size();

    std::vector<FeatureMatrix> z(batch);
    for (std::size_t i = 0; i < batch; ++i) z[i] = weight_.value * im2col(in.maps[i], in.height, in.width);

    Vector mean, inv_std;
    if (batch_stats) {
      const double count = static_cast<double>(batch) * oh * ow;
      mean = Vector::Zero(out_c_);
      for (const auto& zi : z) mean += zi.rowwise().sum();
      mean /= count;
      Vector var = Vector::Zero(out_c_);
      for (const auto& zi : z) var += (zi.colwise() - mean).array().square().matrix().rowwise().sum();
      var /= count;
      inv_std = (var.array() + kBnEps).rsqrt().matrix();
      const double unbias = count > 1 ? count / (count - 1) : 1.0;
      running_mean_.value = (1 - kBnMomentum) * running_mean_.value + kBnMomentum * mean;
      running_var_.value = (1 - kBnMomentum) * running_var_.value + kBnMomentum * unbias * var;
    } else {
      mean = running_mean_.value.col(0);
      inv_std = (running_var_.value.col(0).array() + kBnEps).rsqrt().matrix();
    }

    FeatureMaps out{out_c_, oh, ow, std::vector<FeatureMatrix>(batch)};
    if (cache) {
      in_cache_ = in;
      xhat_cache_.assign(batch, FeatureMatrix());
      inv_std_ = inv_std;
      used_batch_stats_ = batch_stats;
    }
    for (std::size_t i = 0; i < batch; ++i) {
      FeatureMatrix xhat = (z[i].colwise() - mean).array().colwise() * inv_std.array();
      FeatureMatrix y = (xhat.array().colwise() * gamma_.value.col(0).array()).colwise() +
                        beta_.value.col(0).array();
      out.maps[i] = y.cwiseMax(0.0);
      if (cache) xhat_cache_[i] = std::move(xhat);
    }
    if (cache) out_cache_ = out.maps;
    return out;
  }

  FeatureMaps forward_eval(const FeatureMaps& in) const {
    check_input(in);
    const int oh = out_size(in.height);
    const int ow = out_size(in.width);
    const Vector inv_std = (running_var_.value.col(0).array() + kBnEps).rsqrt().matrix();
    const Vector scale = inv_std.cwiseProduct(gamma_.value.col(0));
    const Vector shift = beta_.value.col(0) - running_mean_.value.col(0).cwiseProduct(scale);
    FeatureMaps out{out_c_, oh, ow, std::vector<FeatureMatrix>(in.maps.size())};
    for (std::size_t i = 0; i < in.maps.size(); ++i) {
      FeatureMatrix z = weight_.value * im2col(in.maps[i], in.height, in.width);
      out.maps[i] = ((z.array().colwise() * scale.array()).colwise() + shift.array()).cwiseMax(0.0);
    }
    return out;
  }

  FeatureMaps backward(const FeatureMaps& grad_out, bool need_input_grad) {
    const std::size_t batch = grad_out.maps.size();
    if (batch != xhat_cache_.size()) throw Error("backward called without a matching training forward");
    const double count = static_cast<double>(batch) * grad_out.height * grad_out.width;

    std::vector<FeatureMatrix> dz(batch);
    Vector sum_dz = Vector::Zero(out_c_);
    Vector sum_dz_xhat = Vector::Zero(out_c_);
    for (std::size_t i = 0; i < batch; ++i) {
      dz[i] = grad_out.maps[i].cwiseProduct((out_cache_[i].array() > 0.0).cast<double>().matrix());
      sum_dz += dz[i].rowwise().sum();
      sum_dz_xhat += dz[i].cwiseProduct(xhat_cache_[i]).rowwise().sum();
    }
    if (gamma_.trainable) gamma_.grad.col(0) += sum_dz_xhat;
    if (beta_.trainable) beta_.grad.col(0) += sum_dz;

    const Vector g_inv = gamma_.value.col(0).cwiseProduct(inv_std_);
    FeatureMaps grad_in{in_c_, in_cache_.height, in_cache_.width,
                        std::vector<FeatureMatrix>(need_input_grad ? batch : 0)};
    for (std::size_t i = 0; i < batch; ++i) {
      FeatureMatrix dconv;
      if (used_batch_stats_) {
        // d/dz of gamma * (z - mean) * inv_std with batch mean/variance.
        FeatureMatrix centred = (dz[i] * count).colwise() - sum_dz;
        centred -= (xhat_cache_[i].array().colwise() * sum_dz_xhat.array()).matrix();
        dconv = centred.array().colwise() * (g_inv.array() / count);
      } else {
        dconv = dz[i].array().colwise() * g_inv.array();
      }
      const FeatureMatrix cols = im2col(in_cache_.maps[i], in_cache_.height, in_cache_.width);
      if (weight_.trainable) weight_.grad.noalias() += dconv * cols.transpose();
      if (need_input_grad) {
        const FeatureMatrix dcols = weight_.value.transpose() * dconv;
        grad_in.maps[i] = col2im(dcols, in_cache_.height, in_cache_.width);
      }
    }
    return grad_in;
  }

  std::vector<Parameter*> parameters() { return {&weight_, &gamma_, &beta_}; }
  std::vector<Buffer*> buffers() { return {&running_mean_, &running_var_}; }

 private:
  void check_input(const FeatureMaps& in) const {
    if (in.channels != in_c_) {
      throw InvalidArgument(fmt::format("{} expects {} input channels, got {}", weight_.name, in_c_, in.channels));
    }
    if (out_size(in.height) < 1 || out_size(in.width) < 1) {
      throw InvalidArgument(fmt::format("{} input {}x{} too small", weight_.name, in.height, in.width));
    }
  }

  FeatureMatrix im2col(const FeatureMatrix& x, int h, int w) const {
    const int oh = out_size(h);
    const int ow = out_size(w);
    FeatureMatrix cols(static_cast<Eigen::Index>(in_c_) * kernel_ * kernel_,
                       static_cast<Eigen::Index>(oh) * ow);
    for (int c = 0; c < in_c_; ++c) {
      for (int ky = 0; ky < kernel_; ++ky) {
        for (int kx = 0; kx < kernel_; ++kx) {
          const Eigen::Index row = (static_cast<Eigen::Index>(c) * kernel_ + ky) * kernel_ + kx;
          double* dst = cols.row(row).data();
          const double* src = x.row(c).data();
          for (int oy = 0; oy < oh; ++oy) {
            const int iy = oy * stride_ - pad_ + ky;
            for (int ox = 0; ox < ow; ++ox) {
              const int ix = ox * stride_ - pad_ + kx;
              dst[oy * ow + ox] = (iy >= 0 && iy < h && ix >= 0 && ix < w) ? src[iy * w + ix] : 0.0;
            }
          }
        }
      }
    }
    return cols;
  }

  FeatureMatrix col2im(const FeatureMatrix& cols, int h, int w) const {
    const int oh = out_size(h);
    const int ow = out_size(w);
    FeatureMatrix x = FeatureMatrix::Zero(in_c_, static_cast<Eigen::Index>(h) * w);
    for (int c = 0; c < in_c_; ++c) {
      double* dst = x.row(c).data();
      for (int ky = 0; ky < kernel_; ++ky) {
        for (int kx = 0; kx < kernel_; ++kx) {
          const Eigen::Index row = (static_cast<Eigen::Index>(c) * kernel_ + ky) * kernel_ + kx;
          const double* src = cols.row(row).data();
          for (int oy = 0; oy < oh; ++oy) {
            const int iy = oy * stride_ - pad_ + ky;
            if (iy < 0 || iy >= h) continue;
            for (int ox = 0; ox < ow; ++ox) {
              const int ix = ox * stride_ - pad_ + kx;
              if (ix >= 0 && ix < w) dst[iy * w + ix] += src[oy * ow + ox];
            }
          }
        }
      }
    }
    return x;
  }

  int in_c_, out_c_, kernel_, stride_, pad_;
  Parameter weight_, gamma_, beta_;
  Buffer running_mean_, running_var_;

  FeatureMaps in_cache_;
  std::vector<FeatureMatrix> xhat_cache_;
  std::vector<FeatureMatrix> out_cache_;
  Vector inv_std_;
  bool used_batch_stats_ = true;
};

FeatureMaps batch_to_features(const ImageBatch& batch) {
  using FloatPlanes = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  FeatureMaps maps{batch.channels, batch.height, batch.width, {}};
  maps.maps.reserve(batch.size);
  const Eigen::Index plane = static_cast<Eigen::Index>(batch.height) * batch.width;
  for (std::size_t i = 0; i < batch.size; ++i) {
    Eigen::Map<const FloatPlanes> view(batch.data.data() + i * batch.sample_stride(), batch.channels, plane);
    maps.maps.emplace_back(view.cast<double>());
  }
  return maps;
}

class TinyConvBackbone final : public Backbone {
 public:
  TinyConvBackbone(std::uint64_t seed, bool freeze_bn_stats) : freeze_bn_stats_(freeze_bn_stats) {
    stages_.emplace_back(0, 3, 16, 4, 4, 0, stream_key(seed, {1}));
    stages_.emplace_back(1, 16, 32, 3, 2, 1, stream_key(seed, {2}));
    stages_.emplace_back(2, 32, 64, 3, 2, 1, stream_key(seed, {3}));
  }

  std::string name() const override { return "tiny_cnn"; }
  int feature_dim() const override { return stages_.back().out_channels(); }
  int num_stages() const override { return static_cast<int>(stages_.size()); }

  FeatureMaps forward_train(const ImageBatch& batch) override {
    first_cached_ = first_trainable_stage();
    FeatureMaps x = batch_to_features(batch);
    for (std::size_t s = 0; s < stages_.size(); ++s) {
      x = stages_[s].forward_train(x, !freeze_bn_stats_, static_cast<int>(s) >= first_cached_);
    }
    return x;
  }

  FeatureMaps forward_eval(const ImageBatch& batch) const override {
    FeatureMaps x = batch_to_features(batch);
    for (const ConvStage& stage : stages_) x = stage.forward_eval(x);
    return x;
  }

  void backward(const FeatureMaps& grad_features) override {
    if (first_cached_ >= num_stages()) return;
    FeatureMaps grad = grad_features;
    for (int s = num_stages() - 1; s >= first_cached_; --s) {
      grad = stages_[static_cast<std::size_t>(s)].backward(grad, s > first_cached_);
    }
  }

  std::vector<Parameter*> parameters() override {
    std::vector<Parameter*> out;
    for (ConvStage& s : stages_) {
      for (Parameter* p : s.parameters()) out.push_back(p);
    }
    return out;
  }

  std::vector<Buffer*> buffers() override {
    std::vector<Buffer*> out;
    for (ConvStage& s : stages_) {
      for (Buffer* b : s.buffers()) out.push_back(b);
    }
    return out;
  }

 private:
  int first_trainable_stage() const {
    for (std::size_t s = 0; s < stages_.size(); ++s) {
      if (stages_[s].trainable()) return static_cast<int>(s);
    }
    return num_stages();
  }

  std::vector<ConvStage> stages_;
  bool freeze_bn_stats_;
  int first_cached_ = 0;
};

void load_backbone_weights(Backbone& backbone, const std::filesystem::path& path) {
  std::map<std::string, Matrix> blob;
  for (NamedTensor& t : read_tensors(path)) blob.emplace(std::move(t.name), std::move(t.value));
  auto assign = [&](const std::string& name, Matrix& target) {
    const auto it = blob.find(name);
    if (it == blob.end()) {
      throw Error(fmt::format("pretrained weights '{}' lack tensor '{}'", path.string(), name));
    }
    if (it->second.rows() != target.rows() || it->second.cols() != target.cols()) {
      throw Error(fmt::format("pretrained tensor '{}' has shape {}x{}, expected {}x{}", name,
                              it->second.rows(), it->second.cols(), target.rows(), target.cols()));
    }
    target = it->second;
  };
  for (Parameter* p : backbone.parameters()) assign(p->name, p->value);
  for (Buffer* b : backbone.buffers()) assign(b->name, b->value);
}

}  // namespace

std::vector<const Parameter*> Backbone::parameters() const {
  auto mut = const_cast<Backbone*>(this)->parameters();
  return {mut.begin(), mut.end()};
}

std::vector<const Buffer*> Backbone::buffers() const {
  auto mut = const_cast<Backbone*>(this)->buffers();
  return {mut.begin(), mut.end()};
}

void Backbone::set_stage_trainable(int stage, bool trainable) {
  for (Parameter* p : parameters()) {
    if (p->stage == stage) p->trainable = trainable;
  }
}

std::unique_ptr<Backbone> make_tiny_backbone(std::uint64_t seed, bool freeze_bn_stats) {
  return std::make_unique<TinyConvBackbone>(seed, freeze_bn_stats);
}

ClassifierHead::ClassifierHead(int feature_dim, double dropout_rate, std::uint64_t seed)
    : feature_dim_(feature_dim), dropout_rate_(dropout_rate) {
  if (feature_dim <= 0) throw InvalidArgument("feature_dim must be positive");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw InvalidArgument(fmt::format("dropout_rate must be in [0,1), got {}", dropout_rate));
  }
  const double bound = 1.0 / std::sqrt(static_cast<double>(feature_dim));
  Rng rng(seed);
  weight_.name = "head.fc.weight";
  weight_.value.resize(feature_dim, ModelConfig::kNumOutputs);
  for (Eigen::Index i = 0; i < weight_.value.size(); ++i) weight_.value.data()[i] = rng.uniform(-bound, bound);
  bias_.name = "head.fc.bias";
  bias_.value = Matrix::Zero(1, ModelConfig::kNumOutputs);
  for (Parameter* p : {&weight_, &bias_}) p->grad = Matrix::Zero(p->value.rows(), p->value.cols());
}

namespace {

Matrix global_average_pool(const FeatureMaps& features, int feature_dim) {
  if (features.channels != feature_dim) {
    throw InvalidArgument(fmt::format("head expects {} feature channels, got {}", feature_dim, features.channels));
  }
  Matrix pooled(static_cast<Eigen::Index>(features.maps.size()), feature_dim);
  for (std::size_t i = 0; i < features.maps.size(); ++i) {
    pooled.row(static_cast<Eigen::Index>(i)) = features.maps[i].rowwise().mean().transpose();
  }
  return pooled;
}

}  // namespace

Matrix ClassifierHead::forward_train(const FeatureMaps& features, std::uint64_t dropout_seed) {
  const Matrix pooled = global_average_pool(features, feature_dim_);
  cached_mask_ = Matrix::Ones(pooled.rows(), pooled.cols());
  if (dropout_rate_ > 0.0) {
    Rng rng(dropout_seed);
    const double keep_scale = 1.0 / (1.0 - dropout_rate_);
    for (Eigen::Index i = 0; i < cached_mask_.size(); ++i) {
      cached_mask_.data()[i] = rng.uniform() < dropout_rate_ ? 0.0 : keep_scale;
    }
  }
  cached_dropped_ = pooled.cwiseProduct(cached_mask_);
  cached_shape_ = FeatureMaps{features.channels, features.height, features.width, {}};
  cached_shape_.maps.resize(features.maps.size());
  Matrix logits = cached_dropped_ * weight_.value;
  logits.rowwise() += bias_.value.row(0);
  return logits;
}

Matrix ClassifierHead::forward_eval(const FeatureMaps& features) const {
  Matrix logits = global_average_pool(features, feature_dim_) * weight_.value;
  logits.rowwise() += bias_.value.row(0);
  return logits;
}

FeatureMaps ClassifierHead::backward(const Matrix& grad_logits) {
  if (grad_logits.rows() != cached_dropped_.rows() || grad_logits.cols() != ModelConfig::kNumOutputs) {
    throw InvalidArgument("head backward: gradient shape does not match the last training forward");
  }
  weight_.grad.noalias() += cached_dropped_.transpose() * grad_logits;
  bias_.grad += grad_logits.colwise().sum();
  const Matrix grad_pooled = (grad_logits * weight_.value.transpose()).cwiseProduct(cached_mask_);

  FeatureMaps grad = cached_shape_;
  const Eigen::Index pixels = static_cast<Eigen::Index>(grad.height) * grad.width;
  for (std::size_t i = 0; i < grad.maps.size(); ++i) {
    const Vector per_channel = grad_pooled.row(static_cast<Eigen::Index>(i)).transpose() / static_cast<double>(pixels);
    grad.maps[i] = per_channel.replicate(1, pixels);
  }
  return grad;
}

std::string_view to_string(WeightsSource s) {
  return s == WeightsSource::ImageNetPretrained ? "ImageNetPretrained" : "RandomInit";
}

WeightsSource weights_source_from_string(std::string_view text) {
  if (text == "ImageNetPretrained") return WeightsSource::ImageNetPretrained;
  if (text == "RandomInit") return WeightsSource::RandomInit;
  throw InvalidArgument(fmt::format("unknown weights source '{}' (ImageNetPretrained|RandomInit)", text));
}

std::string to_string(const FreezePolicy& p) {
  switch (p.kind) {
    case FreezeKind::HeadOnly: return "HeadOnly";
    case FreezeKind::FullFineTune: return "FullFineTune";
    case FreezeKind::PartialLastK: return fmt::format("PartialLastK({})", p.last_k);
  }
  return "FullFineTune";
}

FreezePolicy freeze_policy_from_string(std::string_view text) {
  if (text == "HeadOnly") return {FreezeKind::HeadOnly, 0};
  if (text == "FullFineTune") return {FreezeKind::FullFineTune, 0};
  constexpr std::string_view prefix = "PartialLastK(";
  if (text.starts_with(prefix) && text.ends_with(")")) {
    const std::string_view digits = text.substr(prefix.size(), text.size() - prefix.size() - 1);
    int k = 0;
    const auto [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
    if (ec == std::errc{} && end == digits.data() + digits.size() && k >= 0) {
      return {FreezeKind::PartialLastK, k};
    }
  }
  throw InvalidArgument(
      fmt::format("unknown freeze policy '{}' (HeadOnly|FullFineTune|PartialLastK(k))", text));
}

void ModelConfig::validate() const {
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw InvalidArgument(fmt::format("dropout_rate must be in [0,1), got {}", dropout_rate));
  }
  if (freeze_policy.kind == FreezeKind::PartialLastK && freeze_policy.last_k < 0) {
    throw InvalidArgument("PartialLastK requires k >= 0");
  }
}

Model::Model(ModelConfig cfg, std::unique_ptr<Backbone> backbone)
    : config_(std::move(cfg)),
      backbone_(std::move(backbone)),
      head_(backbone_->feature_dim(), config_.dropout_rate, stream_key(config_.seed, {0x4ead})) {
  apply_freeze_policy(config_.freeze_policy);
}

void Model::apply_freeze_policy(const FreezePolicy& policy) {
  const int stages = backbone_->num_stages();
  int first_trainable = 0;
  switch (policy.kind) {
    case FreezeKind::HeadOnly: first_trainable = stages; break;
    case FreezeKind::FullFineTune: first_trainable = 0; break;
    case FreezeKind::PartialLastK:
      if (policy.last_k > stages) {
        throw InvalidArgument(fmt::format("PartialLastK({}) exceeds the {} backbone stages", policy.last_k, stages));
      }
      first_trainable = stages - policy.last_k;
      break;
  }
  for (int s = 0; s < stages; ++s) backbone_->set_stage_trainable(s, s >= first_trainable);
  backbone_needs_grad_ = first_trainable < stages;
  config_.freeze_policy = policy;
}

void Model::check_batch(const ImageBatch& batch) const {
  const bool ok = batch.size > 0 && batch.channels == kInputChannels && batch.height == kInputSide &&
                  batch.width == kInputSide && batch.data.size() == batch.size * batch.sample_stride();
  if (!ok) {
    throw InvalidArgument(fmt::format(
        "input batch shape mismatch: expected (B>=1, {}, {}, {}), got ({}, {}, {}, {}) with {} values",
        kInputChannels, kInputSide, kInputSide, batch.size, batch.channels, batch.height, batch.width,
        batch.data.size()));
  }
}

Matrix Model::forward(const ImageBatch& batch, bool training, std::uint64_t dropout_seed) {
  check_batch(batch);
  if (!training) return forward_eval(batch);
  const FeatureMaps features = backbone_->forward_train(batch);
  return head_.forward_train(features, dropout_seed);
}

Matrix Model::forward_eval(const ImageBatch& batch) const {
  check_batch(batch);
  return head_.forward_eval(backbone_->forward_eval(batch));
}

Matrix Model::predict_proba(const ImageBatch& batch) const { return softmax(forward_eval(batch)); }

void Model::backward(const Matrix& grad_logits) {
  const FeatureMaps grad_features = head_.backward(grad_logits);
  if (backbone_needs_grad_) backbone_->backward(grad_features);
}

void Model::zero_grad() {
  for (Parameter* p : parameters()) p->grad.setZero();
}

std::vector<Parameter*> Model::parameters() {
  std::vector<Parameter*> out = backbone_->parameters();
  for (Parameter* p : head_.parameters()) out.push_back(p);
  return out;
}

std::vector<const Parameter*> Model::parameters() const {
  auto mut = const_cast<Model*>(this)->parameters();
  return {mut.begin(), mut.end()};
}

std::vector<Buffer*> Model::buffers() { return backbone_->buffers(); }

std::vector<const Buffer*> Model::buffers() const { return std::as_const(*backbone_).buffers(); }

Model build_model(const ModelConfig& cfg, bool load_pretrained) {
  cfg.validate();
  if (cfg.backbone != "tiny_cnn") {
    throw InvalidArgument(fmt::format("unknown backbone '{}' (available: tiny_cnn)", cfg.backbone));
  }
  auto backbone = make_tiny_backbone(stream_key(cfg.seed, {0xbb}), cfg.freeze_bn_stats);
  if (load_pretrained && cfg.weights_source == WeightsSource::ImageNetPretrained) {
    if (cfg.pretrained_weights.empty() || !std::filesystem::exists(cfg.pretrained_weights)) {
      throw Error(fmt::format(
          "pretrained backbone weights not found{}{}. Convert ImageNet-pretrained weights for backbone "
          "'{}' into a tensor blob holding every backbone parameter and BatchNorm buffer (the params.bin "
          "of any checkpoint has this layout) and set model.pretrained_weights to its path, or use "
          "weights_source RandomInit",
          cfg.pretrained_weights.empty() ? "" : " at ", cfg.pretrained_weights.string(), cfg.backbone));
    }
    load_backbone_weights(*backbone, cfg.pretrained_weights);
  }
  return Model(cfg, std::move(backbone));
}

}  // namespace insideout
