#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "insideout/dataset.hpp"

namespace insideout {

inline constexpr int kInputChannels = 3;
inline constexpr int kInputSide = 224;

/// ImageNet normalisation constants (RGB, on [0,1] intensities).
inline constexpr std::array<double, 3> kImageNetMean{0.485, 0.456, 0.406};
inline constexpr std::array<double, 3> kImageNetStd{0.229, 0.224, 0.225};

/// Three-channel integer image, planar (channel, row, column).
struct RgbImage {
  int height = 0;
  int width = 0;
  std::vector<std::int16_t> data;

  std::int16_t at(int c, int y, int x) const {
    return data[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
};

/// Replicates the single grayscale channel into R, G and B.
RgbImage to_rgb(const GrayImage& img);

enum class Provenance { TrainAugmented, EvalDeterministic };

/// Normalised model input: 3 x 224 x 224, planar.
struct ImageTensor {
  std::vector<float> data;
  Provenance provenance = Provenance::EvalDeterministic;

  static constexpr std::size_t kSize =
      static_cast<std::size_t>(kInputChannels) * kInputSide * kInputSide;

  float at(int c, int y, int x) const {
    return data[(static_cast<std::size_t>(c) * kInputSide + y) * kInputSide + x];
  }
};

struct AugmentConfig {
  std::pair<double, double> crop_scale{0.8, 1.0};  ///< area fraction range for the crop
  double rotation_degrees = 10.0;
  double hflip_prob = 0.5;
  std::array<double, 3> jitter{0.2, 0.2, 0.2};  ///< brightness, contrast, saturation
  std::uint64_t seed = 0;

  /// Throws InvalidArgument on out-of-range fields.
  void validate() const;

  /// A configuration under which the train path reproduces the eval path.
  static AugmentConfig identity(std::uint64_t seed = 0);
};

/// Per-sample RNG key; augmentation is a pure function of (cfg.seed, key).
struct AugmentKey {
  std::uint64_t sample_index = 0;
  std::uint64_t epoch = 0;
};

/// Deterministic path: RGB replication, bilinear resize to 224x224, scale to
/// [0,1], ImageNet normalisation.
ImageTensor preprocess_eval(const GrayImage& img);

/// Training path: random resized crop, horizontal flip, rotation and colour
/// jitter (in that order) followed by the eval normalisation.
ImageTensor preprocess_train(const GrayImage& img, const AugmentConfig& cfg, AugmentKey key);

/// Mirrors every channel left-to-right.
ImageTensor hflip(const ImageTensor& t);

/// Bilinear resize (half-pixel centres, edge clamp) of a region of `img`.
/// Output is planar double on the source intensity scale.
struct CropBox {
  double x = 0.0;
  double y = 0.0;
  double width = 0.0;
  double height = 0.0;
};
std::vector<double> resize_bilinear(const RgbImage& img, const CropBox& box, int out_h, int out_w);

/// Undoes the normalisation and returns interleaved 8-bit RGB (for PNG export).
std::vector<std::uint8_t> to_rgb8(const ImageTensor& t);

/// A batch of tensors laid out contiguously as B x 3 x 224 x 224.
struct ImageBatch {
  std::size_t size = 0;
  int channels = kInputChannels;
  int height = kInputSide;
  int width = kInputSide;
  std::vector<float> data;

  static ImageBatch from(std::span<const ImageTensor> tensors);

  std::size_t sample_stride() const {
    return static_cast<std::size_t>(channels) * height * width;
  }
  std::span<const float> sample(std::size_t i) const {
    return std::span<const float>(data).subspan(i * sample_stride(), sample_stride());
  }
};

}  // namespace insideout
