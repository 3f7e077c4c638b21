#include "insideout/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "insideout/error.hpp"
#include "insideout/rng.hpp"

namespace insideout {

namespace {

constexpr std::size_t kPlane = static_cast<std::size_t>(kInputSide) * kInputSide;

// Planar [0,1] working image at the model resolution.
using Planes = std::vector<double>;

struct Tap {
  int lo = 0;
  int hi = 0;
  double frac = 0.0;
};

std::vector<Tap> bilinear_taps(double origin, double extent, int src_len, int out_len) {
  std::vector<Tap> taps(static_cast<std::size_t>(out_len));
  const double scale = extent / out_len;
  for (int i = 0; i < out_len; ++i) {
    double pos = origin + (i + 0.5) * scale - 0.5;
    pos = std::clamp(pos, 0.0, static_cast<double>(src_len - 1));
    const int lo = static_cast<int>(std::floor(pos));
    taps[static_cast<std::size_t>(i)] = {lo, std::min(lo + 1, src_len - 1), pos - lo};
  }
  return taps;
}

void flip_planes(Planes& img) {
  for (std::size_t row = 0; row < kInputChannels * static_cast<std::size_t>(kInputSide); ++row) {
    auto first = img.begin() + static_cast<std::ptrdiff_t>(row * kInputSide);
    std::reverse(first, first + kInputSide);
  }
}

// Rotation about the image centre, bilinear sampling, zero fill outside.
void rotate_planes(Planes& img, double degrees) {
  const double theta = degrees * std::numbers::pi / 180.0;
  const double cos_t = std::cos(theta);
  const double sin_t = std::sin(theta);
  const double centre = (kInputSide - 1) / 2.0;
  Planes out(img.size(), 0.0);
  for (int y = 0; y < kInputSide; ++y) {
    for (int x = 0; x < kInputSide; ++x) {
      const double dx = x - centre;
      const double dy = y - centre;
      const double sx = cos_t * dx + sin_t * dy + centre;
      const double sy = -sin_t * dx + cos_t * dy + centre;
      const double fx0 = std::floor(sx);
      const double fy0 = std::floor(sy);
      const int x0 = static_cast<int>(fx0);
      const int y0 = static_cast<int>(fy0);
      const double ax = sx - fx0;
      const double ay = sy - fy0;
      for (int c = 0; c < kInputChannels; ++c) {
        const double* plane = img.data() + c * kPlane;
        auto px = [&](int yy, int xx) {
          if (xx < 0 || yy < 0 || xx >= kInputSide || yy >= kInputSide) return 0.0;
          return plane[static_cast<std::size_t>(yy) * kInputSide + xx];
        };
        const double top = px(y0, x0) * (1 - ax) + px(y0, x0 + 1) * ax;
        const double bottom = px(y0 + 1, x0) * (1 - ax) + px(y0 + 1, x0 + 1) * ax;
        out[c * kPlane + static_cast<std::size_t>(y) * kInputSide + x] = top * (1 - ay) + bottom * ay;
      }
    }
  }
  img = std::move(out);
}

Planes luminance(const Planes& img) {
  Planes lum(kPlane);
  for (std::size_t i = 0; i < kPlane; ++i) {
    lum[i] = 0.299 * img[i] + 0.587 * img[kPlane + i] + 0.114 * img[2 * kPlane + i];
  }
  return lum;
}

double jitter_factor(Rng& rng, double amount) {
  const double u = rng.uniform();
  return std::max(0.0, 1.0 - amount) + (1.0 + amount - std::max(0.0, 1.0 - amount)) * u;
}

void color_jitter(Planes& img, const std::array<double, 3>& jitter, Rng& rng) {
  const double brightness = jitter_factor(rng, jitter[0]);
  const double contrast = jitter_factor(rng, jitter[1]);
  const double saturation = jitter_factor(rng, jitter[2]);

  if (brightness != 1.0) {
    for (double& v : img) v = std::clamp(v * brightness, 0.0, 1.0);
  }
  if (contrast != 1.0) {
    const Planes lum = luminance(img);
    double mean = 0.0;
    for (double v : lum) mean += v;
    mean /= static_cast<double>(lum.size());
    for (double& v : img) v = std::clamp((v - mean) * contrast + mean, 0.0, 1.0);
  }
  if (saturation != 1.0) {
    const Planes lum = luminance(img);
    for (int c = 0; c < kInputChannels; ++c) {
      for (std::size_t i = 0; i < kPlane; ++i) {
        double& v = img[c * kPlane + i];
        v = std::clamp(lum[i] + (v - lum[i]) * saturation, 0.0, 1.0);
      }
    }
  }
}

Planes resize_to_unit(const RgbImage& rgb, const CropBox& box) {
  Planes out = resize_bilinear(rgb, box, kInputSide, kInputSide);
  for (double& v : out) v /= 255.0;
  return out;
}

ImageTensor normalize(const Planes& img, Provenance provenance) {
  ImageTensor t;
  t.provenance = provenance;
  t.data.resize(ImageTensor::kSize);
  for (std::size_t c = 0; c < kInputChannels; ++c) {
    for (std::size_t i = 0; i < kPlane; ++i) {
      t.data[c * kPlane + i] =
          static_cast<float>((img[c * kPlane + i] - kImageNetMean[c]) / kImageNetStd[c]);
    }
  }
  return t;
}

}  // namespace

RgbImage to_rgb(const GrayImage& img) {
  RgbImage rgb;
  rgb.height = img.height;
  rgb.width = img.width;
  rgb.data.reserve(img.pixels.size() * 3);
  for (int c = 0; c < 3; ++c) rgb.data.insert(rgb.data.end(), img.pixels.begin(), img.pixels.end());
  return rgb;
}

void AugmentConfig::validate() const {
  const auto [lo, hi] = crop_scale;
  if (!(lo > 0.0 && lo <= hi && hi <= 1.0)) {
    throw InvalidArgument(fmt::format("crop_scale must satisfy 0 < lo <= hi <= 1, got ({}, {})", lo, hi));
  }
  if (!(rotation_degrees >= 0.0)) throw InvalidArgument("rotation_degrees must be >= 0");
  if (!(hflip_prob >= 0.0 && hflip_prob <= 1.0)) throw InvalidArgument("hflip_prob must be in [0,1]");
  for (double j : jitter) {
    if (!(j >= 0.0)) throw InvalidArgument("jitter factors must be >= 0");
  }
}

AugmentConfig AugmentConfig::identity(std::uint64_t seed) {
  AugmentConfig cfg;
  cfg.crop_scale = {1.0, 1.0};
  cfg.rotation_degrees = 0.0;
  cfg.hflip_prob = 0.0;
  cfg.jitter = {0.0, 0.0, 0.0};
  cfg.seed = seed;
  return cfg;
}

std::vector<double> resize_bilinear(const RgbImage& img, const CropBox& box, int out_h, int out_w) {
  if (img.height <= 0 || img.width <= 0) throw InvalidArgument("cannot resize an empty image");
  const auto xs = bilinear_taps(box.x, box.width, img.width, out_w);
  const auto ys = bilinear_taps(box.y, box.height, img.height, out_h);
  std::vector<double> out(static_cast<std::size_t>(3) * out_h * out_w);
  for (int c = 0; c < 3; ++c) {
    for (int y = 0; y < out_h; ++y) {
      const Tap& ty = ys[static_cast<std::size_t>(y)];
      for (int x = 0; x < out_w; ++x) {
        const Tap& tx = xs[static_cast<std::size_t>(x)];
        const double top = img.at(c, ty.lo, tx.lo) * (1.0 - tx.frac) + img.at(c, ty.lo, tx.hi) * tx.frac;
        const double bottom =
            img.at(c, ty.hi, tx.lo) * (1.0 - tx.frac) + img.at(c, ty.hi, tx.hi) * tx.frac;
        out[(static_cast<std::size_t>(c) * out_h + y) * out_w + x] =
            top * (1.0 - ty.frac) + bottom * ty.frac;
      }
    }
  }
  return out;
}

ImageTensor preprocess_eval(const GrayImage& img) {
  const RgbImage rgb = to_rgb(img);
  const CropBox full{0.0, 0.0, static_cast<double>(rgb.width), static_cast<double>(rgb.height)};
  return normalize(resize_to_unit(rgb, full), Provenance::EvalDeterministic);
}

ImageTensor preprocess_train(const GrayImage& img, const AugmentConfig& cfg, AugmentKey key) {
  Rng rng(stream_key(cfg.seed, {key.sample_index, key.epoch}));
  const RgbImage rgb = to_rgb(img);

  // Square-aspect random resized crop.
  const double scale = cfg.crop_scale.first + (cfg.crop_scale.second - cfg.crop_scale.first) * rng.uniform();
  const double side_scale = std::sqrt(scale);
  const double crop_w = side_scale * rgb.width;
  const double crop_h = side_scale * rgb.height;
  const double x0 = (rgb.width - crop_w) * rng.uniform();
  const double y0 = (rgb.height - crop_h) * rng.uniform();
  Planes planes = resize_to_unit(rgb, CropBox{x0, y0, crop_w, crop_h});

  if (rng.uniform() < cfg.hflip_prob) flip_planes(planes);

  const double angle = -cfg.rotation_degrees + 2.0 * cfg.rotation_degrees * rng.uniform();
  if (angle != 0.0) rotate_planes(planes, angle);

  color_jitter(planes, cfg.jitter, rng);

  return normalize(planes, Provenance::TrainAugmented);
}

ImageTensor hflip(const ImageTensor& t) {
  ImageTensor out = t;
  for (std::size_t row = 0; row < kInputChannels * static_cast<std::size_t>(kInputSide); ++row) {
    auto first = out.data.begin() + static_cast<std::ptrdiff_t>(row * kInputSide);
    std::reverse(first, first + kInputSide);
  }
  return out;
}

std::vector<std::uint8_t> to_rgb8(const ImageTensor& t) {
  std::vector<std::uint8_t> out(kPlane * 3);
  for (std::size_t i = 0; i < kPlane; ++i) {
    for (std::size_t c = 0; c < 3; ++c) {
      const double unit = t.data[c * kPlane + i] * kImageNetStd[c] + kImageNetMean[c];
      out[i * 3 + c] = static_cast<std::uint8_t>(std::clamp(std::lround(unit * 255.0), 0L, 255L));
    }
  }
  return out;
}

ImageBatch ImageBatch::from(std::span<const ImageTensor> tensors) {
  ImageBatch batch;
  batch.size = tensors.size();
  batch.data.reserve(batch.size * ImageTensor::kSize);
  for (const ImageTensor& t : tensors) {
    if (t.data.size() != ImageTensor::kSize) {
      throw InvalidArgument(fmt::format("image tensor has {} values, expected {}", t.data.size(),
                                        ImageTensor::kSize));
    }
    batch.data.insert(batch.data.end(), t.data.begin(), t.data.end());
  }
  return batch;
}

}  // namespace insideout
