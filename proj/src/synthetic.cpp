#include "insideout/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "insideout/error.hpp"
#include "insideout/rng.hpp"

namespace insideout {

namespace {

GrayImage render(std::size_t cls, const SyntheticSpec& spec, Rng& rng) {
  GrayImage img(kFerSide, kFerSide);
  const double base = 40.0 + 28.0 * static_cast<double>(cls);
  const double period = 3.0 + static_cast<double>(cls);
  const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const bool vertical = cls % 2 == 1;
  for (int y = 0; y < kFerSide; ++y) {
    for (int x = 0; x < kFerSide; ++x) {
      const double t = vertical ? x : y;
      const double v = base + spec.texture * std::sin(2.0 * std::numbers::pi * t / period + phase) +
                       spec.noise * rng.normal();
      img.at(y, x) = static_cast<std::int16_t>(std::clamp(std::lround(v), 0L, 255L));
    }
  }
  return img;
}

}  // namespace

LabeledDataset make_synthetic(const SyntheticSpec& spec) {
  if (spec.noise < 0.0 || spec.texture < 0.0) throw InvalidArgument("noise and texture must be >= 0");
  std::vector<Sample> samples;
  const std::size_t longest = *std::max_element(spec.per_class.begin(), spec.per_class.end());
  for (std::size_t i = 0; i < longest; ++i) {
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      if (i >= spec.per_class[c]) continue;
      Rng rng(stream_key(spec.seed, {c, i}));
      const Usage usage = i % 10 == 8 ? Usage::PublicTest : i % 10 == 9 ? Usage::PrivateTest : Usage::Training;
      samples.push_back({render(c, spec, rng), static_cast<Emotion>(c), usage});
    }
  }
  return LabeledDataset(std::move(samples), "synthetic");
}

SyntheticSpec balanced_synthetic(std::size_t per_class, std::uint64_t seed, double noise) {
  SyntheticSpec spec;
  spec.per_class.fill(per_class);
  spec.seed = seed;
  spec.noise = noise;
  return spec;
}

}  // namespace insideout
