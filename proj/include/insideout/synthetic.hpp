#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

#include "insideout/dataset.hpp"

namespace insideout {

/// Procedural 48x48 stand-in data. Class c is a flat field at
/// intensity 40 + 28c with a class-specific stripe texture, plus Gaussian
/// pixel noise. Small noise gives separable classes; large noise overlaps them.
struct SyntheticSpec {
  std::array<std::size_t, kNumClasses> per_class{};
  double noise = 8.0;        ///< pixel noise standard deviation
  double texture = 12.0;     ///< stripe amplitude
  std::uint64_t seed = 0;
};

/// Within each class, every tenth sample goes to PublicTest and the one after
/// it to PrivateTest; the rest are Training. Samples are interleaved by class.
LabeledDataset make_synthetic(const SyntheticSpec& spec);

SyntheticSpec balanced_synthetic(std::size_t per_class, std::uint64_t seed, double noise = 8.0);

}  // namespace insideout
