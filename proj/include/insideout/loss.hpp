#pragma once

#include <array>
#include <span>
#include <string_view>
#include <vector>

#include "insideout/dataset.hpp"
#include "insideout/linalg.hpp"

namespace insideout {

/// Per-class loss multipliers, normalised so that the frequency-weighted
/// mean over the source histogram is 1.
struct ClassWeights {
  std::array<double, kNumClasses> w{};
  ClassHistogram source_histogram;

  /// All weights 1 (plain cross-entropy).
  static ClassWeights uniform();
};

/// w[c] = N / (K * n[c]) for an arbitrary number of classes K = counts.size().
/// Throws InvalidArgument when any count is zero.
std::vector<double> inverse_frequency_weights(std::span<const std::size_t> counts);

ClassWeights compute_class_weights(const ClassHistogram& hist);

enum class Reduction { WeightedMean, Sum };

std::string_view to_string(Reduction r);
Reduction reduction_from_string(std::string_view text);

inline constexpr double kLogClamp = 1e-12;

/// Class-weighted categorical cross-entropy over row-stochastic `probs`
/// (B x 7). Per-sample term: -w[y] * log(max(p[y], 1e-12)).
/// WeightedMean divides the sum by the sum of applied weights.
double weighted_cross_entropy(const Matrix& probs, std::span<const int> targets,
                              const ClassWeights& weights, Reduction reduction);

struct LossAndGradient {
  double loss = 0.0;
  Matrix grad_logits;  ///< dLoss/dLogits, B x 7
  Matrix probs;
};

/// Softmax + weighted cross-entropy from logits, with the analytic gradient
/// w[y] * (softmax(z) - onehot(y)) scaled by the reduction.
LossAndGradient weighted_cross_entropy_from_logits(const Matrix& logits, std::span<const int> targets,
                                                   const ClassWeights& weights, Reduction reduction);

}  // namespace insideout
