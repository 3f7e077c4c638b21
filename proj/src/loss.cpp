#include "insideout/loss.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "insideout/error.hpp"

namespace insideout {

namespace {

void check_targets(Eigen::Index rows, Eigen::Index cols, std::span<const int> targets) {
  if (cols != static_cast<Eigen::Index>(kNumClasses)) {
    throw InvalidArgument(fmt::format("expected {} class columns, got {}", kNumClasses, cols));
  }
  if (rows == 0) throw InvalidArgument("loss over an empty batch");
  if (static_cast<std::size_t>(rows) != targets.size()) {
    throw InvalidArgument(
        fmt::format("batch has {} rows but {} targets", rows, targets.size()));
  }
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (targets[i] < 0 || targets[i] >= static_cast<int>(kNumClasses)) {
      throw InvalidArgument(fmt::format("target {} at position {} is not a class index", targets[i], i));
    }
  }
}

}  // namespace

ClassWeights ClassWeights::uniform() {
  ClassWeights cw;
  cw.w.fill(1.0);
  return cw;
}

std::vector<double> inverse_frequency_weights(std::span<const std::size_t> counts) {
  if (counts.empty()) throw InvalidArgument("no classes to weight");
  std::size_t total = 0;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] == 0) {
      throw InvalidArgument(fmt::format("class {} has zero samples; inverse-frequency weight undefined", c));
    }
    total += counts[c];
  }
  std::vector<double> w(counts.size());
  const double k = static_cast<double>(counts.size());
  for (std::size_t c = 0; c < counts.size(); ++c) {
    w[c] = static_cast<double>(total) / (k * static_cast<double>(counts[c]));
  }
  return w;
}

ClassWeights compute_class_weights(const ClassHistogram& hist) {
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    if (hist.counts[c] == 0) {
      throw InvalidArgument(fmt::format("class {} has zero samples; inverse-frequency weight undefined",
                                        to_name(static_cast<Emotion>(c))));
    }
  }
  const auto w = inverse_frequency_weights(hist.counts);
  ClassWeights cw;
  std::copy(w.begin(), w.end(), cw.w.begin());
  cw.source_histogram = hist;
  return cw;
}

std::string_view to_string(Reduction r) { return r == Reduction::Sum ? "Sum" : "WeightedMean"; }

Reduction reduction_from_string(std::string_view text) {
  if (text == "Sum") return Reduction::Sum;
  if (text == "WeightedMean") return Reduction::WeightedMean;
  throw InvalidArgument(fmt::format("unknown reduction '{}' (WeightedMean|Sum)", text));
}

double weighted_cross_entropy(const Matrix& probs, std::span<const int> targets,
                              const ClassWeights& weights, Reduction reduction) {
  check_targets(probs.rows(), probs.cols(), targets);
  double total = 0.0;
  double weight_sum = 0.0;
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    const double row_sum = probs.row(i).sum();
    if (!(std::abs(row_sum - 1.0) <= 1e-6)) {
      throw InvalidArgument(fmt::format("probability row {} sums to {}, not 1", i, row_sum));
    }
    const auto y = static_cast<std::size_t>(targets[static_cast<std::size_t>(i)]);
    const double p = std::max(probs(i, static_cast<Eigen::Index>(y)), kLogClamp);
    total += -weights.w[y] * std::log(p);
    weight_sum += weights.w[y];
  }
  return reduction == Reduction::Sum ? total : total / weight_sum;
}

LossAndGradient weighted_cross_entropy_from_logits(const Matrix& logits, std::span<const int> targets,
                                                   const ClassWeights& weights, Reduction reduction) {
  check_targets(logits.rows(), logits.cols(), targets);
  LossAndGradient out;
  out.probs = softmax(logits);
  out.loss = weighted_cross_entropy(out.probs, targets, weights, reduction);

  double weight_sum = 0.0;
  out.grad_logits = out.probs;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const auto y = static_cast<std::size_t>(targets[static_cast<std::size_t>(i)]);
    out.grad_logits(i, static_cast<Eigen::Index>(y)) -= 1.0;
    out.grad_logits.row(i) *= weights.w[y];
    weight_sum += weights.w[y];
  }
  if (reduction == Reduction::WeightedMean) out.grad_logits /= weight_sum;
  return out;
}

}  // namespace insideout
