#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "insideout/emotion.hpp"

namespace insideout {

/// m[i][j] counts samples of true class i predicted as class j.
struct ConfusionMatrix {
  std::array<std::array<std::int64_t, kNumClasses>, kNumClasses> m{};

  std::int64_t total() const;
  std::int64_t trace() const;
  std::int64_t row_sum(std::size_t c) const;
  std::int64_t col_sum(std::size_t c) const;

  bool operator==(const ConfusionMatrix&) const = default;
};

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::int64_t support = 0;
  bool precision_undefined = false;  ///< class never predicted
  bool recall_undefined = false;     ///< class absent from the truths
};

struct AverageMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct ClassificationReport {
  std::array<ClassMetrics, kNumClasses> per_class{};
  double accuracy = 0.0;
  AverageMetrics macro_avg;
  AverageMetrics weighted_avg;
  std::int64_t total = 0;
  std::vector<std::string> warnings;  ///< zero-division notes
};

/// Throws InvalidArgument on length mismatch, empty input or invalid labels.
ConfusionMatrix confusion_from_predictions(std::span<const int> truths, std::span<const int> predictions);

/// Harmonic mean; 0 when precision + recall == 0.
double f1_from_precision_recall(double precision, double recall);

/// Unweighted mean.
double macro_average(std::span<const double> values);

/// Per-class P/R/F1 plus accuracy, macro and support-weighted averages.
/// Zero denominators give 0 and append a warning. Throws on an empty matrix.
ClassificationReport report_from_confusion(const ConfusionMatrix& cm);

double accuracy_from_confusion(const ConfusionMatrix& cm);

}  // namespace insideout
