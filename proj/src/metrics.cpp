#include "insideout/metrics.hpp"

#include <numeric>

#include <fmt/format.h>

#include "insideout/error.hpp"

namespace insideout {

std::int64_t ConfusionMatrix::total() const {
  std::int64_t s = 0;
  for (const auto& row : m) s = std::accumulate(row.begin(), row.end(), s);
  return s;
}

std::int64_t ConfusionMatrix::trace() const {
  std::int64_t s = 0;
  for (std::size_t c = 0; c < kNumClasses; ++c) s += m[c][c];
  return s;
}

std::int64_t ConfusionMatrix::row_sum(std::size_t c) const {
  return std::accumulate(m[c].begin(), m[c].end(), std::int64_t{0});
}

std::int64_t ConfusionMatrix::col_sum(std::size_t c) const {
  std::int64_t s = 0;
  for (const auto& row : m) s += row[c];
  return s;
}

ConfusionMatrix confusion_from_predictions(std::span<const int> truths, std::span<const int> predictions) {
  if (truths.size() != predictions.size()) {
    throw InvalidArgument(fmt::format("{} truths but {} predictions", truths.size(), predictions.size()));
  }
  if (truths.empty()) throw InvalidArgument("no predictions to tabulate");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    const int t = truths[i];
    const int p = predictions[i];
    if (t < 0 || t >= static_cast<int>(kNumClasses) || p < 0 || p >= static_cast<int>(kNumClasses)) {
      throw InvalidArgument(fmt::format("pair {} has invalid label (truth {}, prediction {})", i, t, p));
    }
    ++cm.m[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)];
  }
  return cm;
}

double f1_from_precision_recall(double precision, double recall) {
  const double denom = precision + recall;
  return denom > 0.0 ? 2.0 * precision * recall / denom : 0.0;
}

double macro_average(std::span<const double> values) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double accuracy_from_confusion(const ConfusionMatrix& cm) {
  const std::int64_t total = cm.total();
  if (total <= 0) throw InvalidArgument("accuracy of an empty confusion matrix");
  return static_cast<double>(cm.trace()) / static_cast<double>(total);
}

ClassificationReport report_from_confusion(const ConfusionMatrix& cm) {
  ClassificationReport r;
  r.total = cm.total();
  if (r.total <= 0) throw InvalidArgument("classification report of an empty confusion matrix");
  r.accuracy = accuracy_from_confusion(cm);

  std::array<double, kNumClasses> p{}, rc{}, f{};
  double wp = 0.0, wf = 0.0;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    ClassMetrics& cls = r.per_class[c];
    const std::int64_t tp = cm.m[c][c];
    const std::int64_t predicted = cm.col_sum(c);
    cls.support = cm.row_sum(c);
    const auto name = to_name(static_cast<Emotion>(c));
    if (predicted > 0) {
      cls.precision = static_cast<double>(tp) / static_cast<double>(predicted);
    } else {
      cls.precision_undefined = true;
      r.warnings.push_back(fmt::format("precision of {} is undefined (never predicted); set to 0", name));
    }
    if (cls.support > 0) {
      cls.recall = static_cast<double>(tp) / static_cast<double>(cls.support);
    } else {
      cls.recall_undefined = true;
      r.warnings.push_back(fmt::format("recall of {} is undefined (no true samples); set to 0", name));
    }
    cls.f1 = f1_from_precision_recall(cls.precision, cls.recall);
    p[c] = cls.precision;
    rc[c] = cls.recall;
    f[c] = cls.f1;
    const auto support = static_cast<double>(cls.support);
    wp += support * cls.precision;
    wf += support * cls.f1;
  }
  const auto n = static_cast<double>(r.total);
  r.macro_avg = {macro_average(p), macro_average(rc), macro_average(f)};
  // support * recall is the true-positive count, so the weighted recall is
  // trace / total.
  r.weighted_avg = {wp / n, static_cast<double>(cm.trace()) / n, wf / n};
  return r;
}

}  // namespace insideout
