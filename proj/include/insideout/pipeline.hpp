#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "insideout/config.hpp"
#include "insideout/metrics.hpp"

namespace insideout {

// Artifact file names, relative to the run's output directory.
inline constexpr const char* kSplitFile = "split.json";
inline constexpr const char* kHistogramCsv = "class_histogram.csv";
inline constexpr const char* kHistogramPng = "class_histogram.png";
inline constexpr const char* kValidationFile = "validation_report.json";
inline constexpr const char* kAugmentedPng = "augmented_samples.png";
inline constexpr const char* kSamplesDir = "samples";
inline constexpr const char* kManifestFile = "manifest.json";
inline constexpr const char* kCurvesCsv = "curves.csv";
inline constexpr const char* kCurvesAccPng = "curves_acc.png";
inline constexpr const char* kCurvesLossPng = "curves_loss.png";
inline constexpr const char* kCheckpointDir = "checkpoint";
inline constexpr const char* kReportTxt = "report.txt";
inline constexpr const char* kReportJson = "report.json";
inline constexpr const char* kConfusionCsv = "confusion.csv";
inline constexpr const char* kConfusionPng = "confusion.png";
inline constexpr const char* kInferenceJson = "inference.json";
inline constexpr const char* kInferenceCsv = "inference.csv";
inline constexpr const char* kInferenceGridPng = "inference_grid.png";

/// Exit code when some inputs of `infer` could not be processed.
inline constexpr int kPartialFailureExit = 3;

struct CommandOptions {
  std::filesystem::path config_path;
  std::optional<std::uint64_t> seed;
  bool deterministic = false;
  bool overwrite = false;
  std::size_t emit_samples = 0;                     ///< prepare: augmented PNGs to write
  std::optional<std::filesystem::path> resume;      ///< train
  std::optional<std::filesystem::path> checkpoint;  ///< evaluate, infer
  std::string partition = "test";                   ///< evaluate, infer --samples
  std::vector<std::filesystem::path> images;        ///< infer
  std::size_t samples = 0;                          ///< infer: take from the partition
  int top_k = 3;                                    ///< infer
  bool quiet = false;
};

struct TopK {
  int label = 0;
  double probability = 0.0;
};

struct InferenceResult {
  std::string image;
  int label = 0;
  double confidence = 0.0;
  std::vector<TopK> top_k;
  std::optional<int> true_label;
};

/// The k most probable classes, probabilities non-increasing, ties by index.
std::vector<TopK> top_k_of(const Matrix& probs, Eigen::Index row, int k);

/// Plain-text classification table: one row per class in display order,
/// then accuracy, macro and support-weighted averages.
std::string format_report_text(const ClassificationReport& report, const std::string& partition);

std::string confusion_csv(const ConfusionMatrix& cm);

RunConfig resolve_config(const CommandOptions& opts);

int cmd_prepare(const CommandOptions& opts);
int cmd_train(const CommandOptions& opts);
int cmd_evaluate(const CommandOptions& opts);
int cmd_infer(const CommandOptions& opts);
/// Re-renders report.txt, confusion.png and the curves from report.json and
/// manifest.json without recomputing anything.
int cmd_report(const CommandOptions& opts);

}  // namespace insideout
