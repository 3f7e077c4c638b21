#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "insideout/emotion.hpp"

namespace insideout {

inline constexpr int kFerSide = 48;
inline constexpr std::size_t kFerPixels = kFerSide * kFerSide;

enum class Usage { Training, PublicTest, PrivateTest };

std::string_view to_string(Usage usage);
std::optional<Usage> usage_from_string(std::string_view tag);

/// Single-channel image, row-major. Pixels are stored wider than 8 bits so
/// that out-of-range values can be represented and reported by validation.
struct GrayImage {
  int height = 0;
  int width = 0;
  std::vector<std::int16_t> pixels;

  GrayImage() = default;
  GrayImage(int h, int w, std::int16_t fill = 0)
      : height(h), width(w), pixels(static_cast<std::size_t>(h) * w, fill) {}

  std::int16_t& at(int y, int x) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  std::int16_t at(int y, int x) const { return pixels[static_cast<std::size_t>(y) * width + x]; }

  bool operator==(const GrayImage&) const = default;
};

struct Sample {
  GrayImage image;
  Emotion label = Emotion::Neutral;
  Usage usage = Usage::Training;

  bool operator==(const Sample&) const = default;
};

/// Immutable, ordered corpus of samples. Every image is 48x48.
class LabeledDataset {
 public:
  /// Throws InvalidArgument when `samples` is empty or an image is not 48x48.
  LabeledDataset(std::vector<Sample> samples, std::string source_digest);

  std::size_t size() const { return samples_.size(); }
  const Sample& operator[](std::size_t i) const { return samples_[i]; }
  std::span<const Sample> samples() const { return samples_; }

  /// SHA-256 of the raw bytes the dataset was parsed from.
  const std::string& source_digest() const { return source_digest_; }

  /// SHA-256 over labels, usage tags and pixels; independent of the CSV
  /// formatting the dataset came from.
  std::string content_digest() const;

 private:
  std::vector<Sample> samples_;
  std::string source_digest_;
};

struct ClassHistogram {
  std::array<std::size_t, kNumClasses> counts{};
  std::size_t total = 0;
};

/// Parses the FER2013 CSV (`emotion,pixels,Usage`). Errors name the 1-based
/// data row and the defect.
LabeledDataset parse_fer_csv(const std::filesystem::path& path);

/// Same as parse_fer_csv but over an in-memory buffer.
LabeledDataset parse_fer_csv_bytes(std::string_view bytes);

/// Writes the dataset in the FER2013 CSV layout.
void write_fer_csv(const LabeledDataset& ds, std::ostream& out);
void write_fer_csv(const LabeledDataset& ds, const std::filesystem::path& path);

ClassHistogram class_histogram(const LabeledDataset& ds);

/// Histogram restricted to a subset of sample indices (e.g. one partition).
ClassHistogram class_histogram(const LabeledDataset& ds, std::span<const std::size_t> indices);

struct DuplicatePair {
  std::size_t first = 0;   ///< earliest sample with this image
  std::size_t second = 0;  ///< later sample repeating it
  bool conflicting_labels = false;
};

struct RangeViolation {
  std::size_t sample = 0;
  std::size_t pixel = 0;
  int value = 0;
};

struct ValidationReport {
  std::size_t sample_count = 0;
  std::array<std::size_t, kNumClasses> class_counts{};
  std::size_t min_class_count = 0;
  Emotion rarest_class = Emotion::Anger;
  std::array<std::size_t, 3> usage_counts{};
  std::vector<DuplicatePair> duplicates;
  std::vector<RangeViolation> range_violations;
  std::vector<std::size_t> shape_violations;

  /// True when no duplicates, range or shape violations were found.
  bool clean() const {
    return duplicates.empty() && range_violations.empty() && shape_violations.empty();
  }
};

/// Scans for duplicate images and pixel/shape violations. Never mutates
/// the dataset; findings are reported, not fixed.
ValidationReport validate_dataset(const LabeledDataset& ds);
ValidationReport validate_samples(std::span<const Sample> samples);

}  // namespace insideout
