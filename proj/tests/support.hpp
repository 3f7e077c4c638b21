#pragma once

#include <atomic>
#include <filesystem>
#include <string>
#include <vector>

#include <unistd.h>

#include "insideout/dataset.hpp"
#include "insideout/rng.hpp"

namespace testing {

using namespace insideout;

inline GrayImage filled(std::int16_t v) { return GrayImage(kFerSide, kFerSide, v); }

inline GrayImage random_image(Rng& rng) {
  GrayImage img(kFerSide, kFerSide);
  for (auto& p : img.pixels) p = static_cast<std::int16_t>(rng.below(256));
  return img;
}

/// One random-image sample per label, all tagged Training.
inline LabeledDataset dataset_with_labels(const std::vector<int>& labels, std::uint64_t seed = 1) {
  Rng rng(seed);
  std::vector<Sample> samples;
  for (int l : labels) samples.push_back({random_image(rng), static_cast<Emotion>(l), Usage::Training});
  return LabeledDataset(std::move(samples), "test");
}

inline LabeledDataset dataset_with_counts(const std::array<std::size_t, kNumClasses>& counts,
                                          std::uint64_t seed = 1) {
  std::vector<int> labels;
  for (std::size_t c = 0; c < kNumClasses; ++c) labels.insert(labels.end(), counts[c], static_cast<int>(c));
  return dataset_with_labels(labels, seed);
}

inline std::string pixel_string(std::size_t n, int value = 0) {
  std::string s;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) s += ' ';
    s += std::to_string(value);
  }
  return s;
}

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("insideout_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing
