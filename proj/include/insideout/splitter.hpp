#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "insideout/dataset.hpp"

namespace insideout {

enum class SplitMode { UsageColumn, StratifiedRandom };

std::string_view to_string(SplitMode mode);
SplitMode split_mode_from_string(std::string_view text);

struct SplitSpec {
  SplitMode mode = SplitMode::StratifiedRandom;
  std::array<double, 3> ratios{0.8, 0.1, 0.1};  ///< train, val, test
  std::uint64_t seed = 0;

  /// Throws InvalidArgument unless ratios sum to 1 (1e-9) and, in
  /// StratifiedRandom mode, each ratio is positive.
  void validate() const;
};

/// Index lists into a LabeledDataset; each list is sorted ascending.
struct DatasetSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;

  bool operator==(const DatasetSplit&) const = default;
};

/// Class-stratified random partition. Per class and partition, the sample
/// count differs from exact proportionality by less than one sample.
/// Partition sizes are floor(N * ratio) for val/test; the residue goes to train.
DatasetSplit split_stratified(const LabeledDataset& ds, const SplitSpec& spec);

/// Official FER2013 partition: Training -> train, PublicTest -> val,
/// PrivateTest -> test.
DatasetSplit split_by_usage(const LabeledDataset& ds);

/// Dispatches on spec.mode.
DatasetSplit make_split(const LabeledDataset& ds, const SplitSpec& spec);

/// True when the three lists are disjoint and cover 0..n-1 exactly once.
bool is_partition(const DatasetSplit& split, std::size_t n);

}  // namespace insideout
