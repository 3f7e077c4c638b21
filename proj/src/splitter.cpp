#include "insideout/splitter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "insideout/error.hpp"
#include "insideout/rng.hpp"

namespace insideout {

namespace {

constexpr std::size_t kPartitions = 3;

// floor(n * ratio), treating values within 1e-9 of an integer as that integer.
std::size_t partition_size(std::size_t n, double ratio) {
  const double exact = static_cast<double>(n) * ratio;
  const double nearest = std::round(exact);
  if (std::abs(exact - nearest) < 1e-9 * std::max(1.0, exact)) return static_cast<std::size_t>(nearest);
  return static_cast<std::size_t>(std::floor(exact));
}

// Small dense max-flow (augmenting paths). The graph has at most 12 nodes.
class FlowNetwork {
 public:
  explicit FlowNetwork(std::size_t nodes) : cap_(nodes, std::vector<long long>(nodes, 0)) {}

  void add_edge(std::size_t from, std::size_t to, long long capacity) { cap_[from][to] += capacity; }
  long long residual(std::size_t from, std::size_t to) const { return cap_[from][to]; }

  long long max_flow(std::size_t source, std::size_t sink) {
    long long total = 0;
    while (true) {
      std::vector<std::size_t> parent(cap_.size(), cap_.size());
      parent[source] = source;
      std::vector<std::size_t> queue{source};
      for (std::size_t head = 0; head < queue.size() && parent[sink] == cap_.size(); ++head) {
        const std::size_t u = queue[head];
        for (std::size_t v = 0; v < cap_.size(); ++v) {
          if (parent[v] == cap_.size() && cap_[u][v] > 0) {
            parent[v] = u;
            queue.push_back(v);
          }
        }
      }
      if (parent[sink] == cap_.size()) return total;
      long long bottleneck = std::numeric_limits<long long>::max();
      for (std::size_t v = sink; v != source; v = parent[v]) {
        bottleneck = std::min(bottleneck, cap_[parent[v]][v]);
      }
      for (std::size_t v = sink; v != source; v = parent[v]) {
        cap_[parent[v]][v] -= bottleneck;
        cap_[v][parent[v]] += bottleneck;
      }
      total += bottleneck;
    }
  }

 private:
  std::vector<std::vector<long long>> cap_;
};

// Integer allocation a[p][c] with row sums `sizes`, column sums `class_counts`
// and every entry equal to floor or ceil of class_counts[c] * sizes[p] / N.
// Such a rounding always exists; it is found as a flow over the fractional
// entries.
std::array<std::array<std::size_t, kNumClasses>, kPartitions> apportion(
    const std::array<std::size_t, kNumClasses>& class_counts,
    const std::array<std::size_t, kPartitions>& sizes, std::size_t total) {
  std::array<std::array<std::size_t, kNumClasses>, kPartitions> alloc{};
  std::array<std::array<bool, kNumClasses>, kPartitions> fractional{};
  std::array<long long, kPartitions> row_missing{};
  std::array<long long, kNumClasses> col_missing{};

  for (std::size_t p = 0; p < kPartitions; ++p) {
    row_missing[p] = static_cast<long long>(sizes[p]);
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      const auto numer = static_cast<unsigned long long>(class_counts[c]) * sizes[p];
      alloc[p][c] = static_cast<std::size_t>(numer / total);
      fractional[p][c] = (numer % total) != 0;
      row_missing[p] -= static_cast<long long>(alloc[p][c]);
    }
  }
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    col_missing[c] = static_cast<long long>(class_counts[c]);
    for (std::size_t p = 0; p < kPartitions; ++p) col_missing[c] -= static_cast<long long>(alloc[p][c]);
  }

  // Nodes: 0 source, 1..3 partitions, 4..10 classes, 11 sink.
  const std::size_t source = 0;
  const std::size_t sink = 1 + kPartitions + kNumClasses;
  FlowNetwork net(sink + 1);
  long long needed = 0;
  for (std::size_t p = 0; p < kPartitions; ++p) {
    net.add_edge(source, 1 + p, row_missing[p]);
    needed += row_missing[p];
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      if (fractional[p][c]) net.add_edge(1 + p, 1 + kPartitions + c, 1);
    }
  }
  for (std::size_t c = 0; c < kNumClasses; ++c) net.add_edge(1 + kPartitions + c, sink, col_missing[c]);

  if (net.max_flow(source, sink) != needed) {
    throw Error("stratified apportionment failed to balance partition and class totals");
  }
  for (std::size_t p = 0; p < kPartitions; ++p) {
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      if (fractional[p][c] && net.residual(1 + p, 1 + kPartitions + c) == 0) ++alloc[p][c];
    }
  }
  return alloc;
}

}  // namespace

std::string_view to_string(SplitMode mode) {
  return mode == SplitMode::UsageColumn ? "UsageColumn" : "StratifiedRandom";
}

SplitMode split_mode_from_string(std::string_view text) {
  if (text == "UsageColumn") return SplitMode::UsageColumn;
  if (text == "StratifiedRandom") return SplitMode::StratifiedRandom;
  throw InvalidArgument(fmt::format("unknown split mode '{}' (UsageColumn|StratifiedRandom)", text));
}

void SplitSpec::validate() const {
  const double sum = ratios[0] + ratios[1] + ratios[2];
  if (std::abs(sum - 1.0) > 1e-9) {
    throw InvalidArgument(fmt::format("split ratios must sum to 1, got {}", sum));
  }
  if (mode == SplitMode::StratifiedRandom) {
    for (double r : ratios) {
      if (!(r > 0.0)) throw InvalidArgument("split ratios must all be positive");
    }
  }
}

DatasetSplit split_stratified(const LabeledDataset& ds, const SplitSpec& spec) {
  spec.validate();

  std::array<std::vector<std::size_t>, kNumClasses> by_class;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    by_class[static_cast<std::size_t>(to_index(ds[i].label))].push_back(i);
  }
  std::array<std::size_t, kNumClasses> class_counts{};
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    class_counts[c] = by_class[c].size();
    if (class_counts[c] > 0 && class_counts[c] < kPartitions) {
      throw InvalidArgument(fmt::format(
          "class {} has {} sample(s), fewer than the {} partitions required for stratification",
          to_name(static_cast<Emotion>(c)), class_counts[c], kPartitions));
    }
  }

  const std::size_t n = ds.size();
  std::array<std::size_t, kPartitions> sizes{};
  sizes[1] = partition_size(n, spec.ratios[1]);
  sizes[2] = partition_size(n, spec.ratios[2]);
  if (sizes[1] + sizes[2] >= n) throw InvalidArgument("split leaves the train partition empty");
  sizes[0] = n - sizes[1] - sizes[2];
  constexpr std::array<std::string_view, kPartitions> kNames{"train", "val", "test"};
  for (std::size_t p = 0; p < kPartitions; ++p) {
    if (sizes[p] == 0) {
      throw InvalidArgument(fmt::format("{} partition would be empty for {} samples", kNames[p], n));
    }
  }

  const auto alloc = apportion(class_counts, sizes, n);

  DatasetSplit split;
  std::array<std::vector<std::size_t>*, kPartitions> parts{&split.train, &split.val, &split.test};
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    std::vector<std::size_t>& members = by_class[c];
    Rng rng(stream_key(spec.seed, {c}));
    rng.shuffle(std::span<std::size_t>(members));
    std::size_t offset = 0;
    for (std::size_t p = 0; p < kPartitions; ++p) {
      parts[p]->insert(parts[p]->end(), members.begin() + static_cast<std::ptrdiff_t>(offset),
                       members.begin() + static_cast<std::ptrdiff_t>(offset + alloc[p][c]));
      offset += alloc[p][c];
    }
  }
  for (auto* part : parts) std::sort(part->begin(), part->end());
  return split;
}

DatasetSplit split_by_usage(const LabeledDataset& ds) {
  DatasetSplit split;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    switch (ds[i].usage) {
      case Usage::Training: split.train.push_back(i); break;
      case Usage::PublicTest: split.val.push_back(i); break;
      case Usage::PrivateTest: split.test.push_back(i); break;
    }
  }
  if (split.train.empty()) throw InvalidArgument("Training partition empty");
  if (split.val.empty()) throw InvalidArgument("PublicTest partition empty");
  if (split.test.empty()) throw InvalidArgument("PrivateTest partition empty");
  return split;
}

DatasetSplit make_split(const LabeledDataset& ds, const SplitSpec& spec) {
  return spec.mode == SplitMode::UsageColumn ? split_by_usage(ds) : split_stratified(ds, spec);
}

bool is_partition(const DatasetSplit& split, std::size_t n) {
  std::vector<int> seen(n, 0);
  for (const auto* part : {&split.train, &split.val, &split.test}) {
    for (std::size_t i : *part) {
      if (i >= n || seen[i]++ != 0) return false;
    }
  }
  return std::all_of(seen.begin(), seen.end(), [](int v) { return v == 1; });
}

}  // namespace insideout
