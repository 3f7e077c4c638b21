#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "insideout/error.hpp"
#include "insideout/splitter.hpp"
#include "support.hpp"

using namespace insideout;
using namespace testing;

namespace {

std::size_t count_label(const LabeledDataset& ds, const std::vector<std::size_t>& idx, int c) {
  return static_cast<std::size_t>(std::count_if(idx.begin(), idx.end(), [&](std::size_t i) {
    return to_index(ds[i].label) == c;
  }));
}

}  // namespace

TEST_CASE("SplitSpec validation") {
  SplitSpec s;
  CHECK_NOTHROW(s.validate());
  s.ratios = {0.8, 0.1, 0.2};
  CHECK_THROWS_AS(s.validate(), InvalidArgument);
  s.ratios = {0.9, 0.1, 0.0};
  CHECK_THROWS_AS(s.validate(), InvalidArgument);
  s.mode = SplitMode::UsageColumn;
  CHECK_NOTHROW(s.validate());
  CHECK(split_mode_from_string("UsageColumn") == SplitMode::UsageColumn);
  CHECK(split_mode_from_string(to_string(SplitMode::StratifiedRandom)) == SplitMode::StratifiedRandom);
  CHECK_THROWS_AS(split_mode_from_string("kfold"), InvalidArgument);
}

TEST_CASE("100 per class with 0.8/0.1/0.1 gives exactly 80/10/10 per class") {
  const auto ds = dataset_with_counts({100, 100, 100, 100, 100, 100, 100});
  const DatasetSplit s = split_stratified(ds, SplitSpec{});
  CHECK(is_partition(s, ds.size()));
  for (int c = 0; c < 7; ++c) {
    CHECK(count_label(ds, s.train, c) == 80);
    CHECK(count_label(ds, s.val, c) == 10);
    CHECK(count_label(ds, s.test, c) == 10);
  }
}

TEST_CASE("equal seeds give identical splits, lists sorted") {
  const auto ds = dataset_with_counts({30, 5, 12, 40, 22, 17, 9});
  SplitSpec spec;
  spec.seed = 77;
  const DatasetSplit a = split_stratified(ds, spec);
  const DatasetSplit b = split_stratified(ds, spec);
  CHECK(a == b);
  CHECK(std::is_sorted(a.train.begin(), a.train.end()));
  CHECK(std::is_sorted(a.val.begin(), a.val.end()));
  CHECK(std::is_sorted(a.test.begin(), a.test.end()));
}

TEST_CASE("a class smaller than the partition count is rejected by name") {
  CHECK_THROWS_WITH_AS(split_stratified(dataset_with_labels({0, 1, 2, 3, 4, 5, 6}), SplitSpec{SplitMode::StratifiedRandom, {0.34, 0.33, 0.33}, 0}),
                       doctest::Contains("Anger"), InvalidArgument);
  CHECK_THROWS_WITH_AS(split_stratified(dataset_with_counts({5, 5, 5, 5, 5, 2, 5}), SplitSpec{}),
                       doctest::Contains("Surprise"), InvalidArgument);
}

TEST_CASE("absent classes are allowed") {
  const auto ds = dataset_with_counts({20, 0, 20, 0, 20, 0, 20});
  const DatasetSplit s = split_stratified(ds, SplitSpec{});
  CHECK(is_partition(s, ds.size()));
  CHECK(s.val.size() == 8);
  CHECK(s.test.size() == 8);
}

TEST_CASE("partition sizes: val/test floor, residue to train") {
  const auto ds = dataset_with_counts({13, 7, 9, 21, 4, 6, 11});  // N = 71
  const DatasetSplit s = split_stratified(ds, SplitSpec{});
  CHECK(s.val.size() == 7);
  CHECK(s.test.size() == 7);
  CHECK(s.train.size() == 57);
}

TEST_CASE("random datasets: partition property and one-sample stratification bound") {
  Rng rng(123);
  for (int trial = 0; trial < 60; ++trial) {
    std::array<std::size_t, kNumClasses> counts{};
    for (auto& c : counts) c = 3 + rng.below(140);
    const auto ds = dataset_with_counts(counts, trial);
    const double r1 = 0.05 + 0.3 * rng.uniform();
    const double r2 = 0.05 + 0.3 * rng.uniform();
    SplitSpec spec{SplitMode::StratifiedRandom, {1.0 - r1 - r2, r1, r2}, rng.below(1000)};
    const DatasetSplit s = split_stratified(ds, spec);
    REQUIRE(is_partition(s, ds.size()));
    const double n = static_cast<double>(ds.size());
    for (const auto* part : {&s.train, &s.val, &s.test}) {
      const double p = static_cast<double>(part->size());
      REQUIRE(p > 0);
      for (int c = 0; c < 7; ++c) {
        const double share = static_cast<double>(count_label(ds, *part, c));
        const double exact = static_cast<double>(counts[static_cast<std::size_t>(c)]) * p / n;
        CHECK(std::abs(share - exact) < 1.0 + 1e-9);
      }
    }
  }
}

TEST_CASE("usage column split") {
  std::vector<Sample> s{{filled(1), Emotion::Anger, Usage::Training},
                        {filled(2), Emotion::Fear, Usage::PublicTest},
                        {filled(3), Emotion::Happy, Usage::PrivateTest}};
  const DatasetSplit split = split_by_usage(LabeledDataset(s, "x"));
  CHECK(split.train == std::vector<std::size_t>{0});
  CHECK(split.val == std::vector<std::size_t>{1});
  CHECK(split.test == std::vector<std::size_t>{2});
  CHECK(make_split(LabeledDataset(s, "x"), SplitSpec{SplitMode::UsageColumn, {0.8, 0.1, 0.1}, 0}) == split);

  CHECK_THROWS_WITH_AS(split_by_usage(dataset_with_labels({0, 1, 2})), "PublicTest partition empty",
                       InvalidArgument);
}

TEST_CASE("is_partition detects overlap and gaps") {
  CHECK(is_partition({{0, 2}, {1}, {3}}, 4));
  CHECK_FALSE(is_partition({{0, 1}, {1}, {3}}, 4));
  CHECK_FALSE(is_partition({{0}, {1}, {3}}, 4));
  CHECK_FALSE(is_partition({{0}, {1}, {4}}, 3));
}
