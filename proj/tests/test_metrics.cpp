#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "insideout/error.hpp"
#include "insideout/linalg.hpp"
#include "insideout/metrics.hpp"
#include "support.hpp"

using namespace insideout;
using namespace testing;

namespace {

ConfusionMatrix random_matrix(Rng& rng, int max_entry) {
  ConfusionMatrix cm;
  for (auto& row : cm.m) {
    for (auto& v : row) v = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(max_entry) + 1));
  }
  return cm;
}

}  // namespace

TEST_CASE("confusion counts pairs") {
  const std::vector<int> t{0, 1, 2};
  const ConfusionMatrix cm = confusion_from_predictions(t, t);
  for (int i = 0; i < 7; ++i) {
    for (int j = 0; j < 7; ++j) CHECK(cm.m[i][j] == (i == j && i < 3 ? 1 : 0));
  }
  const std::vector<int> truths{3, 3};
  const std::vector<int> preds{6, 6};
  const ConfusionMatrix c2 = confusion_from_predictions(truths, preds);
  CHECK(c2.m[3][6] == 2);
  CHECK(c2.total() == 2);
  CHECK(c2.trace() == 0);
}

TEST_CASE("confusion is independent of pair order") {
  Rng rng(1);
  std::vector<int> t(60), p(60);
  for (std::size_t i = 0; i < 60; ++i) {
    t[i] = static_cast<int>(rng.below(7));
    p[i] = static_cast<int>(rng.below(7));
  }
  const ConfusionMatrix base = confusion_from_predictions(t, p);
  std::vector<std::size_t> perm(60);
  std::iota(perm.begin(), perm.end(), 0);
  rng.shuffle(std::span<std::size_t>(perm));
  std::vector<int> t2, p2;
  for (std::size_t i : perm) {
    t2.push_back(t[i]);
    p2.push_back(p[i]);
  }
  CHECK(confusion_from_predictions(t2, p2) == base);
}

TEST_CASE("confusion input validation") {
  const std::vector<int> a{0, 1};
  const std::vector<int> b{0};
  const std::vector<int> bad{0, 9};
  const std::vector<int> none;
  CHECK_THROWS_AS(confusion_from_predictions(a, b), InvalidArgument);
  CHECK_THROWS_AS(confusion_from_predictions(a, bad), InvalidArgument);
  CHECK_THROWS_AS(confusion_from_predictions(none, none), InvalidArgument);
}

TEST_CASE("F1 from precision and recall") {
  CHECK(f1_from_precision_recall(0.884, 0.786) == doctest::Approx(0.832).epsilon(0.0005 / 0.832));
  CHECK(f1_from_precision_recall(0.0, 0.0) == 0.0);
  CHECK(f1_from_precision_recall(1.0, 1.0) == 1.0);
}

TEST_CASE("perfect diagonal gives all ones") {
  ConfusionMatrix cm;
  for (int c = 0; c < 7; ++c) cm.m[c][c] = 5 + c;
  const ClassificationReport r = report_from_confusion(cm);
  CHECK(r.accuracy == 1.0);
  for (const ClassMetrics& m : r.per_class) {
    CHECK(m.precision == 1.0);
    CHECK(m.recall == 1.0);
    CHECK(m.f1 == 1.0);
  }
  CHECK(r.macro_avg.f1 == 1.0);
  CHECK(r.weighted_avg.f1 == 1.0);
  CHECK(r.warnings.empty());
}

TEST_CASE("accuracy from confusion") {
  ConfusionMatrix cm;
  cm.m[0][0] = 628;
  cm.m[1][2] = 372;
  CHECK(accuracy_from_confusion(cm) == doctest::Approx(0.628).epsilon(1e-15));
  ConfusionMatrix off;
  off.m[0][1] = 3;
  CHECK(accuracy_from_confusion(off) == 0.0);
  CHECK_THROWS_AS(accuracy_from_confusion(ConfusionMatrix{}), InvalidArgument);
  CHECK_THROWS_AS(report_from_confusion(ConfusionMatrix{}), InvalidArgument);
}

TEST_CASE("zero denominators give 0 with a warning") {
  ConfusionMatrix cm;
  cm.m[0][0] = 3;
  cm.m[1][0] = 2;
  const ClassificationReport r = report_from_confusion(cm);
  CHECK(r.per_class[1].precision == 0.0);
  CHECK(r.per_class[1].precision_undefined);
  CHECK(r.per_class[2].recall == 0.0);
  CHECK(r.per_class[2].recall_undefined);
  CHECK_FALSE(r.warnings.empty());
}

TEST_CASE("report invariants on random matrices") {
  Rng rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    const ConfusionMatrix cm = random_matrix(rng, 5);
    if (cm.total() == 0) continue;
    const ClassificationReport r = report_from_confusion(cm);
    std::int64_t support = 0;
    double lo = 1.0, hi = 0.0;
    for (const ClassMetrics& m : r.per_class) {
      support += m.support;
      for (double v : {m.precision, m.recall, m.f1}) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
      }
      lo = std::min(lo, m.f1);
      hi = std::max(hi, m.f1);
    }
    CHECK(support == cm.total());
    CHECK(r.accuracy == static_cast<double>(cm.trace()) / static_cast<double>(cm.total()));
    CHECK(r.weighted_avg.recall == r.accuracy);
    CHECK(r.macro_avg.f1 >= lo - 1e-15);
    CHECK(r.macro_avg.f1 <= hi + 1e-15);
  }
}

TEST_CASE("relabelling classes permutes rows and keeps the averages") {
  Rng rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    const ConfusionMatrix cm = random_matrix(rng, 6);
    if (cm.total() == 0) continue;
    std::array<std::size_t, 7> perm{0, 1, 2, 3, 4, 5, 6};
    rng.shuffle(std::span<std::size_t>(perm));
    ConfusionMatrix moved;
    for (std::size_t i = 0; i < 7; ++i) {
      for (std::size_t j = 0; j < 7; ++j) moved.m[perm[i]][perm[j]] = cm.m[i][j];
    }
    const ClassificationReport a = report_from_confusion(cm);
    const ClassificationReport b = report_from_confusion(moved);
    for (std::size_t c = 0; c < 7; ++c) {
      CHECK(b.per_class[perm[c]].f1 == doctest::Approx(a.per_class[c].f1).epsilon(1e-12));
      CHECK(b.per_class[perm[c]].support == a.per_class[c].support);
    }
    CHECK(b.accuracy == a.accuracy);
    CHECK(b.macro_avg.f1 == doctest::Approx(a.macro_avg.f1).epsilon(1e-12));
    CHECK(b.macro_avg.precision == doctest::Approx(a.macro_avg.precision).epsilon(1e-12));
  }
}

TEST_CASE("softmax is stable and row-stochastic") {
  Matrix z = Matrix::Zero(2, 7);
  z(1, 0) = 1000.0;
  const Matrix p = softmax(z);
  for (int k = 0; k < 7; ++k) CHECK(p(0, k) == doctest::Approx(1.0 / 7.0).epsilon(1e-12));
  CHECK(p(1, 0) == doctest::Approx(1.0));
  CHECK(p.allFinite());
  Rng rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    Matrix r(1, 7);
    for (int k = 0; k < 7; ++k) r(0, k) = rng.normal() * 10;
    const Matrix pr = softmax(r);
    CHECK(std::abs(pr.sum() - 1.0) <= 1e-12);
    Matrix shifted = r.array() + 123.4;
    CHECK((softmax(shifted) - pr).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(argmax_row(pr, 0) == argmax_row(r, 0));
  }
  Matrix tie = Matrix::Constant(1, 7, 0.5);
  CHECK(argmax_row(tie, 0) == 0);
}
