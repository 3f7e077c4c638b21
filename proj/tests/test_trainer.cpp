#include <doctest.h>

#include <cmath>
#include <numbers>

#include "insideout/checkpoint.hpp"
#include "insideout/error.hpp"
#include "insideout/synthetic.hpp"
#include "insideout/trainer.hpp"
#include "support.hpp"

using namespace insideout;
using namespace testing;

namespace {

TrainingConfig schedule(int max_epochs, double initial = 1e-3, double min_lr = 1e-5) {
  TrainingConfig cfg;
  cfg.initial_lr = initial;
  cfg.min_lr = min_lr;
  cfg.max_epochs = max_epochs;
  cfg.patience = std::min(10, max_epochs);
  return cfg;
}

struct Fixture {
  LabeledDataset ds = make_synthetic(balanced_synthetic(4, 21));
  DatasetSplit split;
  TrainingConfig cfg;
  ModelConfig model_cfg;

  Fixture() {
    for (std::size_t i = 0; i < ds.size(); ++i) (i % 4 == 3 ? split.val : split.train).push_back(i);
    cfg.batch_size = 8;
    cfg.max_epochs = 4;
    cfg.patience = 4;
    cfg.augment = true;
    cfg.seed = 17;
    model_cfg.seed = 5;
  }

  ClassWeights weights() const { return compute_class_weights(class_histogram(ds, split.train)); }
};

void strip_times(TrainingState& s) {
  for (EpochRecord& r : s.history) r.wall_time = 0.0;
}

bool same_records(const std::vector<EpochRecord>& a, const std::vector<EpochRecord>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].epoch != b[i].epoch || a[i].train_loss != b[i].train_loss || a[i].val_loss != b[i].val_loss ||
        a[i].train_acc != b[i].train_acc || a[i].val_acc != b[i].val_acc || a[i].lr != b[i].lr) {
      return false;
    }
  }
  return true;
}

bool same_state(const Model& a, const Model& b) {
  const auto sa = model_state(a);
  const auto sb = model_state(b);
  if (sa.size() != sb.size()) return false;
  for (std::size_t i = 0; i < sa.size(); ++i) {
    if (sa[i].name != sb[i].name || sa[i].value != sb[i].value) return false;
  }
  return true;
}

// Decodes the class from a constant image whose intensity is 30 * class.
class OneHotStub final : public Predictor {
 public:
  Matrix predict_proba(const ImageBatch& batch) const override {
    Matrix p = Matrix::Zero(static_cast<Eigen::Index>(batch.size), 7);
    for (std::size_t i = 0; i < batch.size; ++i) {
      const double v = batch.data[i * batch.sample_stride()] * kImageNetStd[0] + kImageNetMean[0];
      p(static_cast<Eigen::Index>(i), std::lround(v * 255.0 / 30.0)) = 1.0;
    }
    return p;
  }
};

class UniformStub final : public Predictor {
 public:
  Matrix predict_proba(const ImageBatch& batch) const override {
    return Matrix::Constant(static_cast<Eigen::Index>(batch.size), 7, 1.0 / 7.0);
  }
};

LabeledDataset constant_images(const std::vector<int>& labels) {
  std::vector<Sample> samples;
  for (int l : labels) samples.push_back({filled(static_cast<std::int16_t>(30 * l)), static_cast<Emotion>(l), Usage::Training});
  return LabeledDataset(std::move(samples), "stub");
}

}  // namespace

TEST_CASE("cosine schedule endpoints and midpoint") {
  const TrainingConfig cfg = schedule(100);
  CHECK(cosine_lr(0, cfg) == 1e-3);
  CHECK(cosine_lr(99, cfg) == doctest::Approx(1e-5).epsilon(1e-12));
  CHECK(cosine_lr(1, schedule(3, 1e-3, 0.0)) == doctest::Approx(5e-4).epsilon(1e-12));
  CHECK(cosine_lr(50, schedule(101, 1e-3, 0.0)) == doctest::Approx(5e-4).epsilon(1e-12));
  CHECK(cosine_lr(0, schedule(1)) == 1e-3);
  CHECK_THROWS_AS(cosine_lr(100, cfg), InvalidArgument);
  CHECK_THROWS_AS(cosine_lr(-1, cfg), InvalidArgument);
}

TEST_CASE("cosine schedule is non-increasing and bounded for every horizon") {
  for (int e = 1; e <= 200; ++e) {
    const TrainingConfig cfg = schedule(e, 3e-3, 2e-6);
    double prev = cosine_lr(0, cfg);
    CHECK(prev == 3e-3);
    for (int k = 1; k < e; ++k) {
      const double lr = cosine_lr(k, cfg);
      CHECK(lr <= prev);
      CHECK(lr >= cfg.min_lr);
      CHECK(lr <= cfg.initial_lr);
      prev = lr;
    }
    if (e > 1) CHECK(std::abs(cosine_lr(e - 1, cfg) - 2e-6) <= 1e-18);
  }
}

TEST_CASE("early stopping: patience counts epochs without improvement beyond min_delta") {
  TrainingConfig cfg = schedule(100);
  cfg.patience = 3;
  cfg.min_delta = 1e-4;
  TrainingState s;
  const std::vector<double> losses{1.0, 0.9, 0.95, 0.89995, 0.91};
  for (double l : losses) {
    CHECK_FALSE(s.stopped_early);
    s = early_stop_update(s, l, cfg);
  }
  CHECK(s.best_epoch == 1);
  CHECK(s.best_val_loss == 0.9);
  CHECK(s.epochs_since_improvement == 3);
  CHECK(s.stopped_early);
  CHECK(s.epochs_observed == s.best_epoch + 1 + cfg.patience);

  TrainingState t;
  t = early_stop_update(t, 0.5, cfg);
  t = early_stop_update(t, 0.4998, cfg);
  CHECK(t.best_epoch == 1);
  CHECK(t.epochs_since_improvement == 0);
}

TEST_CASE("early stopping property: stop epoch is best epoch plus patience") {
  Rng rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    TrainingConfig cfg = schedule(100);
    cfg.patience = 1 + static_cast<int>(rng.below(10));
    TrainingState s;
    while (!s.stopped_early && s.epochs_observed < 300) s = early_stop_update(s, rng.uniform(), cfg);
    REQUIRE(s.stopped_early);
    CHECK(s.epochs_observed - 1 == s.best_epoch + cfg.patience);
  }
}

TEST_CASE("training config validation") {
  TrainingConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.min_lr = cfg.initial_lr;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  cfg = TrainingConfig{};
  cfg.patience = 0;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  cfg = TrainingConfig{};
  cfg.batch_size = 0;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  cfg = TrainingConfig{};
  cfg.adam.beta2 = 1.0;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
}

TEST_CASE("evaluate_pass with a perfect predictor") {
  const LabeledDataset ds = constant_images({0, 1, 2, 3, 4, 5, 6, 6, 3});
  const std::vector<std::size_t> idx{0, 1, 2, 3, 4, 5, 6, 7, 8};
  const EvalResult r = evaluate_pass(OneHotStub{}, ds, idx, 4);
  CHECK(r.accuracy == 1.0);
  CHECK(r.loss <= 1e-9);
  REQUIRE(r.predictions.size() == 9);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    CHECK(r.predictions[i].sample == idx[i]);
    CHECK(r.predictions[i].label == r.truths[i]);
    CHECK(r.predictions[i].confidence == 1.0);
  }
}

TEST_CASE("evaluate_pass with a uniform predictor") {
  const LabeledDataset ds = constant_images({0, 1, 2, 0, 4});
  const std::vector<std::size_t> idx{0, 1, 2, 3, 4};
  const EvalResult r = evaluate_pass(UniformStub{}, ds, idx, 2);
  CHECK(r.loss == doctest::Approx(std::log(7.0)).epsilon(1e-12));
  CHECK(r.accuracy == doctest::Approx(0.4));
  for (const Prediction& p : r.predictions) CHECK(p.label == 0);
  CHECK_THROWS_AS(evaluate_pass(UniformStub{}, ds, std::vector<std::size_t>{}), InvalidArgument);
}

TEST_CASE("evaluate_pass does not modify the model") {
  Fixture f;
  Model m = build_model(f.model_cfg);
  const auto before = model_state(m);
  const EvalResult a = evaluate_pass(m, f.ds, f.split.val, 3);
  const EvalResult b = evaluate_pass(m, f.ds, f.split.val, 5);
  const auto after = model_state(m);
  for (std::size_t i = 0; i < before.size(); ++i) CHECK(before[i].value == after[i].value);
  CHECK(a.loss == doctest::Approx(b.loss).epsilon(1e-12));
  CHECK(a.accuracy == b.accuracy);
}

TEST_CASE("a one-epoch run yields exactly one record") {
  Fixture f;
  f.cfg.max_epochs = 1;
  f.cfg.patience = 1;
  Model m = build_model(f.model_cfg);
  const TrainingState s = run_training(f.ds, f.split, m, AugmentConfig{}, f.weights(), f.cfg);
  CHECK(s.history.size() == 1);
  CHECK_FALSE(s.stopped_early);
  CHECK(s.history[0].lr == f.cfg.initial_lr);
  CHECK(s.best_epoch == 0);
}

TEST_CASE("training stops patience epochs after the last improvement") {
  Fixture f;
  f.cfg.max_epochs = 10;
  f.cfg.patience = 2;
  f.cfg.min_delta = 1e6;
  Model m = build_model(f.model_cfg);
  const TrainingState s = run_training(f.ds, f.split, m, AugmentConfig{}, f.weights(), f.cfg);
  CHECK(s.stopped_early);
  CHECK(s.best_epoch == 0);
  CHECK(s.history.size() == 3);
}

TEST_CASE("identical seeds give identical training histories") {
  Fixture f;
  Model a = build_model(f.model_cfg);
  Model b = build_model(f.model_cfg);
  TrainingState sa = run_training(f.ds, f.split, a, AugmentConfig{}, f.weights(), f.cfg);
  TrainingState sb = run_training(f.ds, f.split, b, AugmentConfig{}, f.weights(), f.cfg);
  CHECK(same_records(sa.history, sb.history));
  CHECK(same_state(a, b));
  for (std::size_t e = 0; e < sa.history.size(); ++e) {
    CHECK(sa.history[e].lr == cosine_lr(static_cast<int>(e), f.cfg));
    CHECK(std::isfinite(sa.history[e].train_loss));
  }
}

TEST_CASE("the best-epoch model is restored and checkpointed") {
  Fixture f;
  TempDir dir;
  Model m = build_model(f.model_cfg);
  const TrainingState s =
      run_training(f.ds, f.split, m, AugmentConfig{}, f.weights(), f.cfg, {dir.path(), std::nullopt, {}});
  REQUIRE(s.best_epoch >= 0);
  const Model best = load_checkpoint(dir / "best");
  CHECK(same_state(m, best));
  CHECK(evaluate_pass(m, f.ds, f.split.val, 8).loss == doctest::Approx(s.best_val_loss).epsilon(1e-12));
  CHECK(std::filesystem::exists(dir / "last" / kOptimizerFile));
}

TEST_CASE("resuming an interrupted run reproduces the uninterrupted run") {
  Fixture f;
  Model full = build_model(f.model_cfg);
  TrainingState uninterrupted = run_training(f.ds, f.split, full, AugmentConfig{}, f.weights(), f.cfg);

  TempDir dir;
  struct Interrupt {};
  Model first = build_model(f.model_cfg);
  TrainingOptions opts{dir.path(), std::nullopt, [](const EpochRecord& r, const TrainingState&) {
                         if (r.epoch == 1) throw Interrupt{};
                       }};
  CHECK_THROWS_AS(run_training(f.ds, f.split, first, AugmentConfig{}, f.weights(), f.cfg, opts), Interrupt);

  Model resumed = build_model(f.model_cfg);
  TrainingState s = run_training(f.ds, f.split, resumed, AugmentConfig{}, f.weights(), f.cfg,
                                 {std::nullopt, dir / "last", {}});
  CHECK(same_records(s.history, uninterrupted.history));
  CHECK(s.best_epoch == uninterrupted.best_epoch);
  CHECK(same_state(resumed, full));
}

TEST_CASE("empty partitions are rejected before training") {
  Fixture f;
  Model m = build_model(f.model_cfg);
  DatasetSplit no_val{f.split.train, {}, {}};
  CHECK_THROWS_WITH_AS(run_training(f.ds, no_val, m, AugmentConfig{}, f.weights(), f.cfg),
                       doctest::Contains("validation"), InvalidArgument);
}
