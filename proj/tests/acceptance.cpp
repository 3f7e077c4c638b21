#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <unistd.h>

#include "insideout/dataset.hpp"
#include "insideout/error.hpp"
#include "insideout/json_io.hpp"
#include "insideout/loss.hpp"
#include "insideout/metrics.hpp"
#include "insideout/pipeline.hpp"
#include "insideout/splitter.hpp"
#include "insideout/synthetic.hpp"
#include "insideout/trainer.hpp"
#include "insideout/transforms.hpp"

using namespace insideout;
namespace fs = std::filesystem;

namespace {

constexpr double kTableF1Tol = 0.0005;
constexpr double kTableMacroTol = 0.001;
constexpr double kPrintedMacroF1 = 0.590;
constexpr int kOracleSets = 1000;
constexpr int kOracleMaxSamples = 200;
constexpr double kOracleTol = 1e-12;
constexpr double kWeightIdentityTol = 1e-9;
constexpr double kUniformLossTol = 1e-9;
constexpr double kLossGradRelTol = 1e-4;
constexpr double kZeroImageTol = 1e-6;
constexpr double kOverfitAccuracy = 0.95;
constexpr int kOverfitMaxEpochs = 30;
constexpr std::size_t kSmokeSamples = 200;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct TableRow {
  const char* name;
  double precision, recall, f1;
};

constexpr std::array<TableRow, kNumClasses> kTable{{
    {"Anger", 0.567, 0.537, 0.552},
    {"Disgust", 0.361, 0.729, 0.483},
    {"Fear", 0.541, 0.340, 0.418},
    {"Happy", 0.884, 0.786, 0.832},
    {"Neutral", 0.519, 0.751, 0.614},
    {"Sadness", 0.546, 0.421, 0.474},
    {"Surprise", 0.669, 0.866, 0.755},
}};

Outcome reported_f1_consistency() {
  std::vector<std::string> bad;
  std::array<double, kNumClasses> printed{};
  double worst = 0.0;
  for (std::size_t i = 0; i < kTable.size(); ++i) {
    const TableRow& r = kTable[i];
    const double f1 = f1_from_precision_recall(r.precision, r.recall);
    const double err = std::abs(f1 - r.f1);
    worst = std::max(worst, err);
    if (err > kTableF1Tol) bad.push_back(fmt::format("{} {:.3f}/{:.3f} -> {:.4f} vs printed {:.3f}", r.name, r.precision,
                                                     r.recall, f1, r.f1));
    printed[i] = r.f1;
  }
  const double macro = macro_average(printed);
  const bool macro_ok = std::abs(macro - kPrintedMacroF1) <= kTableMacroTol;
  std::string detail = fmt::format("max |F1 error| {:.5f} (tol {}), macro of printed F1 {:.5f} vs {:.3f} (tol {})", worst,
                                   kTableF1Tol, macro, kPrintedMacroF1, kTableMacroTol);
  for (const std::string& b : bad) detail += "; mismatch: " + b;
  return {bad.empty() && macro_ok, detail};
}

Outcome metrics_oracle() {
  Rng rng(20240601);
  double worst = 0.0;
  int exact_failures = 0;
  for (int set = 0; set < kOracleSets; ++set) {
    const auto n = static_cast<std::size_t>(1 + rng.below(kOracleMaxSamples));
    const double hit = rng.uniform();
    std::vector<int> truths(n), preds(n);
    for (std::size_t i = 0; i < n; ++i) {
      truths[i] = static_cast<int>(rng.below(1 + rng.below(kNumClasses)));
      preds[i] = rng.uniform() < hit ? truths[i] : static_cast<int>(rng.below(kNumClasses));
    }
    const ClassificationReport rep = report_from_confusion(confusion_from_predictions(truths, preds));

    double mp = 0, mr = 0, mf = 0, wp = 0, wr = 0, wf = 0, correct = 0;
    for (int c = 0; c < static_cast<int>(kNumClasses); ++c) {
      double tp = 0, fp = 0, fn = 0;
      for (std::size_t i = 0; i < n; ++i) {
        tp += truths[i] == c && preds[i] == c;
        fp += truths[i] != c && preds[i] == c;
        fn += truths[i] == c && preds[i] != c;
      }
      const double p = tp + fp > 0 ? tp / (tp + fp) : 0.0;
      const double r = tp + fn > 0 ? tp / (tp + fn) : 0.0;
      const double f = p + r > 0 ? 2 * p * r / (p + r) : 0.0;
      const ClassMetrics& got = rep.per_class[static_cast<std::size_t>(c)];
      worst = std::max({worst, std::abs(got.precision - p), std::abs(got.recall - r), std::abs(got.f1 - f)});
      if (got.support != static_cast<std::int64_t>(tp + fn)) worst = std::max(worst, 1.0);
      const double s = (tp + fn) / static_cast<double>(n);
      mp += p / kNumClasses;
      mr += r / kNumClasses;
      mf += f / kNumClasses;
      wp += s * p;
      wr += s * r;
      wf += s * f;
      correct += tp;
    }
    const double acc = correct / static_cast<double>(n);
    worst = std::max({worst, std::abs(rep.accuracy - acc), std::abs(rep.macro_avg.precision - mp),
                      std::abs(rep.macro_avg.recall - mr), std::abs(rep.macro_avg.f1 - mf),
                      std::abs(rep.weighted_avg.precision - wp), std::abs(rep.weighted_avg.recall - wr),
                      std::abs(rep.weighted_avg.f1 - wf)});
    if (rep.weighted_avg.recall != rep.accuracy) ++exact_failures;
  }
  return {worst <= kOracleTol && exact_failures == 0,
          fmt::format("{} sets, max deviation from brute force {:.3g} (tol {}), weighted recall != accuracy in {} sets",
                      kOracleSets, worst, kOracleTol, exact_failures)};
}

Outcome class_weights() {
  ClassHistogram balanced;
  balanced.counts.fill(123);
  balanced.total = 123 * kNumClasses;
  const ClassWeights w = compute_class_weights(balanced);
  const bool ones = std::all_of(w.w.begin(), w.w.end(), [](double x) { return x == 1.0; });

  Rng rng(7);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    ClassHistogram h;
    for (auto& c : h.counts) {
      c = 1 + rng.below(trial % 2 ? 40000 : 50);
      h.total += c;
    }
    const ClassWeights cw = compute_class_weights(h);
    double s = 0.0;
    for (std::size_t c = 0; c < kNumClasses; ++c) s += static_cast<double>(h.counts[c]) / h.total * cw.w[c];
    worst = std::max(worst, std::abs(s - 1.0));
  }

  bool zero_rejected = false;
  ClassHistogram zero = balanced;
  zero.total -= zero.counts[4];
  zero.counts[4] = 0;
  try {
    compute_class_weights(zero);
  } catch (const Error&) {
    zero_rejected = true;
  }
  return {ones && worst <= kWeightIdentityTol && zero_rejected,
          fmt::format("balanced -> all 1: {}, max |sum(n_c/N w_c) - 1| {:.3g} (tol {}), zero count rejected: {}", ones,
                      worst, kWeightIdentityTol, zero_rejected)};
}

Outcome loss_correctness() {
  const Matrix uniform = Matrix::Constant(8, 7, 1.0 / 7.0);
  const std::vector<int> targets{0, 1, 2, 3, 4, 5, 6, 2};
  const double l = weighted_cross_entropy(uniform, targets, ClassWeights::uniform(), Reduction::WeightedMean);
  const double uerr = std::abs(l - std::log(7.0));

  Rng rng(99);
  double worst = 0.0;
  const double eps = 1e-6;
  for (int trial = 0; trial < 50; ++trial) {
    Matrix z(8, 7);
    for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = rng.normal() * 3.0;
    std::vector<int> t(8);
    for (int& x : t) x = static_cast<int>(rng.below(kNumClasses));
    ClassWeights w = ClassWeights::uniform();
    for (double& x : w.w) x = rng.uniform(0.2, 5.0);
    const Reduction red = trial % 2 ? Reduction::Sum : Reduction::WeightedMean;
    const Matrix g = weighted_cross_entropy_from_logits(z, t, w, red).grad_logits;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      Matrix zp = z, zm = z;
      zp.data()[i] += eps;
      zm.data()[i] -= eps;
      const double num = (weighted_cross_entropy_from_logits(zp, t, w, red).loss -
                          weighted_cross_entropy_from_logits(zm, t, w, red).loss) /
                         (2 * eps);
      const double scale = std::max({std::abs(num), std::abs(g.data()[i]), 1e-3});
      worst = std::max(worst, std::abs(num - g.data()[i]) / scale);
    }
  }
  return {uerr <= kUniformLossTol && worst <= kLossGradRelTol,
          fmt::format("|uniform loss - ln 7| {:.3g} (tol {}), max relative gradient error {:.3g} (tol {})", uerr,
                      kUniformLossTol, worst, kLossGradRelTol)};
}

Outcome schedule_stopping() {
  int failures = 0;
  for (int e = 1; e <= 300; ++e) {
    TrainingConfig cfg;
    cfg.max_epochs = e;
    cfg.patience = std::min(10, e);
    if (cosine_lr(0, cfg) != 1e-3) ++failures;
    if (e > 1 && cosine_lr(e - 1, cfg) != cfg.min_lr) ++failures;
    for (int k = 1; k < e; ++k) {
      if (cosine_lr(k, cfg) > cosine_lr(k - 1, cfg)) ++failures;
    }
  }

  Rng rng(5);
  int stop_failures = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    TrainingConfig cfg;
    cfg.patience = 1 + static_cast<int>(rng.below(15));
    cfg.min_delta = trial % 3 ? 1e-4 : 0.0;
    std::vector<double> losses;
    double level = 2.0;
    for (int i = 0; i < 200; ++i) {
      level -= rng.uniform() < 0.4 ? rng.uniform(0.0, 0.05) : 0.0;
      losses.push_back(level + rng.uniform(0.0, 0.02));
    }
    int best = -1;
    double best_loss = std::numeric_limits<double>::infinity();
    int expected_stop = -1;
    for (int i = 0; i < static_cast<int>(losses.size()); ++i) {
      if (losses[static_cast<std::size_t>(i)] < best_loss - cfg.min_delta) {
        best_loss = losses[static_cast<std::size_t>(i)];
        best = i;
      }
      if (i - best == cfg.patience) {
        expected_stop = i;
        break;
      }
    }
    TrainingState s;
    int stop = -1;
    for (int i = 0; i < static_cast<int>(losses.size()) && !s.stopped_early; ++i) {
      s = early_stop_update(s, losses[static_cast<std::size_t>(i)], cfg);
      if (s.stopped_early) stop = i;
    }
    if (stop != expected_stop || (stop >= 0 && stop != s.best_epoch + cfg.patience)) ++stop_failures;
  }
  return {failures == 0 && stop_failures == 0,
          fmt::format("schedule violations over max_epochs 1..300: {}, early-stop mismatches over 2000 scripts: {}",
                      failures, stop_failures)};
}

LabeledDataset label_only_dataset(const std::vector<int>& labels) {
  std::vector<Sample> samples;
  samples.reserve(labels.size());
  const GrayImage img(kFerSide, kFerSide, 0);
  for (int l : labels) samples.push_back({img, static_cast<Emotion>(l), Usage::Training});
  return LabeledDataset(std::move(samples), "synthetic");
}

Outcome split_stratification() {
  Rng rng(31);
  double worst = 0.0;  // in samples
  int structural = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const double skew = 1.0 + rng.uniform() * 49.0;
    const auto n = static_cast<std::size_t>(100 + rng.below(9901));
    std::array<double, kNumClasses> share{};
    double total_share = 0.0;
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      share[c] = c == 0 ? skew : 1.0 + rng.uniform() * (skew - 1.0);
      total_share += share[c];
    }
    std::vector<int> labels;
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      const auto count = std::max<std::size_t>(10, static_cast<std::size_t>(n * share[c] / total_share));
      labels.insert(labels.end(), count, static_cast<int>(c));
    }
    Rng mix(trial);
    mix.shuffle(std::span<int>(labels));
    const LabeledDataset ds = label_only_dataset(labels);
    SplitSpec spec;
    spec.seed = static_cast<std::uint64_t>(trial);
    const DatasetSplit split = make_split(ds, spec);
    if (!is_partition(split, ds.size())) ++structural;
    if (!(make_split(ds, spec) == split)) ++structural;

    const ClassHistogram all = class_histogram(ds);
    for (const auto* part : {&split.train, &split.val, &split.test}) {
      const ClassHistogram h = class_histogram(ds, *part);
      for (std::size_t c = 0; c < kNumClasses; ++c) {
        const double expected = static_cast<double>(part->size()) * all.counts[c] / all.total;
        worst = std::max(worst, std::abs(static_cast<double>(h.counts[c]) - expected));
      }
    }
  }
  return {worst <= 1.0 && structural == 0,
          fmt::format("40 datasets (skew <= 50:1, N <= 10000): max class deviation {:.4f} samples (tol 1), "
                      "partition/determinism failures {}",
                      worst, structural)};
}

Outcome transform_contracts() {
  Rng rng(12);
  int identity_failures = 0, shape_failures = 0;
  for (int trial = 0; trial < 30; ++trial) {
    const int h = 16 + static_cast<int>(rng.below(200));
    const int w = 16 + static_cast<int>(rng.below(200));
    GrayImage img(h, w);
    for (auto& p : img.pixels) p = static_cast<std::int16_t>(rng.below(256));
    const ImageTensor eval = preprocess_eval(img);
    const ImageTensor ident = preprocess_train(img, AugmentConfig::identity(rng.below(1000)), {rng.below(99), 1});
    if (eval.data != ident.data) ++identity_failures;
    AugmentConfig aug;
    aug.seed = trial;
    const ImageTensor train = preprocess_train(img, aug, {static_cast<std::uint64_t>(trial), 0});
    for (const ImageTensor* t : {&eval, &ident, &train}) {
      if (t->data.size() != ImageTensor::kSize) ++shape_failures;
    }
  }
  const ImageTensor zero = preprocess_eval(GrayImage(kFerSide, kFerSide, 0));
  double worst = 0.0;
  const std::size_t plane = ImageTensor::kSize / 3;
  for (std::size_t c = 0; c < 3; ++c) {
    const double expected = (0.0 - kImageNetMean[c]) / kImageNetStd[c];
    for (std::size_t i = 0; i < plane; ++i) worst = std::max(worst, std::abs(zero.data[c * plane + i] - expected));
  }
  return {identity_failures == 0 && shape_failures == 0 && worst <= kZeroImageTol,
          fmt::format("identity != eval in {} of 30, non 3x224x224 outputs {}, zero image max error {:.3g} (tol {})",
                      identity_failures, shape_failures, worst, kZeroImageTol)};
}

LabeledDataset concat(const LabeledDataset& a, const LabeledDataset& b) {
  std::vector<Sample> s(a.samples().begin(), a.samples().end());
  s.insert(s.end(), b.samples().begin(), b.samples().end());
  return LabeledDataset(std::move(s), "synthetic");
}

std::vector<std::size_t> iota(std::size_t from, std::size_t to) {
  std::vector<std::size_t> v;
  for (std::size_t i = from; i < to; ++i) v.push_back(i);
  return v;
}

Outcome tiny_overfit() {
  const auto started = std::chrono::steady_clock::now();

  const LabeledDataset pool = make_synthetic(balanced_synthetic(64 / kNumClasses + 1, 1));
  std::vector<Sample> first(pool.samples().begin(), pool.samples().begin() + 64);
  const LabeledDataset small(std::move(first), "synthetic");
  DatasetSplit split{iota(0, 64), iota(0, 64), {}};
  TrainingConfig cfg;
  cfg.batch_size = 16;
  cfg.max_epochs = kOverfitMaxEpochs;
  cfg.patience = kOverfitMaxEpochs;
  cfg.augment = false;
  cfg.seed = 1;
  ModelConfig mc;
  mc.seed = 1;
  Model model = build_model(mc);
  run_training(small, split, model, AugmentConfig{}, compute_class_weights(class_histogram(small)), cfg);
  const double train_acc = evaluate_pass(model, small, split.train, 64).accuracy;

  constexpr double kNoise = 20.0;
  SyntheticSpec spec;
  spec.per_class.fill(40);
  spec.per_class[to_index(Emotion::Disgust)] = 4;
  spec.noise = kNoise;
  spec.seed = 11;
  const LabeledDataset train = make_synthetic(spec);
  const LabeledDataset held = make_synthetic(balanced_synthetic(20, 12, kNoise));
  const LabeledDataset both = concat(train, held);
  const DatasetSplit isplit{iota(0, train.size()), iota(train.size(), both.size()), {}};
  const ClassWeights weights = compute_class_weights(class_histogram(both, isplit.train));

  const auto minority_recall = [&](bool weighted) {
    TrainingConfig tc;
    tc.batch_size = 16;
    tc.max_epochs = 12;
    tc.patience = 12;
    tc.augment = false;
    tc.seed = 5;
    tc.use_class_weights = weighted;
    ModelConfig m;
    m.seed = 3;
    Model net = build_model(m);
    run_training(both, isplit, net, AugmentConfig{}, weights, tc);
    const EvalResult r = evaluate_pass(net, both, isplit.val, 64);
    std::vector<int> preds;
    for (const Prediction& p : r.predictions) preds.push_back(p.label);
    return report_from_confusion(confusion_from_predictions(r.truths, preds))
        .per_class[static_cast<std::size_t>(to_index(Emotion::Disgust))]
        .recall;
  };
  const double unweighted = minority_recall(false);
  const double weighted = minority_recall(true);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return {train_acc >= kOverfitAccuracy && weighted >= unweighted && secs <= 120.0,
          fmt::format("64-sample train accuracy {:.3f} (need >= {}), Disgust recall at 10:1 weighted {:.3f} vs "
                      "unweighted {:.3f}, {:.0f} s (limit 120)",
                      train_acc, kOverfitAccuracy, weighted, unweighted, secs)};
}

std::string quoted(const fs::path& p) { return "'" + p.string() + "'"; }

Outcome end_to_end_smoke(const fs::path& bin_dir) {
  const auto started = std::chrono::steady_clock::now();
  const fs::path work = fs::temp_directory_path() / fmt::format("insideout_smoke_{}", ::getpid());
  fs::remove_all(work);
  fs::create_directories(work);
  const fs::path cli = bin_dir / "insideout";
  const fs::path config = work / "run.json";
  write_json_file(config, {{"dataset", "subset.csv"},
                           {"output_dir", "run"},
                           {"seed", 7},
                           {"training", {{"max_epochs", 3}, {"batch_size", 16}, {"patience", 3}}}});

  std::vector<std::string> failed;
  const auto run = [&](const std::string& label, const std::string& cmd) {
    const int rc = std::system((cmd + " > " + quoted(work / (label + ".log")) + " 2>&1").c_str());
    if (rc != 0) failed.push_back(fmt::format("{} exited {}", label, rc));
  };
  const std::string common = " --config " + quoted(config) + " --quiet";
  run("synth", quoted(bin_dir / "insideout-synth") + " " + quoted(work / "subset.csv") +
                   fmt::format(" --samples {} --seed 3", kSmokeSamples));
  run("prepare", quoted(cli) + " prepare" + common + " --emit-samples 4");
  run("train", quoted(cli) + " train" + common);
  run("evaluate", quoted(cli) + " evaluate" + common);
  const fs::path samples = work / "run" / kSamplesDir;
  std::string image;
  if (fs::is_directory(samples)) {
    for (const auto& e : fs::directory_iterator(samples)) {
      image = quoted(e.path());
      break;
    }
  }
  run("infer", quoted(cli) + " infer" + common + " --samples 8 " + image);

  std::vector<std::string> missing;
  for (const char* f : {kSplitFile, kHistogramCsv, kHistogramPng, kValidationFile, kAugmentedPng, kManifestFile,
                        kCurvesCsv, kCurvesAccPng, kCurvesLossPng, kReportTxt, kReportJson, kConfusionCsv,
                        kConfusionPng, kInferenceJson, kInferenceCsv, kInferenceGridPng}) {
    const fs::path p = work / "run" / f;
    if (!fs::exists(p) || fs::file_size(p) == 0) missing.emplace_back(f);
  }
  for (const char* f : {"best", "last"}) {
    if (!fs::exists(work / "run" / kCheckpointDir / f / "params.bin")) missing.push_back(fmt::format("checkpoint/{}", f));
  }
  if (image.empty()) missing.emplace_back("samples/*.png");

  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  std::string detail = fmt::format("{} synthetic samples, 5 commands, {} failed, {} artifacts missing, {:.0f} s (limit 180)",
                                   kSmokeSamples, failed.size(), missing.size(), secs);
  for (const std::string& f : failed) detail += "; " + f;
  for (const std::string& m : missing) detail += "; missing " + m;
  const bool pass = failed.empty() && missing.empty() && secs <= 180.0;
  if (pass) fs::remove_all(work);
  else detail += "; logs in " + work.string();
  return {pass, detail};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  std::string only;
  fs::path bin_dir;
  app.add_option("--only", only, "run a single criterion");
  app.add_option("--bin-dir", bin_dir, "directory holding the insideout executables");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"reported_f1_consistency", reported_f1_consistency},
      {"metrics_oracle", metrics_oracle},
      {"class_weights", class_weights},
      {"loss_correctness", loss_correctness},
      {"schedule_stopping", schedule_stopping},
      {"split_stratification", split_stratification},
      {"transform_contracts", transform_contracts},
      {"tiny_overfit", tiny_overfit},
      {"end_to_end_smoke", [&] { return end_to_end_smoke(bin_dir); }},
  };

  int failures = 0, ran = 0;
  for (const auto& [name, check] : criteria) {
    if (!only.empty() && name != only) continue;
    ++ran;
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, fmt::format("threw: {}", e.what())};
    }
    fmt::print("{} {}: {}\n", o.pass ? "PASS" : "FAIL", name, o.detail);
    std::fflush(stdout);
    failures += !o.pass;
  }
  if (ran == 0) {
    fmt::print(stderr, "unknown criterion '{}'\n", only);
    return 2;
  }
  return failures == 0 ? 0 : 1;
}
