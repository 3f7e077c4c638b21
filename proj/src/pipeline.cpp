#include "insideout/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include <fmt/format.h>
#include <opencv2/imgcodecs.hpp>

#include "insideout/checkpoint.hpp"
#include "insideout/dataset.hpp"
#include "insideout/digest.hpp"
#include "insideout/error.hpp"
#include "insideout/loss.hpp"
#include "insideout/plots.hpp"
#include "insideout/splitter.hpp"
#include "insideout/trainer.hpp"

namespace insideout {

namespace fs = std::filesystem;

namespace {

std::vector<int> display_order() {
  std::vector<int> order;
  for (Emotion e : kDisplayOrder) order.push_back(to_index(e));
  return order;
}

std::vector<std::string> display_names() {
  std::vector<std::string> names;
  for (Emotion e : kDisplayOrder) names.emplace_back(to_name(e));
  return names;
}

void require_fresh(const fs::path& dir, std::initializer_list<const char*> names, bool overwrite) {
  if (overwrite) return;
  for (const char* name : names) {
    if (fs::exists(dir / name)) {
      throw Error(fmt::format("'{}' already exists; pass --overwrite to replace it", (dir / name).string()));
    }
  }
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
  out << text;
  if (!out) throw Error(fmt::format("failed writing '{}'", path.string()));
}

struct PreparedSplit {
  DatasetSplit split;
  json record;
};

json split_record(const RunConfig& cfg, const LabeledDataset& ds, const DatasetSplit& split) {
  const json partitions = split;
  return {{"split_spec", cfg.split},
          {"dataset",
           {{"path", cfg.dataset.string()},
            {"samples", ds.size()},
            {"source_digest", ds.source_digest()},
            {"content_digest", ds.content_digest()}}},
          {"sizes", {{"train", split.train.size()}, {"val", split.val.size()}, {"test", split.test.size()}}},
          {"digest", sha256_hex(partitions.dump())},
          {"partitions", partitions}};
}

PreparedSplit load_split(const RunConfig& cfg, const LabeledDataset& ds) {
  const fs::path path = cfg.output_dir / kSplitFile;
  if (!fs::exists(path)) {
    throw Error(fmt::format("'{}' not found; run `insideout prepare` first", path.string()));
  }
  json record = read_json_file(path);
  if (record.at("dataset").at("content_digest").get<std::string>() != ds.content_digest()) {
    throw Error(fmt::format("dataset '{}' changed since prepare (content digest mismatch); rerun prepare",
                            cfg.dataset.string()));
  }
  DatasetSplit split = record.at("partitions").get<DatasetSplit>();
  if (!is_partition(split, ds.size())) {
    throw Error(fmt::format("'{}' is not a partition of the {} dataset samples", path.string(), ds.size()));
  }
  return {std::move(split), std::move(record)};
}

const std::vector<std::size_t>& partition_of(const DatasetSplit& split, const std::string& name) {
  if (name == "train") return split.train;
  if (name == "val") return split.val;
  if (name == "test") return split.test;
  throw InvalidArgument(fmt::format("unknown partition '{}' (train|val|test)", name));
}

fs::path checkpoint_path(const RunConfig& cfg, const CommandOptions& opts) {
  return opts.checkpoint ? *opts.checkpoint : cfg.output_dir / kCheckpointDir / "best";
}

std::string histogram_csv(const LabeledDataset& ds, const DatasetSplit& split) {
  const ClassHistogram all = class_histogram(ds);
  const ClassHistogram train = class_histogram(ds, split.train);
  const ClassHistogram val = class_histogram(ds, split.val);
  const ClassHistogram test = class_histogram(ds, split.test);
  std::string out = "class,index,total,train,val,test\n";
  for (Emotion e : kDisplayOrder) {
    const auto c = static_cast<std::size_t>(to_index(e));
    out += fmt::format("{},{},{},{},{},{}\n", to_name(e), c, all.counts[c], train.counts[c], val.counts[c],
                       test.counts[c]);
  }
  out += fmt::format("total,,{},{},{},{}\n", all.total, train.total, val.total, test.total);
  return out;
}

std::vector<Tile> augmented_tiles(const LabeledDataset& ds, const DatasetSplit& split, const AugmentConfig& aug) {
  constexpr int kViews = 3;
  std::vector<Tile> tiles;
  for (Emotion e : kDisplayOrder) {
    const auto it = std::find_if(split.train.begin(), split.train.end(),
                                 [&](std::size_t i) { return ds[i].label == e; });
    if (it == split.train.end()) continue;
    const GrayImage& img = ds[*it].image;
    tiles.push_back(gray_tile(img.pixels, img.height, img.width, fmt::format("{} #{}\noriginal", to_name(e), *it)));
    for (int v = 0; v < kViews; ++v) {
      const ImageTensor t = preprocess_train(img, aug, {*it, static_cast<std::uint64_t>(v)});
      tiles.push_back({kInputSide, kInputSide, to_rgb8(t), fmt::format("{}\naugmented, epoch {}", to_name(e), v)});
    }
  }
  return tiles;
}

std::string curves_csv(const std::vector<EpochRecord>& history) {
  std::string out = "epoch,train_loss,val_loss,train_acc,val_acc,lr,wall_time\n";
  for (const EpochRecord& r : history) {
    out += fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.6f}\n", r.epoch, r.train_loss, r.val_loss,
                       r.train_acc, r.val_acc, r.lr, r.wall_time);
  }
  return out;
}

void write_curves(const fs::path& dir, const std::vector<EpochRecord>& history) {
  Series train_acc{"train", {}}, val_acc{"validation", {}}, train_loss{"train", {}}, val_loss{"validation", {}};
  for (const EpochRecord& r : history) {
    train_acc.values.push_back(r.train_acc);
    val_acc.values.push_back(r.val_acc);
    train_loss.values.push_back(r.train_loss);
    val_loss.values.push_back(r.val_loss);
  }
  write_text_file(dir / kCurvesCsv, curves_csv(history));
  write_line_chart(dir / kCurvesAccPng, "Training and validation accuracy", "epoch", "accuracy",
                   {train_acc, val_acc});
  write_line_chart(dir / kCurvesLossPng, "Training and validation loss", "epoch", "loss", {train_loss, val_loss});
}

void write_report_views(const fs::path& dir, const ClassificationReport& report, const ConfusionMatrix& cm,
                        const std::string& partition) {
  write_text_file(dir / kReportTxt, format_report_text(report, partition));
  write_text_file(dir / kConfusionCsv, confusion_csv(cm));
  write_confusion_heatmap(dir / kConfusionPng, fmt::format("Confusion matrix ({} partition)", partition), cm,
                          display_order());
}

void log(const CommandOptions& opts, const std::string& line) {
  if (!opts.quiet) fmt::print(stderr, "{}\n", line);
}

std::optional<GrayImage> read_gray(const fs::path& path, std::string& error) {
  if (!fs::is_regular_file(path)) {
    error = "file not found";
    return std::nullopt;
  }
  const cv::Mat mat = cv::imread(path.string(), cv::IMREAD_GRAYSCALE);
  if (mat.empty()) {
    error = "unreadable or unsupported image";
    return std::nullopt;
  }
  GrayImage img(mat.rows, mat.cols);
  for (int y = 0; y < mat.rows; ++y) {
    for (int x = 0; x < mat.cols; ++x) img.at(y, x) = mat.at<std::uint8_t>(y, x);
  }
  return img;
}

}  // namespace

std::vector<TopK> top_k_of(const Matrix& probs, Eigen::Index row, int k) {
  if (k < 1) throw InvalidArgument("top_k must be >= 1");
  std::vector<int> idx(static_cast<std::size_t>(probs.cols()));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return probs(row, a) > probs(row, b); });
  std::vector<TopK> out;
  for (int i = 0; i < std::min<int>(k, static_cast<int>(idx.size())); ++i) {
    out.push_back({idx[static_cast<std::size_t>(i)], probs(row, idx[static_cast<std::size_t>(i)])});
  }
  return out;
}

std::string format_report_text(const ClassificationReport& report, const std::string& partition) {
  std::string out = fmt::format("Classification report ({} classes, partition: {}, {} samples)\n\n", kNumClasses,
                                partition, report.total);
  out += fmt::format("{:>14} {:>10} {:>10} {:>10} {:>10}\n\n", "", "precision", "recall", "f1-score", "support");
  for (Emotion e : kDisplayOrder) {
    const ClassMetrics& m = report.per_class[static_cast<std::size_t>(to_index(e))];
    out += fmt::format("{:>14} {:>10.3f} {:>10.3f} {:>10.3f} {:>10}\n", to_name(e), m.precision, m.recall, m.f1,
                       m.support);
  }
  out += '\n';
  out += fmt::format("{:>14} {:>10} {:>10} {:>10.3f} {:>10}\n", "accuracy", "", "", report.accuracy, report.total);
  for (const auto& [name, avg] : {std::pair{"macro avg", report.macro_avg}, {"weighted avg", report.weighted_avg}}) {
    out += fmt::format("{:>14} {:>10.3f} {:>10.3f} {:>10.3f} {:>10}\n", name, avg.precision, avg.recall, avg.f1,
                       report.total);
  }
  if (!report.warnings.empty()) {
    out += "\nwarnings:\n";
    for (const std::string& w : report.warnings) out += fmt::format("  - {}\n", w);
  }
  return out;
}

std::string confusion_csv(const ConfusionMatrix& cm) {
  const std::vector<int> order = display_order();
  std::string out = "true\\predicted";
  for (int c : order) out += fmt::format(",{}", kEmotionNames[static_cast<std::size_t>(c)]);
  out += '\n';
  for (int r : order) {
    out += kEmotionNames[static_cast<std::size_t>(r)];
    for (int c : order) out += fmt::format(",{}", cm.m[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]);
    out += '\n';
  }
  return out;
}

RunConfig resolve_config(const CommandOptions& opts) {
  if (opts.config_path.empty()) throw InvalidArgument("--config is required");
  RunConfig cfg = load_run_config(opts.config_path);
  if (opts.seed) override_seed(cfg, *opts.seed);
  return cfg;
}

int cmd_prepare(const CommandOptions& opts) {
  const RunConfig cfg = resolve_config(opts);
  const fs::path& out = cfg.output_dir;
  require_fresh(out, {kSplitFile, kHistogramCsv, kHistogramPng, kValidationFile, kAugmentedPng}, opts.overwrite);
  if (opts.emit_samples > 0) require_fresh(out, {kSamplesDir}, opts.overwrite);

  const LabeledDataset ds = parse_fer_csv(cfg.dataset);
  const ValidationReport validation = validate_dataset(ds);
  const DatasetSplit split = make_split(ds, cfg.split);
  const ClassHistogram hist = class_histogram(ds);
  log(opts, fmt::format("loaded {} samples from {}; split train={} val={} test={}", ds.size(),
                        cfg.dataset.string(), split.train.size(), split.val.size(), split.test.size()));
  if (!validation.duplicates.empty()) {
    log(opts, fmt::format("warning: {} duplicate image pairs (see {})", validation.duplicates.size(), kValidationFile));
  }

  std::vector<double> bars;
  for (Emotion e : kDisplayOrder) bars.push_back(static_cast<double>(hist.counts[static_cast<std::size_t>(to_index(e))]));
  const std::vector<Tile> tiles = augmented_tiles(ds, split, cfg.augment);

  fs::create_directories(out);
  write_json_file(out / kSplitFile, split_record(cfg, ds, split));
  write_json_file(out / kValidationFile, json(validation));
  write_text_file(out / kHistogramCsv, histogram_csv(ds, split));
  write_bar_chart(out / kHistogramPng, fmt::format("Class distribution ({} images)", hist.total), display_names(),
                  bars);
  write_tile_grid(out / kAugmentedPng, tiles, 4);
  if (opts.emit_samples > 0) {
    fs::remove_all(out / kSamplesDir);
    fs::create_directories(out / kSamplesDir);
    const std::size_t n = std::min(opts.emit_samples, split.train.size());
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t i = split.train[k];
      const ImageTensor t = preprocess_train(ds[i].image, cfg.augment, {i, 0});
      write_rgb_image(out / kSamplesDir / fmt::format("{:05d}_{}.png", i, to_name(ds[i].label)),
                      {kInputSide, kInputSide, to_rgb8(t), ""});
    }
  }
  log(opts, fmt::format("wrote prepare artifacts to {}", out.string()));
  return 0;
}

int cmd_train(const CommandOptions& opts) {
  const RunConfig cfg = resolve_config(opts);
  const fs::path& out = cfg.output_dir;
  if (!opts.resume) {
    require_fresh(out, {kManifestFile, kCurvesCsv, kCurvesAccPng, kCurvesLossPng, kCheckpointDir}, opts.overwrite);
  }

  const LabeledDataset ds = parse_fer_csv(cfg.dataset);
  const PreparedSplit prepared = load_split(cfg, ds);
  const ClassHistogram train_hist = class_histogram(ds, prepared.split.train);
  const ClassWeights weights = compute_class_weights(train_hist);
  Model model = build_model(cfg.model);

  TrainingOptions options;
  options.checkpoint_dir = out / kCheckpointDir;
  options.resume_from = opts.resume;
  options.on_epoch = [&](const EpochRecord& r, const TrainingState& s) {
    log(opts, fmt::format("epoch {:>3}/{}  lr {:.3e}  train loss {:.4f} acc {:.3f}  val loss {:.4f} acc {:.3f}  "
                          "({:.1f}s){}",
                          r.epoch + 1, cfg.training.max_epochs, r.lr, r.train_loss, r.train_acc, r.val_loss,
                          r.val_acc, r.wall_time, s.best_epoch == r.epoch ? "  *" : ""));
  };
  fs::create_directories(out);
  const TrainingState state =
      run_training(ds, prepared.split, model, cfg.augment, weights, cfg.training, options);

  json manifest = {
      {"config", to_json(cfg)},
      {"seeds",
       {{"run", cfg.seed},
        {"split", cfg.split.seed},
        {"augment", cfg.augment.seed},
        {"model", cfg.model.seed},
        {"training", cfg.training.seed}}},
      {"deterministic", opts.deterministic},
      {"dataset", prepared.record.at("dataset")},
      {"split", {{"digest", prepared.record.at("digest")}, {"sizes", prepared.record.at("sizes")}}},
      {"train_class_histogram", train_hist},
      {"class_weights", weights},
      {"training", state},
      {"best_checkpoint", (fs::path(kCheckpointDir) / "best").string()},
      {"last_checkpoint", (fs::path(kCheckpointDir) / "last").string()},
  };
  write_json_file(out / kManifestFile, manifest);
  write_curves(out, state.history);
  log(opts, fmt::format("best epoch {} (val loss {:.4f}){}; checkpoint in {}", state.best_epoch + 1,
                        state.best_val_loss, state.stopped_early ? ", stopped early" : "",
                        (out / kCheckpointDir / "best").string()));
  return 0;
}

int cmd_evaluate(const CommandOptions& opts) {
  const RunConfig cfg = resolve_config(opts);
  const fs::path& out = cfg.output_dir;
  require_fresh(out, {kReportTxt, kReportJson, kConfusionCsv, kConfusionPng}, opts.overwrite);

  const LabeledDataset ds = parse_fer_csv(cfg.dataset);
  const PreparedSplit prepared = load_split(cfg, ds);
  const auto& indices = partition_of(prepared.split, opts.partition);
  if (indices.empty()) throw InvalidArgument(fmt::format("partition '{}' is empty", opts.partition));
  const fs::path ckpt = checkpoint_path(cfg, opts);
  const Model model = load_checkpoint(ckpt);

  const EvalResult result = evaluate_pass(model, ds, indices, cfg.training.batch_size);
  std::vector<int> predicted;
  predicted.reserve(result.predictions.size());
  for (const Prediction& p : result.predictions) predicted.push_back(p.label);
  const ConfusionMatrix cm = confusion_from_predictions(result.truths, predicted);
  const ClassificationReport report = report_from_confusion(cm);

  fs::create_directories(out);
  write_json_file(out / kReportJson, {{"partition", opts.partition},
                                      {"checkpoint", ckpt.string()},
                                      {"samples", indices.size()},
                                      {"loss", result.loss},
                                      {"report", report},
                                      {"confusion", cm}});
  write_report_views(out, report, cm, opts.partition);
  log(opts, fmt::format("{} partition: accuracy {:.4f}, macro F1 {:.4f} over {} samples", opts.partition,
                        report.accuracy, report.macro_avg.f1, report.total));
  return 0;
}

int cmd_infer(const CommandOptions& opts) {
  const RunConfig cfg = resolve_config(opts);
  const fs::path& out = cfg.output_dir;
  if (opts.images.empty() && opts.samples == 0) {
    throw InvalidArgument("infer needs image paths or --samples N");
  }
  if (opts.top_k < 1 || opts.top_k > static_cast<int>(kNumClasses)) {
    throw InvalidArgument(fmt::format("--top-k must be in [1, {}]", kNumClasses));
  }
  require_fresh(out, {kInferenceJson, kInferenceCsv, kInferenceGridPng}, opts.overwrite);
  const Model model = load_checkpoint(checkpoint_path(cfg, opts));

  struct Input {
    std::string ref;
    GrayImage image;
    std::optional<int> truth;
  };
  std::vector<Input> inputs;
  json errors = json::array();
  for (const fs::path& p : opts.images) {
    std::string error;
    if (auto img = read_gray(p, error)) {
      inputs.push_back({p.string(), std::move(*img), std::nullopt});
    } else {
      errors.push_back({{"image", p.string()}, {"error", error}});
      fmt::print(stderr, "error: {}: {}\n", p.string(), error);
    }
  }
  if (opts.samples > 0) {
    const LabeledDataset ds = parse_fer_csv(cfg.dataset);
    const PreparedSplit prepared = load_split(cfg, ds);
    const auto& indices = partition_of(prepared.split, opts.partition);
    const std::size_t n = std::min(opts.samples, indices.size());
    for (std::size_t k = 0; k < n; ++k) {
      const Sample& s = ds[indices[k]];
      inputs.push_back({fmt::format("dataset:{}", indices[k]), s.image, to_index(s.label)});
    }
  }
  if (inputs.empty()) throw Error("no readable inputs");

  std::vector<InferenceResult> results;
  constexpr std::size_t kChunk = 32;
  for (std::size_t start = 0; start < inputs.size(); start += kChunk) {
    const std::size_t count = std::min(kChunk, inputs.size() - start);
    std::vector<ImageTensor> tensors;
    for (std::size_t i = 0; i < count; ++i) tensors.push_back(preprocess_eval(inputs[start + i].image));
    const Matrix probs = model.predict_proba(ImageBatch::from(tensors));
    for (std::size_t i = 0; i < count; ++i) {
      const auto row = static_cast<Eigen::Index>(i);
      InferenceResult r;
      r.image = inputs[start + i].ref;
      r.top_k = top_k_of(probs, row, opts.top_k);
      r.label = r.top_k.front().label;
      r.confidence = r.top_k.front().probability;
      r.true_label = inputs[start + i].truth;
      results.push_back(std::move(r));
    }
  }

  json items = json::array();
  std::string csv = "image,label,confidence,true_label,top_k\n";
  std::vector<Tile> tiles;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const InferenceResult& r = results[i];
    json top = json::array();
    std::string top_text;
    for (const TopK& t : r.top_k) {
      top.push_back({{"label", kEmotionNames[static_cast<std::size_t>(t.label)]}, {"probability", t.probability}});
      top_text += fmt::format("{}{}:{:.6f}", top_text.empty() ? "" : ";", kEmotionNames[static_cast<std::size_t>(t.label)],
                              t.probability);
    }
    const std::string label(kEmotionNames[static_cast<std::size_t>(r.label)]);
    const std::string truth = r.true_label ? std::string(kEmotionNames[static_cast<std::size_t>(*r.true_label)]) : "";
    items.push_back({{"image", r.image},
                     {"label", label},
                     {"label_index", r.label},
                     {"confidence", r.confidence},
                     {"true_label", r.true_label ? json(truth) : json(nullptr)},
                     {"top_k", top}});
    csv += fmt::format("\"{}\",{},{:.6f},{},{}\n", r.image, label, r.confidence, truth, top_text);
    const GrayImage& img = inputs[i].image;
    std::string caption = fmt::format("{} {:.2f}", label, r.confidence);
    if (r.true_label) caption += fmt::format("\ntrue: {}", truth);
    tiles.push_back(gray_tile(img.pixels, img.height, img.width, std::move(caption)));
  }

  fs::create_directories(out);
  write_json_file(out / kInferenceJson, {{"results", items}, {"errors", errors}});
  write_text_file(out / kInferenceCsv, csv);
  write_tile_grid(out / kInferenceGridPng, tiles, 4);
  log(opts, fmt::format("inferred {} images ({} failed)", results.size(), errors.size()));
  return errors.empty() ? 0 : kPartialFailureExit;
}

int cmd_report(const CommandOptions& opts) {
  const RunConfig cfg = resolve_config(opts);
  const fs::path& out = cfg.output_dir;
  const bool have_report = fs::exists(out / kReportJson);
  const bool have_manifest = fs::exists(out / kManifestFile);
  if (!have_report && !have_manifest) {
    throw Error(fmt::format("neither {} nor {} found in '{}'; run train or evaluate first", kReportJson,
                            kManifestFile, out.string()));
  }
  if (have_report) {
    const json j = read_json_file(out / kReportJson);
    write_report_views(out, j.at("report").get<ClassificationReport>(), j.at("confusion").get<ConfusionMatrix>(),
                       j.at("partition").get<std::string>());
  }
  if (have_manifest) {
    const json j = read_json_file(out / kManifestFile);
    write_curves(out, j.at("training").at("history").get<std::vector<EpochRecord>>());
  }
  log(opts, fmt::format("re-rendered report views in {}", out.string()));
  return 0;
}

}  // namespace insideout
