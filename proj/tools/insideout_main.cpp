#include <cstdio>
#include <exception>
#include <functional>
#include <map>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "insideout/error.hpp"
#include "insideout/pipeline.hpp"

using namespace insideout;

namespace {

void add_common(CLI::App& cmd, CommandOptions& opts) {
  cmd.add_option("--config", opts.config_path, "run configuration (JSON)")->required();
  cmd.add_option("--seed", opts.seed, "replace the run seed and every section seed");
  cmd.add_flag("--deterministic", opts.deterministic, "record a deterministic run (the pipeline is single-threaded)");
  cmd.add_flag("--overwrite", opts.overwrite, "replace existing artifacts");
  cmd.add_flag("-q,--quiet", opts.quiet, "suppress progress output");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Facial expression recognition pipeline on FER2013-format data"};
  app.require_subcommand(1);
  CommandOptions opts;

  std::map<CLI::App*, std::function<int(const CommandOptions&)>> handlers;

  auto* prepare = app.add_subcommand("prepare", "validate the dataset, split it, plot class and augmentation views");
  add_common(*prepare, opts);
  prepare->add_option("--emit-samples", opts.emit_samples, "write N augmented training images to samples/");
  handlers[prepare] = cmd_prepare;

  auto* train = app.add_subcommand("train", "fine-tune the model and write checkpoints, manifest and curves");
  add_common(*train, opts);
  train->add_option("--resume", opts.resume, "continue from a checkpoint/last directory")->check(CLI::ExistingDirectory);
  handlers[train] = cmd_train;

  auto* evaluate = app.add_subcommand("evaluate", "classification report and confusion matrix for a partition");
  add_common(*evaluate, opts);
  evaluate->add_option("--checkpoint", opts.checkpoint, "checkpoint directory (default: <output>/checkpoint/best)");
  evaluate->add_option("--partition", opts.partition, "train, val or test")
      ->check(CLI::IsMember({"train", "val", "test"}))
      ->capture_default_str();
  handlers[evaluate] = cmd_evaluate;

  auto* infer = app.add_subcommand("infer", "predict labels with confidences for images");
  add_common(*infer, opts);
  infer->add_option("images", opts.images, "image files (any format OpenCV reads; converted to grayscale)");
  infer->add_option("--checkpoint", opts.checkpoint, "checkpoint directory (default: <output>/checkpoint/best)");
  infer->add_option("--samples", opts.samples, "also infer the first N samples of --partition");
  infer->add_option("--partition", opts.partition, "partition for --samples")
      ->check(CLI::IsMember({"train", "val", "test"}))
      ->capture_default_str();
  infer->add_option("--top-k", opts.top_k, "number of ranked classes per image")
      ->check(CLI::Range(1, 7))
      ->capture_default_str();
  handlers[infer] = cmd_infer;

  auto* report = app.add_subcommand("report", "re-render text report and plots from report.json and manifest.json");
  add_common(*report, opts);
  handlers[report] = cmd_report;

  CLI11_PARSE(app, argc, argv);

  try {
    for (const auto& [cmd, handler] : handlers) {
      if (cmd->parsed()) return handler(opts);
    }
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 1;
}
