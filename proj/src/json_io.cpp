#include "insideout/json_io.hpp"

#include <cmath>
#include <fstream>

#include <fmt/format.h>

#include "insideout/error.hpp"

namespace insideout {

namespace {

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
  if (const auto it = j.find(key); it != j.end()) it->get_to(out);
}

json class_array(const std::array<double, kNumClasses>& values) {
  json out = json::object();
  for (std::size_t c = 0; c < kNumClasses; ++c) out[std::string(kEmotionNames[c])] = values[c];
  return out;
}

}  // namespace

void require_known_keys(const json& j, std::string_view section,
                        std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) throw ParseError(fmt::format("config section '{}' must be an object", section));
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (std::string_view a : allowed) known = known || key == a;
    if (!known) throw ParseError(fmt::format("unknown key '{}' in config section '{}'", key, section));
  }
}

void to_json(json& j, const SplitSpec& s) {
  j = {{"mode", to_string(s.mode)}, {"ratios", s.ratios}, {"seed", s.seed}};
}

void from_json(const json& j, SplitSpec& s) {
  require_known_keys(j, "split", {"mode", "ratios", "seed"});
  if (j.contains("mode")) s.mode = split_mode_from_string(j.at("mode").get<std::string>());
  read_opt(j, "ratios", s.ratios);
  read_opt(j, "seed", s.seed);
}

void to_json(json& j, const AugmentConfig& c) {
  j = {{"crop_scale", {c.crop_scale.first, c.crop_scale.second}},
       {"rotation_degrees", c.rotation_degrees},
       {"hflip_prob", c.hflip_prob},
       {"jitter", c.jitter},
       {"seed", c.seed}};
}

void from_json(const json& j, AugmentConfig& c) {
  require_known_keys(j, "augment", {"crop_scale", "rotation_degrees", "hflip_prob", "jitter", "seed"});
  if (j.contains("crop_scale")) {
    const auto range = j.at("crop_scale").get<std::array<double, 2>>();
    c.crop_scale = {range[0], range[1]};
  }
  read_opt(j, "rotation_degrees", c.rotation_degrees);
  read_opt(j, "hflip_prob", c.hflip_prob);
  read_opt(j, "jitter", c.jitter);
  read_opt(j, "seed", c.seed);
}

void to_json(json& j, const ModelConfig& c) {
  j = {{"backbone", c.backbone},
       {"dropout_rate", c.dropout_rate},
       {"weights_source", to_string(c.weights_source)},
       {"pretrained_weights", c.pretrained_weights.string()},
       {"freeze_policy", to_string(c.freeze_policy)},
       {"freeze_bn_stats", c.freeze_bn_stats},
       {"num_classes", ModelConfig::kNumOutputs},
       {"seed", c.seed}};
}

void from_json(const json& j, ModelConfig& c) {
  require_known_keys(j, "model", {"backbone", "dropout_rate", "weights_source", "pretrained_weights",
                                  "freeze_policy", "freeze_bn_stats", "num_classes", "seed"});
  read_opt(j, "backbone", c.backbone);
  read_opt(j, "dropout_rate", c.dropout_rate);
  if (j.contains("weights_source")) {
    c.weights_source = weights_source_from_string(j.at("weights_source").get<std::string>());
  }
  if (j.contains("pretrained_weights")) c.pretrained_weights = j.at("pretrained_weights").get<std::string>();
  if (j.contains("freeze_policy")) c.freeze_policy = freeze_policy_from_string(j.at("freeze_policy").get<std::string>());
  read_opt(j, "freeze_bn_stats", c.freeze_bn_stats);
  if (j.contains("num_classes") && j.at("num_classes").get<int>() != ModelConfig::kNumOutputs) {
    throw ParseError(fmt::format("model.num_classes must be {}", ModelConfig::kNumOutputs));
  }
  read_opt(j, "seed", c.seed);
}

void to_json(json& j, const AdamConfig& c) {
  j = {{"beta1", c.beta1}, {"beta2", c.beta2}, {"epsilon", c.epsilon}};
}

void from_json(const json& j, AdamConfig& c) {
  require_known_keys(j, "training.adam", {"beta1", "beta2", "epsilon"});
  read_opt(j, "beta1", c.beta1);
  read_opt(j, "beta2", c.beta2);
  read_opt(j, "epsilon", c.epsilon);
}

void to_json(json& j, const TrainingConfig& c) {
  j = {{"initial_lr", c.initial_lr},   {"min_lr", c.min_lr},
       {"batch_size", c.batch_size},   {"max_epochs", c.max_epochs},
       {"patience", c.patience},       {"min_delta", c.min_delta},
       {"seed", c.seed},               {"adam", c.adam},
       {"reduction", to_string(c.reduction)},
       {"use_class_weights", c.use_class_weights},
       {"augment", c.augment}};
}

void from_json(const json& j, TrainingConfig& c) {
  require_known_keys(j, "training", {"initial_lr", "min_lr", "batch_size", "max_epochs", "patience",
                                     "min_delta", "seed", "adam", "reduction", "use_class_weights",
                                     "augment"});
  read_opt(j, "initial_lr", c.initial_lr);
  read_opt(j, "min_lr", c.min_lr);
  read_opt(j, "batch_size", c.batch_size);
  read_opt(j, "max_epochs", c.max_epochs);
  read_opt(j, "patience", c.patience);
  read_opt(j, "min_delta", c.min_delta);
  read_opt(j, "seed", c.seed);
  read_opt(j, "adam", c.adam);
  if (j.contains("reduction")) c.reduction = reduction_from_string(j.at("reduction").get<std::string>());
  read_opt(j, "use_class_weights", c.use_class_weights);
  read_opt(j, "augment", c.augment);
}

void to_json(json& j, const DatasetSplit& s) {
  j = {{"train", s.train}, {"val", s.val}, {"test", s.test}};
}

void from_json(const json& j, DatasetSplit& s) {
  j.at("train").get_to(s.train);
  j.at("val").get_to(s.val);
  j.at("test").get_to(s.test);
}

void to_json(json& j, const EpochRecord& r) {
  j = {{"epoch", r.epoch},         {"train_loss", r.train_loss}, {"val_loss", r.val_loss},
       {"train_acc", r.train_acc}, {"val_acc", r.val_acc},       {"lr", r.lr},
       {"wall_time", r.wall_time}};
}

void from_json(const json& j, EpochRecord& r) {
  j.at("epoch").get_to(r.epoch);
  j.at("train_loss").get_to(r.train_loss);
  j.at("val_loss").get_to(r.val_loss);
  j.at("train_acc").get_to(r.train_acc);
  j.at("val_acc").get_to(r.val_acc);
  j.at("lr").get_to(r.lr);
  read_opt(j, "wall_time", r.wall_time);
}

void to_json(json& j, const TrainingState& s) {
  j = {{"best_val_loss", std::isfinite(s.best_val_loss) ? json(s.best_val_loss) : json(nullptr)},
       {"best_epoch", s.best_epoch},
       {"epochs_since_improvement", s.epochs_since_improvement},
       {"epochs_observed", s.epochs_observed},
       {"stopped_early", s.stopped_early},
       {"history", s.history}};
}

void from_json(const json& j, TrainingState& s) {
  const json& best = j.at("best_val_loss");
  s.best_val_loss = best.is_null() ? std::numeric_limits<double>::infinity() : best.get<double>();
  j.at("best_epoch").get_to(s.best_epoch);
  j.at("epochs_since_improvement").get_to(s.epochs_since_improvement);
  j.at("epochs_observed").get_to(s.epochs_observed);
  j.at("stopped_early").get_to(s.stopped_early);
  j.at("history").get_to(s.history);
}

void to_json(json& j, const ClassHistogram& h) {
  json counts = json::object();
  for (std::size_t c = 0; c < kNumClasses; ++c) counts[std::string(kEmotionNames[c])] = h.counts[c];
  j = {{"counts", counts}, {"counts_by_index", h.counts}, {"total", h.total}};
}

void to_json(json& j, const ClassWeights& w) {
  j = {{"weights", class_array(w.w)}, {"weights_by_index", w.w}, {"source_histogram", w.source_histogram}};
}

void to_json(json& j, const ValidationReport& r) {
  json duplicates = json::array();
  for (const DuplicatePair& d : r.duplicates) {
    duplicates.push_back({{"first", d.first}, {"second", d.second}, {"conflicting_labels", d.conflicting_labels}});
  }
  json violations = json::array();
  for (const RangeViolation& v : r.range_violations) {
    violations.push_back({{"sample", v.sample}, {"pixel", v.pixel}, {"value", v.value}});
  }
  json classes = json::object();
  for (std::size_t c = 0; c < kNumClasses; ++c) classes[std::string(kEmotionNames[c])] = r.class_counts[c];
  j = {{"sample_count", r.sample_count},
       {"class_counts", classes},
       {"min_class_count", r.min_class_count},
       {"rarest_class", to_name(r.rarest_class)},
       {"usage_counts",
        {{"Training", r.usage_counts[0]}, {"PublicTest", r.usage_counts[1]}, {"PrivateTest", r.usage_counts[2]}}},
       {"duplicate_pairs", r.duplicates.size()},
       {"duplicates", duplicates},
       {"range_violations", violations},
       {"shape_violations", r.shape_violations},
       {"clean", r.clean()}};
}

void to_json(json& j, const ConfusionMatrix& cm) {
  j = {{"labels", kEmotionNames}, {"matrix", cm.m}};
}

void from_json(const json& j, ConfusionMatrix& cm) { j.at("matrix").get_to(cm.m); }

void to_json(json& j, const ClassificationReport& r) {
  json per_class = json::array();
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    const ClassMetrics& m = r.per_class[c];
    per_class.push_back({{"index", c},
                         {"name", kEmotionNames[c]},
                         {"precision", m.precision},
                         {"recall", m.recall},
                         {"f1", m.f1},
                         {"support", m.support},
                         {"precision_undefined", m.precision_undefined},
                         {"recall_undefined", m.recall_undefined}});
  }
  auto avg = [](const AverageMetrics& a) {
    return json{{"precision", a.precision}, {"recall", a.recall}, {"f1", a.f1}};
  };
  j = {{"per_class", per_class},
       {"accuracy", r.accuracy},
       {"macro_avg", avg(r.macro_avg)},
       {"weighted_avg", avg(r.weighted_avg)},
       {"total", r.total},
       {"warnings", r.warnings}};
}

void from_json(const json& j, ClassificationReport& r) {
  const json& per_class = j.at("per_class");
  if (!per_class.is_array() || per_class.size() != kNumClasses) {
    throw ParseError(fmt::format("report needs {} per-class entries", kNumClasses));
  }
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    const json& e = per_class[c];
    ClassMetrics& m = r.per_class[c];
    e.at("precision").get_to(m.precision);
    e.at("recall").get_to(m.recall);
    e.at("f1").get_to(m.f1);
    e.at("support").get_to(m.support);
    read_opt(e, "precision_undefined", m.precision_undefined);
    read_opt(e, "recall_undefined", m.recall_undefined);
  }
  auto avg = [](const json& a, AverageMetrics& out) {
    a.at("precision").get_to(out.precision);
    a.at("recall").get_to(out.recall);
    a.at("f1").get_to(out.f1);
  };
  j.at("accuracy").get_to(r.accuracy);
  avg(j.at("macro_avg"), r.macro_avg);
  avg(j.at("weighted_avg"), r.weighted_avg);
  j.at("total").get_to(r.total);
  read_opt(j, "warnings", r.warnings);
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(fmt::format("cannot open '{}'", path.string()));
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(fmt::format("'{}' is not valid JSON: {}", path.string(), e.what()));
  }
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
  out << j.dump(2) << '\n';
  if (!out) throw Error(fmt::format("failed writing '{}'", path.string()));
}

}  // namespace insideout
