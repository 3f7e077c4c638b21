#include "insideout/config.hpp"

#include <cstdlib>

#include <fmt/format.h>

#include "insideout/error.hpp"

namespace insideout {

namespace fs = std::filesystem;

namespace {

template <typename T>
T section(const json& j, const char* key, std::uint64_t run_seed) {
  T value{};
  value.seed = run_seed;
  if (const auto it = j.find(key); it != j.end()) {
    try {
      it->get_to(value);
    } catch (const json::exception& e) {
      throw ParseError(fmt::format("config section '{}': {}", key, e.what()));
    }
  }
  return value;
}

fs::path resolve(const fs::path& p, const fs::path& base) {
  return p.is_absolute() ? p : (base / p).lexically_normal();
}

}  // namespace

void RunConfig::validate() const {
  if (dataset.empty()) throw InvalidArgument("config must name a dataset file");
  if (output_dir.empty()) throw InvalidArgument("config must name an output directory");
  split.validate();
  augment.validate();
  model.validate();
  training.validate();
}

RunConfig run_config_from_json(const json& j, const fs::path& base_dir) {
  require_known_keys(j, "root", {"dataset", "split", "augment", "model", "training", "output_dir", "seed"});
  RunConfig cfg;
  if (const auto it = j.find("seed"); it != j.end()) it->get_to(cfg.seed);
  if (!j.contains("dataset")) throw ParseError("config lacks the 'dataset' path");
  cfg.dataset = j.at("dataset").get<std::string>();
  if (const auto it = j.find("output_dir"); it != j.end()) cfg.output_dir = it->get<std::string>();
  cfg.split = section<SplitSpec>(j, "split", cfg.seed);
  cfg.augment = section<AugmentConfig>(j, "augment", cfg.seed);
  cfg.model = section<ModelConfig>(j, "model", cfg.seed);
  cfg.training = section<TrainingConfig>(j, "training", cfg.seed);

  fs::path data_base = base_dir;
  if (const char* root = std::getenv(kDataRootEnv); root != nullptr && *root != '\0') data_base = root;
  cfg.dataset = resolve(cfg.dataset, data_base);
  cfg.output_dir = resolve(cfg.output_dir, base_dir);
  if (!cfg.model.pretrained_weights.empty()) {
    cfg.model.pretrained_weights = resolve(cfg.model.pretrained_weights, base_dir);
  }
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const fs::path& path) {
  const json j = read_json_file(path);
  return run_config_from_json(j, fs::absolute(path).parent_path());
}

void override_seed(RunConfig& cfg, std::uint64_t seed) {
  cfg.seed = seed;
  cfg.split.seed = seed;
  cfg.augment.seed = seed;
  cfg.model.seed = seed;
  cfg.training.seed = seed;
}

json to_json(const RunConfig& cfg) {
  return {{"dataset", cfg.dataset.string()}, {"split", cfg.split},
          {"augment", cfg.augment},          {"model", cfg.model},
          {"training", cfg.training},        {"output_dir", cfg.output_dir.string()},
          {"seed", cfg.seed}};
}

}  // namespace insideout
