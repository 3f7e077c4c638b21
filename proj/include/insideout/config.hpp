#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include "insideout/json_io.hpp"
#include "insideout/model.hpp"
#include "insideout/splitter.hpp"
#include "insideout/trainer.hpp"
#include "insideout/transforms.hpp"

namespace insideout {

/// Environment variable that relative dataset paths resolve against.
inline constexpr const char* kDataRootEnv = "INSIDEOUT_DATA_ROOT";

struct RunConfig {
  std::filesystem::path dataset;
  SplitSpec split;
  AugmentConfig augment;
  ModelConfig model;
  TrainingConfig training;
  std::filesystem::path output_dir = "runs/default";
  std::uint64_t seed = 0;

  void validate() const;
};

/// Sections without their own "seed" inherit the run seed. Relative dataset
/// paths resolve against $INSIDEOUT_DATA_ROOT when set, otherwise against the
/// config file's directory; a relative output_dir resolves against the config
/// file's directory.
RunConfig load_run_config(const std::filesystem::path& path);
RunConfig run_config_from_json(const json& j, const std::filesystem::path& base_dir);

/// A command-line seed replaces the run seed and every section seed.
void override_seed(RunConfig& cfg, std::uint64_t seed);

json to_json(const RunConfig& cfg);

}  // namespace insideout
