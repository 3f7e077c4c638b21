#pragma once

#include <filesystem>
#include <initializer_list>
#include <string_view>

#include <nlohmann/json.hpp>

#include "insideout/dataset.hpp"
#include "insideout/loss.hpp"
#include "insideout/metrics.hpp"
#include "insideout/model.hpp"
#include "insideout/splitter.hpp"
#include "insideout/trainer.hpp"
#include "insideout/transforms.hpp"

namespace insideout {

using json = nlohmann::json;

// Config sections accept partial objects (missing keys keep defaults) and
// reject unknown keys.
void to_json(json& j, const SplitSpec& s);
void from_json(const json& j, SplitSpec& s);
void to_json(json& j, const AugmentConfig& c);
void from_json(const json& j, AugmentConfig& c);
void to_json(json& j, const ModelConfig& c);
void from_json(const json& j, ModelConfig& c);
void to_json(json& j, const AdamConfig& c);
void from_json(const json& j, AdamConfig& c);
void to_json(json& j, const TrainingConfig& c);
void from_json(const json& j, TrainingConfig& c);

void to_json(json& j, const DatasetSplit& s);
void from_json(const json& j, DatasetSplit& s);
void to_json(json& j, const EpochRecord& r);
void from_json(const json& j, EpochRecord& r);
void to_json(json& j, const TrainingState& s);
void from_json(const json& j, TrainingState& s);

void to_json(json& j, const ClassHistogram& h);
void to_json(json& j, const ClassWeights& w);
void to_json(json& j, const ValidationReport& r);
void to_json(json& j, const ConfusionMatrix& cm);
void from_json(const json& j, ConfusionMatrix& cm);
void to_json(json& j, const ClassificationReport& r);
void from_json(const json& j, ClassificationReport& r);

/// Throws ParseError naming `section` if `j` has keys outside `allowed`.
void require_known_keys(const json& j, std::string_view section,
                        std::initializer_list<std::string_view> allowed);

json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const json& j);

}  // namespace insideout
