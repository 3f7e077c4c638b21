#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "insideout/model.hpp"
#include "insideout/tensor_io.hpp"

namespace insideout {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam with bias correction. Moments are keyed by parameter name; frozen
/// parameters are never touched.
class Adam {
 public:
  explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

  void step(std::span<Parameter* const> params, double lr);

  std::int64_t steps() const { return steps_; }
  const AdamConfig& config() const { return cfg_; }

  /// Moments as "<name>.m" / "<name>.v" tensors, for checkpointing.
  std::vector<NamedTensor> state() const;
  void load_state(std::span<const NamedTensor> tensors, std::int64_t steps);

 private:
  struct Moments {
    Matrix m;
    Matrix v;
  };
  AdamConfig cfg_;
  std::int64_t steps_ = 0;
  std::map<std::string, Moments> moments_;
};

}  // namespace insideout
