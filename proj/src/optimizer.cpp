#include "insideout/optimizer.hpp"

#include <cmath>

#include <fmt/format.h>

#include "insideout/error.hpp"

namespace insideout {

void Adam::step(std::span<Parameter* const> params, double lr) {
  ++steps_;
  const double bias1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(steps_));
  const double bias2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(steps_));
  for (Parameter* p : params) {
    if (!p->trainable) continue;
    auto [it, inserted] = moments_.try_emplace(p->name);
    Moments& mom = it->second;
    if (inserted) {
      mom.m = Matrix::Zero(p->value.rows(), p->value.cols());
      mom.v = Matrix::Zero(p->value.rows(), p->value.cols());
    }
    mom.m = cfg_.beta1 * mom.m + (1.0 - cfg_.beta1) * p->grad;
    mom.v = cfg_.beta2 * mom.v + (1.0 - cfg_.beta2) * p->grad.cwiseAbs2();
    p->value.array() -= lr * (mom.m.array() / bias1) / ((mom.v.array() / bias2).sqrt() + cfg_.epsilon);
  }
}

std::vector<NamedTensor> Adam::state() const {
  std::vector<NamedTensor> out;
  for (const auto& [name, mom] : moments_) {
    out.push_back({name + ".m", mom.m});
    out.push_back({name + ".v", mom.v});
  }
  return out;
}

void Adam::load_state(std::span<const NamedTensor> tensors, std::int64_t steps) {
  moments_.clear();
  for (const NamedTensor& t : tensors) {
    if (t.name.size() < 3) throw ParseError(fmt::format("bad optimizer tensor name '{}'", t.name));
    const std::string base = t.name.substr(0, t.name.size() - 2);
    const std::string suffix = t.name.substr(t.name.size() - 2);
    if (suffix == ".m") {
      moments_[base].m = t.value;
    } else if (suffix == ".v") {
      moments_[base].v = t.value;
    } else {
      throw ParseError(fmt::format("bad optimizer tensor name '{}'", t.name));
    }
  }
  steps_ = steps;
}

}  // namespace insideout
