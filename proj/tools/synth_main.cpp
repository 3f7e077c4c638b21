#include <cstdio>
#include <exception>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "insideout/synthetic.hpp"

using namespace insideout;

int main(int argc, char** argv) {
  CLI::App app{"Write a synthetic FER2013-format CSV"};
  std::string out;
  std::size_t per_class = 30;
  std::size_t total = 0;
  std::uint64_t seed = 0;
  double noise = 8.0;
  app.add_option("output", out, "CSV path")->required();
  app.add_option("--per-class", per_class, "samples per class")->capture_default_str();
  app.add_option("--samples", total, "total sample count spread over the classes (overrides --per-class)");
  app.add_option("--noise", noise, "pixel noise standard deviation")->capture_default_str();
  app.add_option("--seed", seed)->capture_default_str();
  CLI11_PARSE(app, argc, argv);
  try {
    SyntheticSpec spec = balanced_synthetic(per_class, seed, noise);
    if (total > 0) {
      for (std::size_t c = 0; c < kNumClasses; ++c) spec.per_class[c] = total / kNumClasses + (c < total % kNumClasses);
    }
    const LabeledDataset ds = make_synthetic(spec);
    write_fer_csv(ds, out);
    fmt::print(stderr, "wrote {} samples to {}\n", ds.size(), out);
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}
