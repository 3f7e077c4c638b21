#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "insideout/metrics.hpp"

namespace insideout {

struct Series {
  std::string name;
  std::vector<double> values;
};

/// Interleaved RGB8 tile with an optional caption drawn underneath.
struct Tile {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> rgb;
  std::string caption;
};

void write_bar_chart(const std::filesystem::path& path, const std::string& title,
                     const std::vector<std::string>& labels, const std::vector<double>& values);

/// One line per series over x = 0, 1, 2, ...
void write_line_chart(const std::filesystem::path& path, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      const std::vector<Series>& series);

/// Row = true class, column = predicted class, both in `order`.
void write_confusion_heatmap(const std::filesystem::path& path, const std::string& title,
                             const ConfusionMatrix& cm, const std::vector<int>& order);

void write_tile_grid(const std::filesystem::path& path, const std::vector<Tile>& tiles, int columns,
                     int tile_side = 160);

void write_rgb_image(const std::filesystem::path& path, const Tile& tile);

Tile gray_tile(const std::vector<std::int16_t>& pixels, int height, int width, std::string caption);

}  // namespace insideout
