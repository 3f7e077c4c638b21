#include "insideout/plots.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "insideout/emotion.hpp"
#include "insideout/error.hpp"

namespace insideout {

namespace {

const cv::Scalar kInk(40, 40, 40);
const cv::Scalar kGrid(225, 225, 225);
constexpr int kFont = cv::FONT_HERSHEY_SIMPLEX;

// BGR, since OpenCV writes BGR.
const cv::Scalar kPalette[] = {{180, 119, 31}, {14, 127, 255}, {44, 160, 44}, {40, 39, 214},
                               {189, 103, 148}, {75, 86, 140}, {194, 119, 227}};

void save(const std::filesystem::path& path, const cv::Mat& img) {
  if (!cv::imwrite(path.string(), img)) throw Error(fmt::format("cannot write image '{}'", path.string()));
}

void text(cv::Mat& img, const std::string& s, cv::Point at, double scale = 0.45,
          cv::Scalar color = kInk, int thickness = 1) {
  cv::putText(img, s, at, kFont, scale, color, thickness, cv::LINE_AA);
}

void centered_text(cv::Mat& img, const std::string& s, cv::Point center, double scale = 0.45,
                   cv::Scalar color = kInk, int thickness = 1) {
  int baseline = 0;
  const cv::Size size = cv::getTextSize(s, kFont, scale, thickness, &baseline);
  text(img, s, {center.x - size.width / 2, center.y + size.height / 2}, scale, color, thickness);
}

// Round-number step covering `span` in about `ticks` intervals.
double nice_step(double span, int ticks) {
  const double raw = span / ticks;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 2.5, 5.0, 10.0}) {
    if (raw <= m * mag) return m * mag;
  }
  return 10.0 * mag;
}

std::string tick_label(double v, double step) {
  if (step >= 1.0) return fmt::format("{:.0f}", v);
  const int decimals = std::clamp(static_cast<int>(std::ceil(-std::log10(step))), 1, 6);
  return fmt::format("{:.{}f}", v, decimals);
}

struct Frame {
  cv::Rect area;
  double y_lo;
  double y_hi;

  int y(double v) const {
    return area.y + area.height - static_cast<int>(std::lround((v - y_lo) / (y_hi - y_lo) * area.height));
  }
};

// Draws title, y-axis ticks and grid; returns the plotting frame.
Frame draw_axes(cv::Mat& img, const std::string& title, const std::string& y_label, double lo, double hi) {
  const cv::Rect area(80, 50, img.cols - 110, img.rows - 120);
  if (!(hi > lo)) hi = lo + 1.0;
  const double step = nice_step(hi - lo, 5);
  lo = std::floor(lo / step) * step;
  hi = std::ceil(hi / step) * step;
  Frame f{area, lo, hi};
  centered_text(img, title, {img.cols / 2, 22}, 0.6, kInk, 1);
  for (double v = lo; v <= hi + step * 1e-6; v += step) {
    const int yy = f.y(v);
    cv::line(img, {area.x, yy}, {area.x + area.width, yy}, kGrid, 1);
    const std::string label = tick_label(v, step);
    int baseline = 0;
    const cv::Size size = cv::getTextSize(label, kFont, 0.4, 1, &baseline);
    text(img, label, {area.x - 8 - size.width, yy + size.height / 2}, 0.4);
  }
  cv::rectangle(img, area, kInk, 1);
  text(img, y_label, {8, area.y - 12}, 0.45);
  return f;
}

}  // namespace

void write_bar_chart(const std::filesystem::path& path, const std::string& title,
                     const std::vector<std::string>& labels, const std::vector<double>& values) {
  if (labels.size() != values.size() || labels.empty()) {
    throw InvalidArgument("bar chart needs one label per value");
  }
  cv::Mat img(480, 760, CV_8UC3, cv::Scalar(255, 255, 255));
  const double top = std::max(1.0, *std::max_element(values.begin(), values.end()));
  const Frame f = draw_axes(img, title, "count", 0.0, top * 1.1);
  const double slot = static_cast<double>(f.area.width) / static_cast<double>(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const int x0 = f.area.x + static_cast<int>(slot * (static_cast<double>(i) + 0.15));
    const int x1 = f.area.x + static_cast<int>(slot * (static_cast<double>(i) + 0.85));
    const int y0 = f.y(values[i]);
    cv::rectangle(img, cv::Point(x0, y0), cv::Point(x1, f.y(0.0)), kPalette[i % 7], cv::FILLED);
    centered_text(img, fmt::format("{:g}", values[i]), {(x0 + x1) / 2, y0 - 10}, 0.4);
    centered_text(img, labels[i], {(x0 + x1) / 2, f.area.y + f.area.height + 18}, 0.45);
  }
  save(path, img);
}

void write_line_chart(const std::filesystem::path& path, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      const std::vector<Series>& series) {
  std::size_t points = 0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const Series& s : series) {
    points = std::max(points, s.values.size());
    for (double v : s.values) {
      if (!std::isfinite(v)) continue;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (points == 0 || !std::isfinite(lo)) throw InvalidArgument("line chart needs at least one finite point");
  const double pad = std::max(1e-9, (hi - lo) * 0.05);
  cv::Mat img(480, 760, CV_8UC3, cv::Scalar(255, 255, 255));
  const Frame f = draw_axes(img, title, y_label, lo - pad, hi + pad);
  const double last = std::max<double>(1.0, static_cast<double>(points - 1));
  auto x_of = [&](std::size_t i) {
    return f.area.x + static_cast<int>(std::lround(static_cast<double>(i) / last * f.area.width));
  };
  const double x_step = nice_step(last, std::min<int>(10, static_cast<int>(last)));
  for (double t = 0.0; t <= last + 1e-9; t += std::max(1.0, x_step)) {
    const auto i = static_cast<std::size_t>(t);
    centered_text(img, fmt::format("{}", i), {x_of(i), f.area.y + f.area.height + 16}, 0.4);
  }
  centered_text(img, x_label, {f.area.x + f.area.width / 2, f.area.y + f.area.height + 40}, 0.45);
  for (std::size_t s = 0; s < series.size(); ++s) {
    const cv::Scalar color = kPalette[s % 7];
    const auto& v = series[s].values;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const cv::Point p(x_of(i), f.y(v[i]));
      if (i > 0) cv::line(img, {x_of(i - 1), f.y(v[i - 1])}, p, color, 2, cv::LINE_AA);
      cv::circle(img, p, 3, color, cv::FILLED, cv::LINE_AA);
    }
    const int ly = f.area.y + 18 + 20 * static_cast<int>(s);
    const int lx = f.area.x + f.area.width - 130;
    cv::line(img, {lx, ly}, {lx + 24, ly}, color, 2, cv::LINE_AA);
    text(img, series[s].name, {lx + 30, ly + 5});
  }
  save(path, img);
}

void write_confusion_heatmap(const std::filesystem::path& path, const std::string& title,
                             const ConfusionMatrix& cm, const std::vector<int>& order) {
  const int n = static_cast<int>(order.size());
  const int cell = 64;
  const int left = 110;
  const int top = 60;
  cv::Mat img(top + n * cell + 70, left + n * cell + 30, CV_8UC3, cv::Scalar(255, 255, 255));
  centered_text(img, title, {img.cols / 2, 22}, 0.6);
  for (int r = 0; r < n; ++r) {
    const auto row_total = static_cast<double>(cm.row_sum(order[r]));
    for (int c = 0; c < n; ++c) {
      const std::int64_t count = cm.m[order[r]][order[c]];
      const double share = row_total > 0 ? static_cast<double>(count) / row_total : 0.0;
      const auto shade = static_cast<int>(std::lround(255.0 * (1.0 - share)));
      const cv::Rect box(left + c * cell, top + r * cell, cell, cell);
      cv::rectangle(img, box, cv::Scalar(255, shade, shade), cv::FILLED);
      cv::rectangle(img, box, kGrid, 1);
      const cv::Scalar ink = share > 0.55 ? cv::Scalar(255, 255, 255) : kInk;
      centered_text(img, fmt::format("{}", count), {box.x + cell / 2, box.y + cell / 2}, 0.45, ink);
    }
    const std::string name(kEmotionNames[order[r]]);
    int baseline = 0;
    const cv::Size size = cv::getTextSize(name, kFont, 0.45, 1, &baseline);
    text(img, name, {left - 8 - size.width, top + r * cell + cell / 2 + size.height / 2});
  }
  for (int c = 0; c < n; ++c) {
    centered_text(img, std::string(kEmotionNames[order[c]]).substr(0, 8),
                  {left + c * cell + cell / 2, top + n * cell + 16}, 0.4);
  }
  centered_text(img, "predicted", {left + n * cell / 2, top + n * cell + 44}, 0.45);
  text(img, "true", {8, top - 10}, 0.45);
  save(path, img);
}

void write_tile_grid(const std::filesystem::path& path, const std::vector<Tile>& tiles, int columns,
                     int tile_side) {
  if (tiles.empty()) throw InvalidArgument("tile grid needs at least one tile");
  if (columns < 1) throw InvalidArgument("tile grid needs at least one column");
  const int rows = (static_cast<int>(tiles.size()) + columns - 1) / columns;
  const int caption_h = 36;
  const int gap = 8;
  const int cols = std::min<int>(columns, static_cast<int>(tiles.size()));
  cv::Mat img(rows * (tile_side + caption_h + gap) + gap, cols * (tile_side + gap) + gap, CV_8UC3,
              cv::Scalar(255, 255, 255));
  for (std::size_t i = 0; i < tiles.size(); ++i) {
    const Tile& t = tiles[i];
    if (t.rgb.size() != static_cast<std::size_t>(t.height) * t.width * 3) {
      throw InvalidArgument("tile pixel buffer does not match its size");
    }
    cv::Mat rgb(t.height, t.width, CV_8UC3, const_cast<std::uint8_t*>(t.rgb.data()));
    cv::Mat bgr;
    cv::cvtColor(rgb, bgr, cv::COLOR_RGB2BGR);
    cv::Mat scaled;
    cv::resize(bgr, scaled, {tile_side, tile_side}, 0, 0, cv::INTER_AREA);
    const int r = static_cast<int>(i) / columns;
    const int c = static_cast<int>(i) % columns;
    const int x = gap + c * (tile_side + gap);
    const int y = gap + r * (tile_side + caption_h + gap);
    scaled.copyTo(img(cv::Rect(x, y, tile_side, tile_side)));
    std::size_t start = 0;
    for (int line = 0; line < 2 && start < t.caption.size(); ++line) {
      const std::size_t end = std::min(t.caption.find('\n', start), t.caption.size());
      text(img, t.caption.substr(start, end - start), {x, y + tile_side + 14 + 15 * line}, 0.42);
      start = end + 1;
    }
  }
  save(path, img);
}

void write_rgb_image(const std::filesystem::path& path, const Tile& tile) {
  if (tile.rgb.size() != static_cast<std::size_t>(tile.height) * tile.width * 3) {
    throw InvalidArgument("tile pixel buffer does not match its size");
  }
  cv::Mat rgb(tile.height, tile.width, CV_8UC3, const_cast<std::uint8_t*>(tile.rgb.data()));
  cv::Mat bgr;
  cv::cvtColor(rgb, bgr, cv::COLOR_RGB2BGR);
  save(path, bgr);
}

Tile gray_tile(const std::vector<std::int16_t>& pixels, int height, int width, std::string caption) {
  Tile t{height, width, std::vector<std::uint8_t>(static_cast<std::size_t>(height) * width * 3), std::move(caption)};
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    const auto v = static_cast<std::uint8_t>(std::clamp<int>(pixels[i], 0, 255));
    t.rgb[3 * i] = t.rgb[3 * i + 1] = t.rgb[3 * i + 2] = v;
  }
  return t;
}

}  // namespace insideout
