#include "insideout/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include <fmt/format.h>

#include "insideout/digest.hpp"
#include "insideout/error.hpp"

namespace insideout {

namespace {

constexpr std::string_view kHeader = "emotion,pixels,Usage";

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// Splits one CSV record, honouring double quotes ("" escapes a quote).
std::vector<std::string> split_fields(std::string_view line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        current.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(ch);
    }
  }
  fields.push_back(std::move(current));
  return fields;
}

Sample parse_row(std::string_view line, std::size_t row) {
  const auto fields = split_fields(line);
  if (fields.size() != 3) {
    throw ParseError(fmt::format("row {}: expected 3 fields, got {}", row, fields.size()));
  }

  const std::string_view label_text = trim(fields[0]);
  int label_value = 0;
  const auto [lend, lec] =
      std::from_chars(label_text.data(), label_text.data() + label_text.size(), label_value);
  if (lec != std::errc{} || lend != label_text.data() + label_text.size() || label_text.empty()) {
    throw ParseError(fmt::format("row {}: label '{}' is not an integer", row, label_text));
  }
  const auto label = emotion_from_index(label_value);
  if (!label) {
    throw ParseError(fmt::format("row {}: label {} out of range [0,6]", row, label_value));
  }

  Sample sample;
  sample.label = *label;
  sample.image.height = kFerSide;
  sample.image.width = kFerSide;
  sample.image.pixels.reserve(kFerPixels);

  const std::string& pixels = fields[1];
  const char* p = pixels.data();
  const char* end = p + pixels.size();
  std::size_t count = 0;
  while (true) {
    while (p < end && (*p == ' ' || *p == '\t')) ++p;
    if (p == end) break;
    const char* token_end = p;
    while (token_end < end && *token_end != ' ' && *token_end != '\t') ++token_end;
    int value = 0;
    const auto [vend, vec] = std::from_chars(p, token_end, value);
    if (vec != std::errc{} || vend != token_end) {
      throw ParseError(fmt::format("row {}: pixel {} value '{}' is not an integer", row, count,
                                   std::string_view(p, static_cast<std::size_t>(token_end - p))));
    }
    if (value < 0 || value > 255) {
      throw ParseError(
          fmt::format("row {}: pixel {} value {} out of range [0,255]", row, count, value));
    }
    if (count < kFerPixels) sample.image.pixels.push_back(static_cast<std::int16_t>(value));
    ++count;
    p = token_end;
  }
  if (count != kFerPixels) {
    throw ParseError(fmt::format("row {}: expected {} pixels, got {}", row, kFerPixels, count));
  }

  const std::string_view usage_text = trim(fields[2]);
  const auto usage = usage_from_string(usage_text);
  if (!usage) {
    throw ParseError(fmt::format("row {}: unknown usage tag '{}'", row, usage_text));
  }
  sample.usage = *usage;
  return sample;
}

}  // namespace

std::string_view to_string(Usage usage) {
  switch (usage) {
    case Usage::Training: return "Training";
    case Usage::PublicTest: return "PublicTest";
    case Usage::PrivateTest: return "PrivateTest";
  }
  return "Training";
}

std::optional<Usage> usage_from_string(std::string_view tag) {
  if (tag == "Training") return Usage::Training;
  if (tag == "PublicTest") return Usage::PublicTest;
  if (tag == "PrivateTest") return Usage::PrivateTest;
  return std::nullopt;
}

LabeledDataset::LabeledDataset(std::vector<Sample> samples, std::string source_digest)
    : samples_(std::move(samples)), source_digest_(std::move(source_digest)) {
  if (samples_.empty()) throw InvalidArgument("dataset contains no samples");
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const GrayImage& img = samples_[i].image;
    if (img.height != kFerSide || img.width != kFerSide || img.pixels.size() != kFerPixels) {
      throw InvalidArgument(fmt::format("sample {}: image must be {}x{}, got {}x{} ({} pixels)", i,
                                        kFerSide, kFerSide, img.height, img.width,
                                        img.pixels.size()));
    }
  }
}

std::string LabeledDataset::content_digest() const {
  Sha256 h;
  for (const Sample& s : samples_) {
    const unsigned char tags[2] = {static_cast<unsigned char>(to_index(s.label)),
                                   static_cast<unsigned char>(s.usage)};
    h.update(tags, sizeof(tags));
    std::array<unsigned char, kFerPixels * 2> buf{};
    for (std::size_t i = 0; i < kFerPixels; ++i) {
      const auto v = static_cast<std::uint16_t>(s.image.pixels[i]);
      buf[2 * i] = static_cast<unsigned char>(v & 0xff);
      buf[2 * i + 1] = static_cast<unsigned char>(v >> 8);
    }
    h.update(buf.data(), buf.size());
  }
  return h.hex_digest();
}

LabeledDataset parse_fer_csv_bytes(std::string_view bytes) {
  std::vector<Sample> samples;
  std::size_t pos = 0;
  bool header_seen = false;
  std::size_t row = 0;
  while (pos < bytes.size()) {
    std::size_t nl = bytes.find('\n', pos);
    if (nl == std::string_view::npos) nl = bytes.size();
    std::string_view line = bytes.substr(pos, nl - pos);
    pos = nl + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!header_seen) {
      if (!line.empty() && static_cast<unsigned char>(line[0]) == 0xEF) {
        line.remove_prefix(std::min<std::size_t>(3, line.size()));  // UTF-8 BOM
      }
      if (trim(line) != kHeader) {
        throw ParseError(fmt::format("unexpected header '{}', expected '{}'", line, kHeader));
      }
      header_seen = true;
      continue;
    }
    if (trim(line).empty()) continue;
    ++row;
    samples.push_back(parse_row(line, row));
  }
  if (!header_seen) throw ParseError("empty file: missing header row");
  if (samples.empty()) throw ParseError("dataset contains no samples");
  return LabeledDataset(std::move(samples), sha256_hex(bytes));
}

LabeledDataset parse_fer_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(fmt::format("cannot open dataset file '{}'", path.string()));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const std::string bytes = std::move(buffer).str();
  return parse_fer_csv_bytes(bytes);
}

void write_fer_csv(const LabeledDataset& ds, std::ostream& out) {
  out << kHeader << '\n';
  for (const Sample& s : ds.samples()) {
    out << to_index(s.label) << ",\"";
    for (std::size_t i = 0; i < s.image.pixels.size(); ++i) {
      if (i > 0) out << ' ';
      out << s.image.pixels[i];
    }
    out << "\"," << to_string(s.usage) << '\n';
  }
}

void write_fer_csv(const LabeledDataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
  write_fer_csv(ds, out);
}

ClassHistogram class_histogram(const LabeledDataset& ds) {
  ClassHistogram hist;
  for (const Sample& s : ds.samples()) ++hist.counts[static_cast<std::size_t>(to_index(s.label))];
  hist.total = ds.size();
  return hist;
}

ClassHistogram class_histogram(const LabeledDataset& ds, std::span<const std::size_t> indices) {
  if (indices.empty()) throw InvalidArgument("class histogram of an empty index set");
  ClassHistogram hist;
  for (std::size_t i : indices) {
    if (i >= ds.size()) throw InvalidArgument(fmt::format("sample index {} out of range", i));
    ++hist.counts[static_cast<std::size_t>(to_index(ds[i].label))];
  }
  hist.total = indices.size();
  return hist;
}

ValidationReport validate_samples(std::span<const Sample> samples) {
  ValidationReport report;
  report.sample_count = samples.size();

  struct ImageKeyHash {
    std::size_t operator()(const std::vector<std::int16_t>* px) const {
      std::size_t h = 1469598103934665603ull;
      for (std::int16_t v : *px) h = (h ^ static_cast<std::uint16_t>(v)) * 1099511628211ull;
      return h;
    }
  };
  struct ImageKeyEq {
    bool operator()(const std::vector<std::int16_t>* a, const std::vector<std::int16_t>* b) const {
      return *a == *b;
    }
  };
  std::unordered_map<const std::vector<std::int16_t>*, std::size_t, ImageKeyHash, ImageKeyEq> seen;

  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Sample& s = samples[i];
    ++report.class_counts[static_cast<std::size_t>(to_index(s.label))];
    ++report.usage_counts[static_cast<std::size_t>(s.usage)];

    const GrayImage& img = s.image;
    if (img.height != kFerSide || img.width != kFerSide || img.pixels.size() != kFerPixels) {
      report.shape_violations.push_back(i);
    }
    for (std::size_t p = 0; p < img.pixels.size(); ++p) {
      if (img.pixels[p] < 0 || img.pixels[p] > 255) {
        report.range_violations.push_back({i, p, img.pixels[p]});
      }
    }
    const auto [it, inserted] = seen.emplace(&img.pixels, i);
    if (!inserted) {
      report.duplicates.push_back({it->second, i, samples[it->second].label != s.label});
    }
  }

  const auto rarest = std::min_element(report.class_counts.begin(), report.class_counts.end());
  report.min_class_count = *rarest;
  report.rarest_class = static_cast<Emotion>(rarest - report.class_counts.begin());
  return report;
}

ValidationReport validate_dataset(const LabeledDataset& ds) { return validate_samples(ds.samples()); }

}  // namespace insideout
