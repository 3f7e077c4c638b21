#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

namespace insideout {

inline constexpr std::size_t kNumClasses = 7;

/// FER2013 native label coding. Index order is preserved end-to-end.
enum class Emotion : int {
  Anger = 0,
  Disgust = 1,
  Fear = 2,
  Happy = 3,
  Sadness = 4,
  Surprise = 5,
  Neutral = 6,
};

inline constexpr std::array<std::string_view, kNumClasses> kEmotionNames = {
    "Anger", "Disgust", "Fear", "Happy", "Sadness", "Surprise", "Neutral"};

/// Alphabetical order used when rendering tables; a presentation concern only.
inline constexpr std::array<Emotion, kNumClasses> kDisplayOrder = {
    Emotion::Anger, Emotion::Disgust, Emotion::Fear,    Emotion::Happy,
    Emotion::Neutral, Emotion::Sadness, Emotion::Surprise};

constexpr int to_index(Emotion e) { return static_cast<int>(e); }

constexpr std::string_view to_name(Emotion e) {
  return kEmotionNames[static_cast<std::size_t>(e)];
}

constexpr std::optional<Emotion> emotion_from_index(int index) {
  if (index < 0 || index >= static_cast<int>(kNumClasses)) return std::nullopt;
  return static_cast<Emotion>(index);
}

constexpr std::optional<Emotion> emotion_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    if (kEmotionNames[i] == name) return static_cast<Emotion>(i);
  }
  return std::nullopt;
}

}  // namespace insideout
