#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace wser {

enum class Emotion : int {
    boredom = 0,
    disgust,
    happiness,
    anxiety,
    neutral,
    anger,
    sadness,
};

inline constexpr int kNumEmotions = 7;
inline constexpr int kNumPairs = kNumEmotions * (kNumEmotions - 1) / 2;

// Canonical order. Every table, pair list and network output follows it.
inline constexpr std::array<Emotion, kNumEmotions> kEmotions = {
    Emotion::boredom, Emotion::disgust, Emotion::happiness, Emotion::anxiety,
    Emotion::neutral, Emotion::anger,   Emotion::sadness,
};

inline constexpr std::array<std::string_view, kNumEmotions> kEmotionNames = {
    "boredom", "disgust", "happiness", "anxiety", "neutral", "anger", "sadness",
};

inline constexpr int index_of(Emotion e) { return static_cast<int>(e); }

inline std::string_view to_string(Emotion e) { return kEmotionNames[index_of(e)]; }

/// Capitalized form used in report headers ("Boredom").
inline std::string display_name(Emotion e)
{
    std::string s(to_string(e));
    s[0] = static_cast<char>(s[0] - 'a' + 'A');
    return s;
}

inline std::optional<Emotion> parse_emotion(std::string_view s)
{
    for (int i = 0; i < kNumEmotions; ++i) {
        if (kEmotionNames[i] == s) return kEmotions[i];
    }
    return std::nullopt;
}

/// The 21 unordered label pairs, lexicographic over the canonical order.
inline std::vector<std::pair<Emotion, Emotion>> emotion_pairs()
{
    std::vector<std::pair<Emotion, Emotion>> out;
    out.reserve(kNumPairs);
    for (int a = 0; a < kNumEmotions; ++a)
        for (int b = a + 1; b < kNumEmotions; ++b) out.emplace_back(kEmotions[a], kEmotions[b]);
    return out;
}

inline std::string pair_name(Emotion a, Emotion b)
{
    return std::string(to_string(a)) + "-" + std::string(to_string(b));
}

}  // namespace wser
