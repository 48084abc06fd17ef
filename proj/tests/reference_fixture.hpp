#pragma once

// Hand-built seven-class counts whose row percentages land on a known
// reference table, plus that table and its per-pair error column. Used to
// pin the report arithmetic and layout.

#include <array>

#include "wser/evaluation.hpp"

namespace fixture {

inline constexpr std::array<std::array<long long, 7>, 7> kCounts = {{
    {70, 0, 0, 1, 5, 1, 1},
    {1, 41, 2, 0, 1, 0, 0},
    {0, 2, 60, 2, 1, 5, 0},
    {1, 1, 1, 64, 2, 0, 0},
    {5, 0, 0, 2, 73, 0, 0},
    {0, 1, 6, 2, 0, 117, 0},
    {1, 0, 0, 1, 2, 0, 56},
}};

// Row percentages as printed (two decimals).
inline constexpr std::array<std::array<double, 7>, 7> kRowPercent = {{
    {89.74, 0.00, 0.00, 1.28, 6.41, 1.28, 1.28},
    {2.22, 91.11, 4.44, 0.00, 2.22, 0.00, 0.00},
    {0.00, 2.86, 85.71, 2.86, 1.43, 7.14, 0.00},
    {1.45, 1.45, 1.45, 92.75, 2.90, 0.00, 0.00},
    {6.25, 0.00, 0.00, 2.50, 91.25, 0.00, 0.00},
    {0.00, 0.79, 4.76, 1.59, 0.00, 92.86, 0.00},
    {1.67, 0.00, 0.00, 1.67, 3.33, 0.00, 93.33},
}};

// Per-pair errors in canonical pair order. Some entries were truncated
// rather than rounded, so comparisons allow 0.01.
inline constexpr std::array<double, 21> kPairPercent = {
    1.11, 0.00, 1.36, 6.33, 0.64, 1.47,  // boredom
    3.65, 0.72, 1.11, 0.39, 0.00,        // disgust
    2.15, 0.71, 5.95, 0.00,              // happiness
    2.75, 0.79, 0.83,                    // anxiety
    0.00, 1.66,                          // neutral
    0.00,                                // anger
};

// Anxiety-neutral: the reference says 2.75, but its own row entries (2.90,
// 2.50) put the pair at 2.70.
inline constexpr int kInconsistentPair = 15;

inline constexpr double kMeanClassAccuracy = 90.96;

inline wser::ConfusionMatrix matrix()
{
    wser::ConfusionMatrix cm;
    for (int r = 0; r < 7; ++r)
        for (int c = 0; c < 7; ++c) cm.counts(r, c) = kCounts[std::size_t(r)][std::size_t(c)];
    return cm;
}

}  // namespace fixture
