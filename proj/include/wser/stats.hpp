#pragma once

// The eight per-subband statistics.
//
// Conventions:
//   absmax    max |c|
//   median    linear-interpolated quantile at position p (n - 1), zero-indexed
//   iqr       q(0.75) - q(0.25), same quantile rule
//   std       population standard deviation
//   zcr       strict sign changes / (n - 1); zeros inherit the previous sign
//   kurtosis  m4 / m2^2 (non-excess), 0 when m2 == 0
//   skewness  m3 / m2^1.5, 0 when m2 == 0

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <string_view>
#include <vector>

#include "wser/error.hpp"

namespace wser {

inline constexpr int kNumStats = 8;
inline constexpr std::array<std::string_view, kNumStats> kStatNames = {
    "absmax", "mean", "median", "iqr", "std", "zcr", "kurtosis", "skewness",
};

struct SubbandStats {
    double absmax = 0;
    double mean = 0;
    double median = 0;
    double iqr = 0;
    double std = 0;
    double zcr = 0;
    double kurtosis = 0;
    double skewness = 0;
    /// Zero variance: kurtosis and skewness were set to 0 by convention.
    bool degenerate = false;

    std::array<double, kNumStats> values() const
    {
        return {absmax, mean, median, iqr, std, zcr, kurtosis, skewness};
    }
};

/// Quantile of already sorted data, linear interpolation at p (n - 1).
template <typename Scalar>
Scalar sorted_quantile(const std::vector<Scalar>& sorted, double p)
{
    const double pos = p * double(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const Scalar frac = Scalar(pos - double(lo));
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

template <typename Derived>
double zero_crossing_rate(const Eigen::MatrixBase<Derived>& x)
{
    const Eigen::Index n = x.size();
    if (n < 2) return 0.0;
    int previous = 0;
    Eigen::Index changes = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const int sign = (x(i) > 0) - (x(i) < 0);
        if (sign == 0) continue;
        if (previous != 0 && sign != previous) ++changes;
        previous = sign;
    }
    return double(changes) / double(n - 1);
}

template <typename Derived>
SubbandStats subband_stats(const Eigen::MatrixBase<Derived>& coeffs)
{
    using Scalar = typename Derived::Scalar;
    const Eigen::Index n = coeffs.size();
    if (n == 0) throw DataError("subband_stats: empty coefficient sequence");

    SubbandStats s;
    s.absmax = double(coeffs.cwiseAbs().maxCoeff());
    const Scalar mean = coeffs.mean();
    s.mean = double(mean);

    Scalar m2(0), m3(0), m4(0);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Scalar d = coeffs(i) - mean;
        const Scalar d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= Scalar(n);
    m3 /= Scalar(n);
    m4 /= Scalar(n);
    s.std = double(std::sqrt(m2));
    if (m2 > Scalar(0)) {
        s.skewness = double(m3 / std::pow(m2, Scalar(1.5)));
        s.kurtosis = double(m4 / (m2 * m2));
    } else {
        s.degenerate = true;
    }

    std::vector<Scalar> sorted(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) sorted[static_cast<std::size_t>(i)] = coeffs(i);
    std::sort(sorted.begin(), sorted.end());
    s.median = double(sorted_quantile(sorted, 0.5));
    s.iqr = double(sorted_quantile(sorted, 0.75) - sorted_quantile(sorted, 0.25));
    s.zcr = zero_crossing_rate(coeffs);
    return s;
}

}  // namespace wser
