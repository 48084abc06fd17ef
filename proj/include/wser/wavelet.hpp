#pragma once

// Daubechies filter banks and the periodized Mallat cascade.
//
// Filtering convention (analysis and synthesis use the same one):
//
//     approx[n] = sum_k h[k] * x[(2n + k) mod L]
//     detail[n] = sum_k g[k] * x[(2n + k) mod L]
//
// with g the alternating flip of h. Under periodic extension the analysis
// operator is orthogonal for every even L, so synthesis is its transpose.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <iomanip>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wser/error.hpp"

namespace wser {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using VectorXd = Vector<double>;

enum class BoundaryMode { periodic };

inline std::string_view to_string(BoundaryMode mode)
{
    switch (mode) {
    case BoundaryMode::periodic: return "periodic";
    }
    return "unknown";
}

inline BoundaryMode parse_boundary(std::string_view label)
{
    if (label == "periodic") return BoundaryMode::periodic;
    throw ConfigError("unknown boundary mode '" + std::string(label) + "' (supported: periodic)");
}

/// An orthonormal Daubechies wavelet in discrete-filter form.
template <typename Scalar = double>
struct WaveletSpec {
    std::string name;  // db1, db6, db8, db10
    int order = 0;     // vanishing moments N
    Vector<Scalar> lowpass;   // h, length 2N
    Vector<Scalar> highpass;  // g, length 2N

    Eigen::Index length() const { return lowpass.size(); }
};

namespace detail {

// Reconstruction low-pass constants (sum = sqrt 2), 17 significant digits.
inline constexpr long double kDb6[] = {
    0.11154074335010947L,   0.49462389039845306L,    0.7511339080210954L,
    0.31525035170919763L,   -0.22626469396543983L,   -0.12976686756726194L,
    0.09750160558732304L,   0.027522865530305727L,   -0.03158203931748603L,
    0.0005538422011614961L, 0.004777257510945511L,   -0.0010773010853084796L,
};

inline constexpr long double kDb8[] = {
    0.05441584224310401L,     0.31287159091429995L,     0.6756307362972898L,
    0.5853546836542067L,      -0.015829105256349306L,   -0.2840155429615469L,
    0.0004724845739132828L,   0.12874742662047847L,     -0.017369301001807547L,
    -0.044088253930794755L,   0.013981027917398282L,    0.008746094047405777L,
    -0.004870352993451574L,   -0.00039174037337694705L, 0.0006754494064505693L,
    -0.00011747678412476953L,
};

inline constexpr long double kDb10[] = {
    0.026670057900555554L,    0.1881768000776915L,      0.5272011889317256L,
    0.6884590394536035L,      0.2811723436605775L,      -0.24984642432731538L,
    -0.19594627437737705L,    0.12736934033579325L,     0.09305736460357235L,
    -0.07139414716639708L,    -0.029457536821875813L,   0.033212674059341L,
    0.0036065535669561697L,   -0.010733175483330575L,   0.001395351747052901L,
    0.001992405295185056L,    -0.0006858566949597116L,  -0.00011646685512928545L,
    9.358867032006959e-05L,   -1.3264202894521244e-05L,
};

template <typename Scalar>
Vector<Scalar> from_table(std::span<const long double> table)
{
    Vector<Scalar> v(static_cast<Eigen::Index>(table.size()));
    for (std::size_t i = 0; i < table.size(); ++i) v(static_cast<Eigen::Index>(i)) = Scalar(table[i]);
    return v;
}

inline Eigen::Index wrap(Eigen::Index i, Eigen::Index n)
{
    i %= n;
    return i < 0 ? i + n : i;
}

}  // namespace detail

/// Alternating flip: g[k] = (-1)^k h[L-1-k].
template <typename Derived>
Vector<typename Derived::Scalar> qmf_highpass(const Eigen::MatrixBase<Derived>& lowpass)
{
    using Scalar = typename Derived::Scalar;
    const Eigen::Index len = lowpass.size();
    if (len == 0 || len % 2 != 0)
        throw ConfigError("qmf_highpass: filter length must be even and non-zero, got " +
                          std::to_string(len));
    Vector<Scalar> g(len);
    for (Eigen::Index k = 0; k < len; ++k) {
        const Scalar h = lowpass(len - 1 - k);
        g(k) = (k % 2 == 0) ? h : Scalar(-h);
    }
    return g;
}

template <typename Scalar = double>
WaveletSpec<Scalar> daubechies_filter(int order)
{
    WaveletSpec<Scalar> spec;
    spec.order = order;
    spec.name = "db" + std::to_string(order);
    switch (order) {
    case 1: {
        using std::sqrt;
        const Scalar c = Scalar(1) / sqrt(Scalar(2));
        spec.lowpass = Vector<Scalar>::Constant(2, c);
        break;
    }
    case 6: spec.lowpass = detail::from_table<Scalar>(detail::kDb6); break;
    case 8: spec.lowpass = detail::from_table<Scalar>(detail::kDb8); break;
    case 10: spec.lowpass = detail::from_table<Scalar>(detail::kDb10); break;
    default:
        throw ConfigError("unsupported Daubechies order " + std::to_string(order) +
                          " (supported: 1, 6, 8, 10)");
    }
    spec.highpass = qmf_highpass(spec.lowpass);
    return spec;
}

/// Parses "db6" style names.
template <typename Scalar = double>
WaveletSpec<Scalar> wavelet_by_name(std::string_view name)
{
    if (name.size() < 3 || name.substr(0, 2) != "db")
        throw ConfigError("unknown wavelet '" + std::string(name) + "'");
    int order = 0;
    for (char c : name.substr(2)) {
        if (c < '0' || c > '9') throw ConfigError("unknown wavelet '" + std::string(name) + "'");
        order = order * 10 + (c - '0');
    }
    return daubechies_filter<Scalar>(order);
}

/// Residuals of the five orthonormal-filter invariants. Each entry is the
/// worst absolute deviation from its target value.
struct FilterCheck {
    double sum_error = 0;            // |sum h - sqrt 2|
    double norm_error = 0;           // |sum h^2 - 1|
    double orthogonality_error = 0;  // max over even m != 0 of |sum h_k h_{k+m}|
    double qmf_error = 0;            // max |g_k - (-1)^k h_{L-1-k}|
    double moment_error = 0;         // max over p < N of |sum (-1)^k k^p h_k|

    bool passes(double tol = 1e-10, double moment_tol = 1e-8) const
    {
        return sum_error <= tol && norm_error <= tol && orthogonality_error <= tol &&
               qmf_error <= tol && moment_error <= moment_tol;
    }
};

template <typename Scalar>
FilterCheck check_filter(const WaveletSpec<Scalar>& spec)
{
    using std::abs;
    using std::pow;
    using std::sqrt;
    FilterCheck r;
    const auto& h = spec.lowpass;
    const Eigen::Index len = h.size();
    r.sum_error = double(abs(h.sum() - sqrt(Scalar(2))));
    r.norm_error = double(abs(h.squaredNorm() - Scalar(1)));
    for (Eigen::Index m = 2; m < len; m += 2) {
        Scalar acc(0);
        for (Eigen::Index k = 0; k + m < len; ++k) acc += h(k) * h(k + m);
        r.orthogonality_error = std::max(r.orthogonality_error, double(abs(acc)));
    }
    for (Eigen::Index k = 0; k < len; ++k) {
        const Scalar expect = (k % 2 == 0 ? Scalar(1) : Scalar(-1)) * h(len - 1 - k);
        r.qmf_error = std::max(r.qmf_error, double(abs(spec.highpass(k) - expect)));
    }
    for (int p = 0; p < spec.order; ++p) {
        Scalar acc(0);
        for (Eigen::Index k = 0; k < len; ++k) {
            const Scalar sign = (k % 2 == 0) ? Scalar(1) : Scalar(-1);
            acc += sign * pow(Scalar(k), p) * h(k);
        }
        r.moment_error = std::max(r.moment_error, double(abs(acc)));
    }
    return r;
}

template <typename Scalar>
struct SubbandPair {
    Vector<Scalar> approx;
    Vector<Scalar> detail;
};

/// One level of the filter-bank cascade.
template <typename Derived, typename Scalar = typename Derived::Scalar>
SubbandPair<Scalar> analysis_step(const Eigen::MatrixBase<Derived>& signal,
                                  const WaveletSpec<Scalar>& spec,
                                  BoundaryMode boundary = BoundaryMode::periodic)
{
    const Eigen::Index n = signal.size();
    if (n == 0) throw DataError("analysis_step: empty signal");
    if (n < 2 || n % 2 != 0)
        throw DataError("analysis_step: periodic mode needs an even length >= 2, got " +
                        std::to_string(n));
    (void)boundary;  // periodic is the only mode

    const Eigen::Index half = n / 2;
    const Eigen::Index taps = spec.length();
    const Scalar* h = spec.lowpass.data();
    const Scalar* g = spec.highpass.data();
    const Eigen::Ref<const Vector<Scalar>> x(signal);

    SubbandPair<Scalar> out{Vector<Scalar>(half), Vector<Scalar>(half)};
    for (Eigen::Index i = 0; i < half; ++i) {
        Scalar a(0), d(0);
        const Eigen::Index base = 2 * i;
        if (base + taps <= n) {
            for (Eigen::Index k = 0; k < taps; ++k) {
                const Scalar v = x(base + k);
                a += h[k] * v;
                d += g[k] * v;
            }
        } else {
            for (Eigen::Index k = 0; k < taps; ++k) {
                const Scalar v = x(detail::wrap(base + k, n));
                a += h[k] * v;
                d += g[k] * v;
            }
        }
        out.approx(i) = a;
        out.detail(i) = d;
    }
    return out;
}

/// Transpose of analysis_step; exact inverse under periodic mode.
template <typename DerivedA, typename DerivedD, typename Scalar = typename DerivedA::Scalar>
Vector<Scalar> synthesis_step(const Eigen::MatrixBase<DerivedA>& approx,
                              const Eigen::MatrixBase<DerivedD>& detail,
                              const WaveletSpec<Scalar>& spec,
                              BoundaryMode boundary = BoundaryMode::periodic)
{
    if (approx.size() != detail.size())
        throw DataError("synthesis_step: approximation length " + std::to_string(approx.size()) +
                        " != detail length " + std::to_string(detail.size()));
    if (approx.size() == 0) throw DataError("synthesis_step: empty subbands");
    (void)boundary;

    const Eigen::Index half = approx.size();
    const Eigen::Index n = 2 * half;
    const Eigen::Index taps = spec.length();
    Vector<Scalar> x = Vector<Scalar>::Zero(n);
    for (Eigen::Index i = 0; i < half; ++i) {
        const Scalar a = approx(i);
        const Scalar d = detail(i);
        const Eigen::Index base = 2 * i;
        if (base + taps <= n) {
            for (Eigen::Index k = 0; k < taps; ++k) x(base + k) += spec.lowpass(k) * a + spec.highpass(k) * d;
        } else {
            for (Eigen::Index k = 0; k < taps; ++k)
                x(detail::wrap(base + k, n)) += spec.lowpass(k) * a + spec.highpass(k) * d;
        }
    }
    return x;
}

enum class SubbandKind { approximation, detail, packet };

template <typename Scalar = double>
struct Subband {
    int level = 0;
    SubbandKind kind = SubbandKind::detail;
    int position = 0;  // packet mode: index within the level, natural order
    Vector<Scalar> coefficients;

    /// "D3", "A10", or "P3.5" for packet leaves.
    std::string label() const
    {
        switch (kind) {
        case SubbandKind::approximation: return "A" + std::to_string(level);
        case SubbandKind::detail: return "D" + std::to_string(level);
        case SubbandKind::packet: break;
        }
        return "P" + std::to_string(level) + "." + std::to_string(position);
    }
};

template <typename Scalar = double>
struct DecompositionTree {
    std::string wavelet;
    int levels = 0;
    BoundaryMode boundary = BoundaryMode::periodic;
    bool packet = false;
    Eigen::Index original_length = 0;
    Eigen::Index padded_length = 0;
    /// DWT: [D1, ..., DJ, AJ]. Packet: 2^J leaves at level J in natural order,
    /// where node p splits into children 2p (low-pass) and 2p + 1 (high-pass).
    std::vector<Subband<Scalar>> subbands;

    double energy() const
    {
        double e = 0;
        for (const auto& s : subbands) e += double(s.coefficients.squaredNorm());
        return e;
    }
};

/// Smallest multiple of 2^levels holding `length` samples.
inline Eigen::Index padded_length(Eigen::Index length, int levels)
{
    const Eigen::Index block = Eigen::Index(1) << levels;
    return ((length + block - 1) / block) * block;
}

namespace detail {

template <typename Derived>
Vector<typename Derived::Scalar> prepare_signal(const Eigen::MatrixBase<Derived>& signal, int levels,
                                                const char* op)
{
    using Scalar = typename Derived::Scalar;
    if (levels < 1) throw ConfigError(std::string(op) + ": levels must be >= 1");
    if (levels > 30) throw ConfigError(std::string(op) + ": levels must be <= 30");
    const Eigen::Index n = signal.size();
    const Eigen::Index minimum = Eigen::Index(1) << levels;
    if (n < minimum)
        throw DataError(std::string(op) + ": signal of length " + std::to_string(n) +
                        " is too short for " + std::to_string(levels) +
                        " levels (minimum length " + std::to_string(minimum) + ")");
    Vector<Scalar> x = Vector<Scalar>::Zero(padded_length(n, levels));
    x.head(n) = signal;
    return x;
}

}  // namespace detail

/// Multi-level DWT: iterates analysis_step on the approximation branch.
/// Signals are zero-padded to a multiple of 2^levels.
template <typename Derived, typename Scalar = typename Derived::Scalar>
DecompositionTree<Scalar> decompose(const Eigen::MatrixBase<Derived>& signal,
                                    const WaveletSpec<Scalar>& spec, int levels,
                                    BoundaryMode boundary = BoundaryMode::periodic)
{
    Vector<Scalar> current = detail::prepare_signal(signal, levels, "decompose");

    DecompositionTree<Scalar> tree;
    tree.wavelet = spec.name;
    tree.levels = levels;
    tree.boundary = boundary;
    tree.original_length = signal.size();
    tree.padded_length = current.size();
    tree.subbands.reserve(static_cast<std::size_t>(levels) + 1);
    for (int j = 1; j <= levels; ++j) {
        auto step = analysis_step(current, spec, boundary);
        tree.subbands.push_back({j, SubbandKind::detail, 0, std::move(step.detail)});
        current = std::move(step.approx);
    }
    tree.subbands.push_back({levels, SubbandKind::approximation, 0, std::move(current)});
    return tree;
}

/// Full wavelet-packet tree: both branches split at every level.
template <typename Derived, typename Scalar = typename Derived::Scalar>
DecompositionTree<Scalar> packet_decompose(const Eigen::MatrixBase<Derived>& signal,
                                           const WaveletSpec<Scalar>& spec, int levels,
                                           BoundaryMode boundary = BoundaryMode::periodic)
{
    std::vector<Vector<Scalar>> nodes;
    nodes.push_back(detail::prepare_signal(signal, levels, "packet_decompose"));

    DecompositionTree<Scalar> tree;
    tree.wavelet = spec.name;
    tree.levels = levels;
    tree.boundary = boundary;
    tree.packet = true;
    tree.original_length = signal.size();
    tree.padded_length = nodes.front().size();

    for (int j = 1; j <= levels; ++j) {
        std::vector<Vector<Scalar>> next;
        next.reserve(nodes.size() * 2);
        for (const auto& node : nodes) {
            auto step = analysis_step(node, spec, boundary);
            next.push_back(std::move(step.approx));
            next.push_back(std::move(step.detail));
        }
        nodes = std::move(next);
    }
    tree.subbands.reserve(nodes.size());
    for (std::size_t p = 0; p < nodes.size(); ++p)
        tree.subbands.push_back({levels, SubbandKind::packet, static_cast<int>(p), std::move(nodes[p])});
    return tree;
}

/// Inverse DWT; truncates the zero padding back to original_length.
template <typename Scalar>
Vector<Scalar> reconstruct(const DecompositionTree<Scalar>& tree, const WaveletSpec<Scalar>& spec)
{
    if (tree.packet) throw ConfigError("reconstruct: packet-mode trees are not supported");
    if (tree.wavelet != spec.name)
        throw ConfigError("reconstruct: tree was built with " + tree.wavelet + ", not " + spec.name);
    if (tree.subbands.size() != static_cast<std::size_t>(tree.levels) + 1)
        throw DataError("reconstruct: expected " + std::to_string(tree.levels + 1) + " subbands, got " +
                        std::to_string(tree.subbands.size()));

    Vector<Scalar> current = tree.subbands.back().coefficients;
    for (int j = tree.levels; j >= 1; --j)
        current = synthesis_step(current, tree.subbands[static_cast<std::size_t>(j - 1)].coefficients, spec,
                                 tree.boundary);
    if (current.size() < tree.original_length)
        throw DataError("reconstruct: subbands too short for original length");
    return current.head(tree.original_length);
}

/// Text dump for inspection: a header line, then one line per subband:
/// `<label> <length> <c0> <c1> ...`.
template <typename Scalar>
void write_tree(std::ostream& os, const DecompositionTree<Scalar>& tree)
{
    os << "# wavelet=" << tree.wavelet << " levels=" << tree.levels
       << " boundary=" << to_string(tree.boundary) << " mode=" << (tree.packet ? "packet" : "dwt")
       << " original_length=" << tree.original_length << " padded_length=" << tree.padded_length
       << '\n';
    const auto old_precision = os.precision(std::numeric_limits<double>::max_digits10);
    for (const auto& s : tree.subbands) {
        os << s.label() << ' ' << s.coefficients.size();
        for (Eigen::Index i = 0; i < s.coefficients.size(); ++i) os << ' ' << double(s.coefficients(i));
        os << '\n';
    }
    os.precision(old_precision);
}

}  // namespace wser
