#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "wser/wavelet.hpp"

using namespace wser;

namespace {

std::vector<double> to_std(const VectorXd& v) { return {v.data(), v.data() + v.size()}; }

double max_abs_diff(const VectorXd& a, const std::vector<double>& b)
{
    REQUIRE(static_cast<std::size_t>(a.size()) == b.size());
    double m = 0;
    for (std::size_t i = 0; i < b.size(); ++i) m = std::max(m, std::abs(a(static_cast<Eigen::Index>(i)) - b[i]));
    return m;
}

const int kOrders[] = {1, 6, 8, 10};

}  // namespace

TEST_CASE("daubechies_filter: invariants for every supported order")
{
    for (int order : kOrders) {
        CAPTURE(order);
        const auto spec = daubechies_filter(order);
        CHECK(spec.length() == 2 * order);
        CHECK(spec.name == "db" + std::to_string(order));
        const auto c = check_filter(spec);
        CHECK(c.sum_error <= 1e-10);
        CHECK(c.norm_error <= 1e-10);
        CHECK(c.orthogonality_error <= 1e-10);
        CHECK(c.qmf_error == 0.0);
        CHECK(c.moment_error <= 1e-8);
        CHECK(c.passes());
    }
}

TEST_CASE("daubechies_filter: haar coefficients")
{
    const auto spec = daubechies_filter(1);
    CHECK(spec.lowpass(0) == doctest::Approx(0.7071067812).epsilon(1e-10));
    CHECK(spec.lowpass(1) == doctest::Approx(0.7071067812).epsilon(1e-10));
}

TEST_CASE("daubechies_filter: db10 ninth moment vanishes")
{
    const auto spec = daubechies_filter(10);
    double acc = 0;
    for (int k = 0; k < 20; ++k) acc += ((k % 2 == 0) ? 1.0 : -1.0) * std::pow(double(k), 9) * spec.lowpass(k);
    CHECK(std::abs(acc) <= 1e-8);
}

TEST_CASE("daubechies_filter: deterministic and rejects unsupported orders")
{
    CHECK(daubechies_filter(8).lowpass == daubechies_filter(8).lowpass);
    CHECK_THROWS_AS(daubechies_filter(4), ConfigError);
    CHECK_THROWS_AS(daubechies_filter(0), ConfigError);
    CHECK_THROWS_WITH_AS(wavelet_by_name("sym4"), doctest::Contains("unknown wavelet"), ConfigError);
    CHECK(wavelet_by_name("db10").order == 10);
}

TEST_CASE("filter bank also instantiates in long double")
{
    const auto spec = daubechies_filter<long double>(6);
    CHECK(check_filter(spec).passes());
    Vector<long double> x(8);
    x << 1, 2, 3, 4, 5, 6, 7, 8;
    const auto tree = decompose(x, spec, 2);
    const auto back = reconstruct(tree, spec);
    CHECK(double((back - x).cwiseAbs().maxCoeff()) < 1e-15);
}

TEST_CASE("qmf_highpass")
{
    Eigen::Vector2d ab(3.0, 5.0);
    const auto g = qmf_highpass(ab);
    CHECK(g(0) == 5.0);
    CHECK(g(1) == -3.0);

    const double c = 1 / std::sqrt(2.0);
    const auto haar = qmf_highpass(Eigen::Vector2d(c, c));
    CHECK(haar(0) == c);
    CHECK(haar(1) == -c);

    const auto db6 = daubechies_filter(6);
    CHECK(std::abs(qmf_highpass(db6.lowpass).sum()) <= 1e-10);
    CHECK(qmf_highpass(db6.lowpass).size() == 12);

    CHECK_THROWS_AS(qmf_highpass(Eigen::Vector3d(1, 2, 3)), ConfigError);
}

TEST_CASE("analysis_step: haar fixtures")
{
    const auto haar = daubechies_filter(1);
    const double r2 = std::sqrt(2.0);

    const auto flat = analysis_step(Eigen::Vector4d(1, 1, 1, 1), haar);
    CHECK(flat.approx(0) == doctest::Approx(r2));
    CHECK(flat.approx(1) == doctest::Approx(r2));
    CHECK(flat.detail(0) == 0.0);
    CHECK(flat.detail(1) == 0.0);

    const auto alt = analysis_step(Eigen::Vector4d(1, -1, 1, -1), haar);
    CHECK(alt.approx(0) == 0.0);
    CHECK(alt.approx(1) == 0.0);
    CHECK(alt.detail(0) == doctest::Approx(r2));
    CHECK(alt.detail(1) == doctest::Approx(r2));
}

TEST_CASE("analysis_step: energy preserved for db6 on random length 64")
{
    std::mt19937_64 gen(7);
    const auto x = oracle::random_signal(gen, 64);
    const auto step = analysis_step(x, daubechies_filter(6));
    CHECK(std::abs(step.approx.squaredNorm() + step.detail.squaredNorm() - x.squaredNorm()) <= 1e-9);
}

TEST_CASE("analysis_step: error paths")
{
    const auto haar = daubechies_filter(1);
    CHECK_THROWS_AS(analysis_step(VectorXd(0), haar), DataError);
    CHECK_THROWS_AS(analysis_step(Eigen::Vector3d(1, 2, 3), haar), DataError);
    CHECK_THROWS_AS(parse_boundary("symmetric"), ConfigError);
    CHECK(parse_boundary("periodic") == BoundaryMode::periodic);
}

TEST_CASE("synthesis_step: inverts the haar fixtures")
{
    const auto haar = daubechies_filter(1);
    const double r2 = std::sqrt(2.0);
    const auto flat = synthesis_step(Eigen::Vector2d(r2, r2), Eigen::Vector2d(0, 0), haar);
    for (int i = 0; i < 4; ++i) CHECK(flat(i) == doctest::Approx(1.0));
    const auto alt = synthesis_step(Eigen::Vector2d(0, 0), Eigen::Vector2d(r2, r2), haar);
    for (int i = 0; i < 4; ++i) CHECK(alt(i) == doctest::Approx(i % 2 == 0 ? 1.0 : -1.0));
    CHECK_THROWS_AS(synthesis_step(Eigen::Vector2d(0, 0), Eigen::Vector3d(0, 0, 0), haar), DataError);
}

TEST_CASE("synthesis_step: round trip on random length 128 for each wavelet")
{
    std::mt19937_64 gen(11);
    for (int order : kOrders) {
        CAPTURE(order);
        const auto spec = daubechies_filter(order);
        const auto x = oracle::random_signal(gen, 128);
        const auto step = analysis_step(x, spec);
        const auto back = synthesis_step(step.approx, step.detail, spec);
        CHECK((back - x).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("decompose: constant haar signal and subband lengths")
{
    const auto haar = daubechies_filter(1);
    const double c = 0.37;
    const auto tree = decompose(VectorXd::Constant(1024, c), haar, 10);
    REQUIRE(tree.subbands.size() == 11);
    const std::vector<Eigen::Index> lengths = {512, 256, 128, 64, 32, 16, 8, 4, 2, 1, 1};
    for (std::size_t i = 0; i < 11; ++i) CHECK(tree.subbands[i].coefficients.size() == lengths[i]);
    for (int j = 0; j < 10; ++j) CHECK(tree.subbands[static_cast<std::size_t>(j)].coefficients.cwiseAbs().maxCoeff() == 0.0);
    CHECK(tree.subbands.back().kind == SubbandKind::approximation);
    CHECK(tree.subbands.back().label() == "A10");
    CHECK(tree.subbands.front().label() == "D1");
    CHECK(tree.subbands.back().coefficients(0) == doctest::Approx(32 * c).epsilon(1e-14));
}

TEST_CASE("decompose: matches the brute-force convolve-then-decimate cascade")
{
    std::mt19937_64 gen(3);
    const auto spec = daubechies_filter(8);
    const auto x = oracle::random_signal(gen, 256);
    const auto tree = decompose(x, spec, 3);
    const auto expected = oracle::cascade(to_std(x), to_std(spec.lowpass), 3);
    REQUIRE(expected.size() == tree.subbands.size());
    for (std::size_t i = 0; i < expected.size(); ++i) CHECK(max_abs_diff(tree.subbands[i].coefficients, expected[i]) <= 1e-12);
}

TEST_CASE("decompose: odd lengths are zero padded and recorded")
{
    std::mt19937_64 gen(5);
    const auto spec = daubechies_filter(6);
    const auto x = oracle::random_signal(gen, 1001);
    const auto tree = decompose(x, spec, 4);
    CHECK(tree.original_length == 1001);
    CHECK(tree.padded_length == 1008);
    CHECK(std::abs(tree.energy() - x.squaredNorm()) <= 1e-9);
    const auto back = reconstruct(tree, spec);
    CHECK(back.size() == 1001);
    CHECK((back - x).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("decompose: too short for the requested depth")
{
    const auto spec = daubechies_filter(1);
    CHECK_THROWS_WITH_AS(decompose(VectorXd::Ones(500), spec, 10), doctest::Contains("minimum length 1024"), DataError);
    CHECK_THROWS_AS(decompose(VectorXd::Ones(8), spec, 0), ConfigError);
}

TEST_CASE("decompose: energy conserved at every level")
{
    std::mt19937_64 gen(9);
    for (int order : kOrders) {
        const auto spec = daubechies_filter(order);
        const auto x = oracle::random_signal(gen, 1024);
        for (int levels = 1; levels <= 10; ++levels) {
            CAPTURE(order);
            CAPTURE(levels);
            CHECK(std::abs(decompose(x, spec, levels).energy() - x.squaredNorm()) <= 1e-9);
        }
    }
}

TEST_CASE("decompose: linearity")
{
    std::mt19937_64 gen(13);
    const auto spec = daubechies_filter(10);
    const auto x = oracle::random_signal(gen, 512);
    const auto y = oracle::random_signal(gen, 512);
    const double a = 1.7, b = -0.3;
    const auto tx = decompose(x, spec, 6), ty = decompose(y, spec, 6), txy = decompose((a * x + b * y).eval(), spec, 6);
    for (std::size_t i = 0; i < txy.subbands.size(); ++i) {
        const VectorXd expect = a * tx.subbands[i].coefficients + b * ty.subbands[i].coefficients;
        CHECK((txy.subbands[i].coefficients - expect).cwiseAbs().maxCoeff() <= 1e-10);
    }
}

TEST_CASE("analysis_step: circular shift by 2 shifts level-1 subbands by 1")
{
    std::mt19937_64 gen(17);
    for (int order : kOrders) {
        const auto spec = daubechies_filter(order);
        const auto x = oracle::random_signal(gen, 64);
        VectorXd shifted(64);
        for (int i = 0; i < 64; ++i) shifted((i + 2) % 64) = x(i);
        const auto s0 = analysis_step(x, spec);
        const auto s1 = analysis_step(shifted, spec);
        for (int n = 0; n < 32; ++n) {
            CHECK(s1.approx((n + 1) % 32) == doctest::Approx(s0.approx(n)).epsilon(1e-12));
            CHECK(s1.detail((n + 1) % 32) == doctest::Approx(s0.detail(n)).epsilon(1e-12));
        }
    }
}

TEST_CASE("packet_decompose")
{
    std::mt19937_64 gen(19);
    const auto x = oracle::random_signal(gen, 64);
    const auto spec = daubechies_filter(6);

    SUBCASE("first level coincides with the DWT")
    {
        const auto p = packet_decompose(x, spec, 1);
        const auto d = decompose(x, spec, 1);
        REQUIRE(p.subbands.size() == 2);
        CHECK(p.subbands[0].coefficients == d.subbands[1].coefficients);  // approximation
        CHECK(p.subbands[1].coefficients == d.subbands[0].coefficients);  // detail
    }
    SUBCASE("2^J leaves of equal length")
    {
        const auto p = packet_decompose(x, spec, 3);
        CHECK(p.packet);
        REQUIRE(p.subbands.size() == 8);
        for (const auto& s : p.subbands) CHECK(s.coefficients.size() == 8);
        CHECK(p.subbands[5].label() == "P3.5");
    }
    SUBCASE("haar leaf energy equals signal energy")
    {
        const auto p = packet_decompose(x, daubechies_filter(1), 2);
        CHECK(std::abs(p.energy() - x.squaredNorm()) <= 1e-9);
    }
    SUBCASE("reconstruct refuses packet trees")
    {
        CHECK_THROWS_AS(reconstruct(packet_decompose(x, spec, 2), spec), ConfigError);
    }
}

TEST_CASE("reconstruct: round trips and zero trees")
{
    std::mt19937_64 gen(23);
    const auto x1 = oracle::random_signal(gen, 1024);
    const auto db1 = daubechies_filter(1);
    CHECK((reconstruct(decompose(x1, db1, 10), db1) - x1).cwiseAbs().maxCoeff() < 1e-9);

    const auto x2 = oracle::random_signal(gen, 4096);
    const auto db10 = daubechies_filter(10);
    CHECK((reconstruct(decompose(x2, db10, 5), db10) - x2).cwiseAbs().maxCoeff() < 1e-9);

    auto zero = decompose(x2, db10, 5);
    for (auto& s : zero.subbands) s.coefficients.setZero();
    CHECK(reconstruct(zero, db10).cwiseAbs().maxCoeff() == 0.0);

    CHECK_THROWS_AS(reconstruct(decompose(x2, db10, 5), db1), ConfigError);
}

TEST_CASE("perfect reconstruction across depths and lengths")
{
    std::mt19937_64 gen(29);
    for (int order : kOrders) {
        const auto spec = daubechies_filter(order);
        for (int levels = 1; levels <= 10; ++levels) {
            for (Eigen::Index n : {Eigen::Index(1) << levels, Eigen::Index(1) << 14, Eigen::Index(3000)}) {
                if (n < (Eigen::Index(1) << levels)) continue;
                const auto x = oracle::random_signal(gen, n);
                CAPTURE(order);
                CAPTURE(levels);
                CAPTURE(n);
                CHECK((reconstruct(decompose(x, spec, levels), spec) - x).cwiseAbs().maxCoeff() < 1e-9);
            }
        }
    }
}

TEST_CASE("write_tree dump")
{
    const auto spec = daubechies_filter(1);
    const auto tree = decompose(Eigen::Vector4d(1, 1, 1, 1), spec, 2);
    std::ostringstream os;
    write_tree(os, tree);
    const auto text = os.str();
    CHECK(text.find("# wavelet=db1 levels=2 boundary=periodic mode=dwt original_length=4") == 0);
    CHECK(text.find("\nD1 2 0 0\n") != std::string::npos);
    CHECK(text.find("\nA2 1 ") != std::string::npos);
}
