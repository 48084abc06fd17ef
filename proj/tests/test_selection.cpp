#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <set>
#include <vector>

#include "oracles.hpp"
#include "wser/error.hpp"
#include "wser/selection.hpp"

using namespace wser;

namespace {

// Rows cycle through the labels; every feature is N(0, 1) noise unless the
// caller overwrites it.
FeatureMatrix noise_matrix(std::mt19937_64& gen, int per_label, int features)
{
    std::normal_distribution<double> dist;
    FeatureMatrix m;
    const int rows = per_label * kNumEmotions;
    for (int c = 0; c < features; ++c) m.feature_names.push_back("f" + std::to_string(c));
    m.values.resize(rows, features);
    for (int r = 0; r < rows; ++r) {
        m.ids.push_back("row" + std::to_string(r));
        m.labels.push_back(kEmotions[static_cast<std::size_t>(r % kNumEmotions)]);
        for (int c = 0; c < features; ++c) m.values(r, c) = dist(gen);
    }
    return m;
}

std::vector<double> column_for(const FeatureMatrix& m, Eigen::Index c, Emotion e)
{
    std::vector<double> out;
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        if (m.labels[static_cast<std::size_t>(r)] == e) out.push_back(m.values(r, c));
    return out;
}

}  // namespace

TEST_CASE("welch_t: worked example")
{
    const std::vector<double> a{1, 2, 3, 4, 5}, b{2, 3, 4, 5, 6};
    const auto r = welch_t(a, b);
    CHECK(std::abs(r.t + 1.0) <= 1e-12);
    CHECK(std::abs(r.dof - 8.0) <= 1e-12);
    CHECK(std::abs(r.p - oracle::t_two_sided_by_quadrature(1.0, 8.0)) <= 1e-6);
    CHECK_FALSE(r.degenerate);
}

TEST_CASE("welch_t: identical samples")
{
    const std::vector<double> a{0.5, -1.0, 3.25, 2.0};
    const auto r = welch_t(a, a);
    CHECK(r.t == 0.0);
    CHECK(r.p == 1.0);
}

TEST_CASE("welch_t: zero-variance branches")
{
    const std::vector<double> zeros{0, 0, 0}, ones{1, 1, 1};
    const auto apart = welch_t(zeros, ones);
    CHECK(apart.degenerate);
    CHECK(apart.t == -kDegenerateT);
    CHECK(apart.p == 0.0);
    CHECK(welch_t(ones, zeros).t == kDegenerateT);

    const auto same = welch_t(ones, ones);
    CHECK(same.degenerate);
    CHECK(same.t == 0.0);
    CHECK(same.p == 1.0);

    // One sample constant, the other not: an ordinary test.
    const std::vector<double> spread{0.5, 1.5, 1.0};
    const auto mixed = welch_t(ones, spread);
    CHECK_FALSE(mixed.degenerate);
    CHECK(mixed.t == 0.0);
}

TEST_CASE("welch_t: rejects samples below two")
{
    const std::vector<double> one{1}, two{1, 2};
    CHECK_THROWS_AS(welch_t(one, two), DataError);
    CHECK_THROWS_AS(welch_t(two, one), DataError);
}

TEST_CASE("student_t_two_sided matches numerical integration")
{
    for (double dof : {1.0, 4.0, 8.0, 30.0}) {
        CAPTURE(dof);
        CHECK(std::abs(student_t_two_sided(2.0, dof) - oracle::t_two_sided_by_quadrature(2.0, dof)) <= 1e-6);
        CHECK(std::abs(student_t_two_sided(-2.0, dof) - student_t_two_sided(2.0, dof)) == 0.0);
    }
    // Closed forms: dof 1 is Cauchy, dof 2 has p = 1 - t / sqrt(2 + t^2).
    CHECK(student_t_two_sided(1.0, 1.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(student_t_two_sided(3.0, 2.0) == doctest::Approx(1 - 3 / std::sqrt(11.0)).epsilon(1e-12));
    CHECK(student_t_two_sided(0.0, 5.0) == 1.0);
    CHECK(student_t_two_sided(kDegenerateT, 5.0) == 0.0);
}

TEST_CASE("student_t_two_sided is monotone in |t|")
{
    for (double dof : {1.5, 7.0, 60.0}) {
        double prev = 1.0;
        for (double t = 0.1; t < 40; t *= 1.3) {
            const double p = student_t_two_sided(t, dof);
            CHECK(p < prev);
            CHECK(p >= 0.0);
            prev = p;
        }
    }
}

TEST_CASE("regularized_incomplete_beta: edges and symmetry")
{
    CHECK(regularized_incomplete_beta(2, 3, 0.0) == 0.0);
    CHECK(regularized_incomplete_beta(2, 3, 1.0) == 1.0);
    // I_x(1, 1) = x, I_x(a, 1) = x^a
    CHECK(regularized_incomplete_beta(1, 1, 0.3) == doctest::Approx(0.3).epsilon(1e-13));
    CHECK(regularized_incomplete_beta(2.5, 1, 0.4) == doctest::Approx(std::pow(0.4, 2.5)).epsilon(1e-12));
    for (double x : {0.05, 0.3, 0.7, 0.95})
        CHECK(regularized_incomplete_beta(3.5, 0.5, x) + regularized_incomplete_beta(0.5, 3.5, 1 - x) ==
              doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("welch_t: antisymmetry and affine invariance")
{
    std::mt19937_64 gen(21);
    for (int trial = 0; trial < 50; ++trial) {
        std::uniform_int_distribution<int> size(2, 30);
        std::normal_distribution<double> dist(0.3 * trial / 50.0, 1.0 + trial % 3);
        std::vector<double> a(static_cast<std::size_t>(size(gen))), b(static_cast<std::size_t>(size(gen)));
        for (auto& v : a) v = dist(gen);
        for (auto& v : b) v = dist(gen) + 0.5;

        const auto ab = welch_t(a, b), ba = welch_t(b, a);
        CHECK(ab.t == -ba.t);
        CHECK(ab.dof == ba.dof);
        CHECK(ab.p == ba.p);

        for (const auto& [c, d] : {std::pair{3.0, -7.0}, std::pair{-0.25, 100.0}}) {
            auto ta = a, tb = b;
            for (auto& v : ta) v = c * v + d;
            for (auto& v : tb) v = c * v + d;
            const auto r = welch_t(ta, tb);
            const double sign = c > 0 ? 1.0 : -1.0;
            CHECK(std::abs(r.t - sign * ab.t) <= 1e-9);
            CHECK(std::abs(r.dof - ab.dof) <= 1e-9);
            CHECK(std::abs(r.p - ab.p) <= 1e-9);
        }
    }
}

TEST_CASE("rank_pair: ordering against a brute-force re-rank")
{
    std::mt19937_64 gen(5);
    auto m = noise_matrix(gen, 12, 30);
    // f7: anger vs sadness ten standard deviations apart.
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        if (m.labels[static_cast<std::size_t>(r)] == Emotion::anger) m.values(r, 7) += 10.0;
        m.values(r, 12) = 4.0;
    }
    const auto ranked = rank_pair(m, Emotion::anger, Emotion::sadness);
    REQUIRE(ranked.size() == 30);
    CHECK(ranked.front().feature == "f7");
    CHECK(ranked.back().feature == "f12");
    CHECK(ranked.back().null_degenerate());
    CHECK(ranked.back().test.p == 1.0);

    std::vector<std::pair<double, std::string>> oracle_order;
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        const auto a = column_for(m, c, Emotion::anger), b = column_for(m, c, Emotion::sadness);
        const auto t = welch_t(a, b);
        oracle_order.emplace_back(t.p, m.feature_names[static_cast<std::size_t>(c)]);
        const auto it = std::find_if(ranked.begin(), ranked.end(),
                                     [&](const auto& r) { return r.feature == m.feature_names[std::size_t(c)]; });
        REQUIRE(it != ranked.end());
        CHECK(it->test.t == t.t);
        CHECK(it->label_a == Emotion::anger);
        CHECK(it->label_b == Emotion::sadness);
    }
    std::stable_sort(oracle_order.begin(), oracle_order.end(),
                     [](const auto& x, const auto& y) { return x.first < y.first; });
    for (std::size_t i = 1; i < ranked.size(); ++i) CHECK(ranked[i - 1].test.p <= ranked[i].test.p);
    CHECK(ranked.front().feature == oracle_order.front().second);
}

TEST_CASE("rank_pair: ties resolve by |t| then by name")
{
    FeatureMatrix m;
    m.feature_names = {"b", "a", "c"};
    m.values.resize(4, 3);
    // Zero-variance columns separating the pair: p = 0 for all three.
    m.values << 0, 0, 0,
                0, 0, 0,
                1, 1, 2,
                1, 1, 2;
    m.ids = {"r0", "r1", "r2", "r3"};
    m.labels = {Emotion::boredom, Emotion::boredom, Emotion::disgust, Emotion::disgust};
    const auto ranked = rank_pair(m, Emotion::boredom, Emotion::disgust);
    REQUIRE(ranked.size() == 3);
    CHECK(ranked[0].feature == "a");
    CHECK(ranked[1].feature == "b");
    CHECK(ranked[2].feature == "c");
}

TEST_CASE("rank_pair: insufficient rows")
{
    std::mt19937_64 gen(1);
    auto m = noise_matrix(gen, 2, 3);
    const auto sub = m.select_rows({0, 1, 2, 3, 4, 5, 6, 7, 8});
    CHECK_NOTHROW(rank_pair(sub, Emotion::disgust, Emotion::boredom));
    CHECK_THROWS_AS(rank_pair(sub, Emotion::anger, Emotion::boredom), DataError);
}

TEST_CASE("build_schema: a planted separator per pair is selected")
{
    std::mt19937_64 gen(9);
    const int per_label = 15;
    const auto pairs = emotion_pairs();
    auto m = noise_matrix(gen, per_label, 60);
    std::normal_distribution<double> tight(0.0, 0.01), wide(0.0, 100.0);
    // f0..f20 separate exactly one pair each; other labels are too diffuse to
    // make the feature useful elsewhere.
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            const auto label = m.labels[static_cast<std::size_t>(r)];
            double v = wide(gen);
            if (label == pairs[i].first) v = 1.0 + tight(gen);
            if (label == pairs[i].second) v = -1.0 + tight(gen);
            m.values(r, static_cast<Eigen::Index>(i)) = v;
        }
    }
    const auto schema = build_schema(m);
    REQUIRE(schema.slots.size() == 42);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto& s0 = schema.slots[2 * i];
        const auto& s1 = schema.slots[2 * i + 1];
        CAPTURE(pair_name(pairs[i].first, pairs[i].second));
        CHECK(s0.slot == 0);
        CHECK(s1.slot == 1);
        CHECK(s0.result.label_a == pairs[i].first);
        CHECK(s0.result.label_b == pairs[i].second);
        CHECK(s0.result.feature != s1.result.feature);
        const std::string planted = "f" + std::to_string(i);
        CHECK((s0.result.feature == planted || s1.result.feature == planted));
    }

    SUBCASE("rerun is byte-identical")
    {
        CHECK(build_schema(m).to_text() == schema.to_text());
    }
    SUBCASE("a constant column never changes the result")
    {
        auto wider = m;
        wider.feature_names.insert(wider.feature_names.begin(), "constant");
        wider.values.resize(m.rows(), m.cols() + 1);
        wider.values.col(0).setConstant(3.0);
        wider.values.rightCols(m.cols()) = m.values;
        CHECK(build_schema(wider).to_text() == schema.to_text());
    }
    SUBCASE("text form round trips")
    {
        const auto back = SelectionSchema::from_text(schema.to_text());
        CHECK(back.to_text() == schema.to_text());
        CHECK(back.hash() == schema.hash());
        CHECK(back.feature_names() == schema.feature_names());
        const auto path = std::filesystem::temp_directory_path() / "wser_test_schema.txt";
        write_schema(path, schema);
        CHECK(read_schema(path).to_text() == schema.to_text());
        std::filesystem::remove(path);
    }
}

TEST_CASE("build_schema: slot count and distinctness on noise")
{
    std::mt19937_64 gen(13);
    const auto m = noise_matrix(gen, 6, 40);
    const auto schema = build_schema(m);
    CHECK(schema.slots.size() == 42);
    CHECK(schema.hash().size() == 64);
    std::set<std::string> distinct;
    for (std::size_t i = 0; i < 21; ++i) {
        CHECK(schema.slots[2 * i].result.feature != schema.slots[2 * i + 1].result.feature);
        distinct.insert(schema.slots[2 * i].result.feature);
    }
    CHECK(distinct.size() > 1);
}

TEST_CASE("build_schema: too few informative features")
{
    std::mt19937_64 gen(2);
    auto m = noise_matrix(gen, 3, 3);
    m.values.col(1).setZero();
    m.values.col(2).setConstant(1.0);
    CHECK_THROWS_WITH_AS(build_schema(m), doctest::Contains("boredom-disgust"), DataError);
}

TEST_CASE("project: columns follow the slots")
{
    std::mt19937_64 gen(17);
    const auto m = noise_matrix(gen, 5, 50);
    const auto schema = build_schema(m);
    const auto p = project(m, schema);
    REQUIRE(p.cols() == 42);
    CHECK(p.rows() == m.rows());
    CHECK(p.ids == m.ids);
    for (Eigen::Index s = 0; s < 42; ++s) {
        const auto& name = schema.slots[static_cast<std::size_t>(s)].result.feature;
        CHECK(p.feature_names[static_cast<std::size_t>(s)] == name);
        CHECK(p.values.col(s) == m.values.col(m.column(name)));
    }

    SUBCASE("permuted slots permute columns")
    {
        auto shuffled = schema;
        std::reverse(shuffled.slots.begin(), shuffled.slots.end());
        const auto q = project(m, shuffled);
        for (Eigen::Index s = 0; s < 42; ++s) CHECK(q.values.col(s) == p.values.col(41 - s));
        CHECK(shuffled.hash() != schema.hash());
    }
    SUBCASE("missing feature")
    {
        auto broken = schema;
        broken.slots[3].result.feature = "db6.D99.mean";
        CHECK_THROWS_WITH_AS(project(m, broken), doctest::Contains("db6.D99.mean"), DataError);
    }
}
