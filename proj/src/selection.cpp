#include "wser/selection.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <memory>
#include <sstream>

#include "wser/error.hpp"
#include "wser/io.hpp"

namespace wser {

namespace {

// Modified Lentz evaluation of the incomplete beta continued fraction.
double beta_continued_fraction(double a, double b, double x)
{
    constexpr int kMaxIterations = 10000;
    constexpr double kEps = 1e-16;
    constexpr double kTiny = 1e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIterations; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) return h;
    }
    throw std::runtime_error("incomplete beta continued fraction did not converge");
}

struct Moments {
    double mean = 0;
    double var = 0;  // unbiased
};

Moments sample_moments(std::span<const double> x)
{
    Moments m;
    for (double v : x) m.mean += v;
    m.mean /= double(x.size());
    for (double v : x) m.var += (v - m.mean) * (v - m.mean);
    m.var /= double(x.size() - 1);
    return m;
}

std::string sha256_hex(const std::string& data)
{
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
        EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1)
        throw std::runtime_error("SHA-256 computation failed");
    std::ostringstream os;
    os << std::hex << std::setfill('0');
    for (unsigned int i = 0; i < len; ++i) os << std::setw(2) << int(digest[i]);
    return os.str();
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x)
{
    if (a <= 0 || b <= 0) throw std::domain_error("incomplete beta: a and b must be positive");
    if (x <= 0) return 0.0;
    if (x >= 1) return 1.0;
    const double log_front =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
    return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided(double t, double dof)
{
    if (!(dof > 0)) throw std::domain_error("student_t_two_sided: dof must be positive");
    if (std::isinf(t)) return 0.0;
    const double t2 = t * t;
    return regularized_incomplete_beta(0.5 * dof, 0.5, dof / (dof + t2));
}

TTest welch_t(std::span<const double> a, std::span<const double> b)
{
    if (a.size() < 2 || b.size() < 2)
        throw DataError("welch_t: each sample needs at least 2 values (got " + std::to_string(a.size()) + " and " +
                        std::to_string(b.size()) + ")");
    const auto ma = sample_moments(a);
    const auto mb = sample_moments(b);
    const double na = double(a.size());
    const double nb = double(b.size());
    const double va = ma.var / na;
    const double vb = mb.var / nb;

    TTest r;
    if (va + vb == 0.0) {
        r.degenerate = true;
        r.dof = na + nb - 2.0;
        if (ma.mean == mb.mean) {
            r.t = 0.0;
            r.p = 1.0;
        } else {
            r.t = ma.mean > mb.mean ? kDegenerateT : -kDegenerateT;
            r.p = 0.0;
        }
        return r;
    }
    const double se2 = va + vb;
    r.t = (ma.mean - mb.mean) / std::sqrt(se2);
    r.dof = se2 * se2 / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    r.p = student_t_two_sided(r.t, r.dof);
    return r;
}

std::vector<PairTestResult> rank_pair(const FeatureMatrix& matrix, Emotion a, Emotion b)
{
    std::vector<Eigen::Index> rows_a, rows_b;
    for (std::size_t i = 0; i < matrix.labels.size(); ++i) {
        if (matrix.labels[i] == a) rows_a.push_back(static_cast<Eigen::Index>(i));
        if (matrix.labels[i] == b) rows_b.push_back(static_cast<Eigen::Index>(i));
    }
    if (rows_a.size() < 2 || rows_b.size() < 2)
        throw DataError("rank_pair " + pair_name(a, b) + ": need at least 2 rows per label (have " +
                        std::to_string(rows_a.size()) + " and " + std::to_string(rows_b.size()) + ")");

    std::vector<double> xa(rows_a.size()), xb(rows_b.size());
    std::vector<PairTestResult> out;
    out.reserve(static_cast<std::size_t>(matrix.cols()));
    for (Eigen::Index c = 0; c < matrix.cols(); ++c) {
        for (std::size_t i = 0; i < rows_a.size(); ++i) xa[i] = matrix.values(rows_a[i], c);
        for (std::size_t i = 0; i < rows_b.size(); ++i) xb[i] = matrix.values(rows_b[i], c);
        out.push_back({matrix.feature_names[static_cast<std::size_t>(c)], a, b, welch_t(xa, xb)});
    }
    std::sort(out.begin(), out.end(), [](const PairTestResult& l, const PairTestResult& r) {
        if (l.test.p != r.test.p) return l.test.p < r.test.p;
        const double tl = std::abs(l.test.t), tr = std::abs(r.test.t);
        if (tl != tr) return tl > tr;
        if (l.null_degenerate() != r.null_degenerate()) return r.null_degenerate();
        return l.feature < r.feature;
    });
    return out;
}

std::vector<std::string> SelectionSchema::feature_names() const
{
    std::vector<std::string> names;
    names.reserve(slots.size());
    for (const auto& s : slots) names.push_back(s.result.feature);
    return names;
}

std::string SelectionSchema::to_text() const
{
    std::ostringstream os;
    os << "# pair  slot  feature  t  dof  p\n";
    for (const auto& s : slots) {
        os << pair_name(s.result.label_a, s.result.label_b) << "  " << s.slot << "  " << s.result.feature << "  "
           << format_double(s.result.test.t) << "  " << format_double(s.result.test.dof) << "  "
           << format_double(s.result.test.p) << '\n';
    }
    return os.str();
}

SelectionSchema SelectionSchema::from_text(const std::string& text)
{
    SelectionSchema schema;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const std::string where = "schema line " + std::to_string(lineno);
        std::istringstream fields(line);
        std::string pair, slot, feature, t, dof, p;
        if (!(fields >> pair >> slot >> feature >> t >> dof >> p))
            throw DataError(where + ": expected '<pair> <slot> <feature> <t> <dof> <p>'");
        const auto dash = pair.find('-');
        const auto la = dash == std::string::npos ? std::nullopt : parse_emotion(pair.substr(0, dash));
        const auto lb = dash == std::string::npos ? std::nullopt : parse_emotion(pair.substr(dash + 1));
        if (!la || !lb) throw DataError(where + ": bad pair '" + pair + "'");
        SchemaSlot s;
        s.slot = static_cast<int>(parse_double(slot, where));
        s.result.feature = feature;
        s.result.label_a = *la;
        s.result.label_b = *lb;
        s.result.test.t = parse_double(t, where);
        s.result.test.dof = parse_double(dof, where);
        s.result.test.p = parse_double(p, where);
        s.result.test.degenerate = std::abs(s.result.test.t) == kDegenerateT ||
                                   (s.result.test.t == 0.0 && s.result.test.p == 1.0);
        schema.slots.push_back(std::move(s));
    }
    if (schema.slots.empty()) throw DataError("schema has no slots");
    return schema;
}

std::string SelectionSchema::hash() const
{
    std::string joined;
    for (const auto& s : slots) {
        joined += s.result.feature;
        joined += '\n';
    }
    return sha256_hex(joined);
}

SelectionSchema build_schema(const FeatureMatrix& matrix)
{
    matrix.require_rows_per_label(2, "build_schema");
    SelectionSchema schema;
    schema.slots.reserve(2 * kNumPairs);
    for (const auto& [a, b] : emotion_pairs()) {
        const auto ranked = rank_pair(matrix, a, b);
        int taken = 0;
        for (const auto& r : ranked) {
            if (taken == 2) break;
            if (r.null_degenerate()) break;  // everything after is uninformative too
            if (taken == 1 && schema.slots.back().result.feature == r.feature) continue;
            schema.slots.push_back({r, taken});
            ++taken;
        }
        if (taken < 2)
            throw DataError("build_schema: fewer than 2 informative features for pair " + pair_name(a, b));
    }
    return schema;
}

void write_schema(const std::filesystem::path& path, const SelectionSchema& schema)
{
    write_file_atomic(path, schema.to_text());
}

SelectionSchema read_schema(const std::filesystem::path& path)
{
    return SelectionSchema::from_text(read_file(path));
}

FeatureMatrix project(const FeatureMatrix& matrix, const SelectionSchema& schema)
{
    std::map<std::string, Eigen::Index> index;
    for (std::size_t c = 0; c < matrix.feature_names.size(); ++c)
        index.emplace(matrix.feature_names[c], static_cast<Eigen::Index>(c));

    FeatureMatrix out;
    out.ids = matrix.ids;
    out.labels = matrix.labels;
    out.values.resize(matrix.rows(), static_cast<Eigen::Index>(schema.slots.size()));
    for (std::size_t s = 0; s < schema.slots.size(); ++s) {
        const auto& name = schema.slots[s].result.feature;
        const auto it = index.find(name);
        if (it == index.end()) throw DataError("project: feature '" + name + "' is not in the matrix");
        out.feature_names.push_back(name);
        out.values.col(static_cast<Eigen::Index>(s)) = matrix.values.col(it->second);
    }
    return out;
}

}  // namespace wser
