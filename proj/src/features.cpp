#include "wser/features.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <sstream>
#include <thread>

#include "wser/error.hpp"
#include "wser/io.hpp"

namespace wser {

Eigen::Index FeatureMatrix::column(const std::string& name) const
{
    const auto it = std::find(feature_names.begin(), feature_names.end(), name);
    return it == feature_names.end() ? -1 : static_cast<Eigen::Index>(it - feature_names.begin());
}

FeatureMatrix FeatureMatrix::select_rows(const std::vector<Eigen::Index>& rows) const
{
    FeatureMatrix out;
    out.feature_names = feature_names;
    out.values.resize(static_cast<Eigen::Index>(rows.size()), cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto r = rows[i];
        out.ids.push_back(ids[static_cast<std::size_t>(r)]);
        out.labels.push_back(labels[static_cast<std::size_t>(r)]);
        out.values.row(static_cast<Eigen::Index>(i)) = values.row(r);
    }
    return out;
}

void FeatureMatrix::require_rows_per_label(int minimum, const std::string& context) const
{
    std::array<int, kNumEmotions> counts{};
    for (Emotion e : labels) ++counts[static_cast<std::size_t>(index_of(e))];
    std::string short_labels;
    for (int i = 0; i < kNumEmotions; ++i) {
        if (counts[static_cast<std::size_t>(i)] < minimum)
            short_labels += " " + std::string(kEmotionNames[static_cast<std::size_t>(i)]) + "(" +
                            std::to_string(counts[static_cast<std::size_t>(i)]) + ")";
    }
    if (!short_labels.empty())
        throw DataError(context + ": need at least " + std::to_string(minimum) +
                        " rows per label; short:" + short_labels);
}

std::string feature_name(const std::string& wavelet, const std::string& subband, std::string_view stat)
{
    std::string s;
    s.reserve(wavelet.size() + subband.size() + stat.size() + 2);
    s += wavelet;
    s += '.';
    s += subband;
    s += '.';
    s += stat;
    return s;
}

FeatureVector extract_recording(const Recording& rec, const std::vector<WaveletSpec<double>>& wavelets,
                                int levels)
{
    FeatureVector fv;
    const auto total = static_cast<Eigen::Index>(wavelets.size()) * (levels + 1) * kNumStats;
    fv.names.reserve(static_cast<std::size_t>(total));
    fv.values.resize(total);
    Eigen::Index k = 0;
    for (const auto& spec : wavelets) {
        const auto tree = decompose(rec.samples, spec, levels);
        for (const auto& band : tree.subbands) {
            const auto label = band.label();
            const auto stats = subband_stats(band.coefficients);
            if (stats.degenerate) fv.degenerate.push_back(spec.name + "." + label);
            const auto values = stats.values();
            for (int s = 0; s < kNumStats; ++s) {
                fv.names.push_back(feature_name(spec.name, label, kStatNames[static_cast<std::size_t>(s)]));
                fv.values(k++) = values[static_cast<std::size_t>(s)];
            }
        }
    }
    if (!fv.values.allFinite()) throw DataError("non-finite feature in recording " + rec.id);
    return fv;
}

FeatureMatrix extract_corpus(const std::vector<Recording>& corpus,
                             const std::vector<WaveletSpec<double>>& wavelets, int levels, unsigned threads)
{
    if (corpus.empty()) throw DataError("extract_corpus: empty corpus");
    if (wavelets.empty()) throw ConfigError("extract_corpus: no wavelets given");

    const std::size_t n = corpus.size();
    std::vector<FeatureVector> rows(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                rows[i] = extract_recording(corpus[i], wavelets, levels);
            } catch (const std::exception& e) {
                errors[i] = std::make_exception_ptr(DataError("recording " + corpus[i].id + ": " + e.what()));
            }
        }
    };
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
        worker();
    }
    for (const auto& err : errors)
        if (err) std::rethrow_exception(err);

    FeatureMatrix m;
    m.feature_names = rows.front().names;
    m.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m.feature_names.size()));
    for (std::size_t i = 0; i < n; ++i) {
        if (rows[i].names != m.feature_names)
            throw DataError("recording " + corpus[i].id + " produced a different feature set");
        m.ids.push_back(corpus[i].id);
        m.labels.push_back(corpus[i].label);
        m.values.row(static_cast<Eigen::Index>(i)) = rows[i].values.transpose();
    }
    return m;
}

void write_feature_csv(const std::filesystem::path& path, const FeatureMatrix& matrix)
{
    std::ostringstream os;
    os << "id,label";
    for (const auto& name : matrix.feature_names) os << ',' << name;
    os << '\n';
    for (Eigen::Index r = 0; r < matrix.rows(); ++r) {
        os << matrix.ids[static_cast<std::size_t>(r)] << ',' << to_string(matrix.labels[static_cast<std::size_t>(r)]);
        for (Eigen::Index c = 0; c < matrix.cols(); ++c) os << ',' << format_double(matrix.values(r, c));
        os << '\n';
    }
    write_file_atomic(path, os.str());
}

FeatureMatrix read_feature_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw DataError("cannot open feature CSV " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty feature CSV " + path.string());
    auto header = split_fields(line, ',');
    if (header.size() < 3 || header[0] != "id" || header[1] != "label")
        throw DataError(path.string() + ": header must start with 'id,label'");

    FeatureMatrix m;
    m.feature_names.assign(header.begin() + 2, header.end());

    std::vector<std::vector<double>> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_fields(line, ',');
        const std::string where = path.string() + ":" + std::to_string(lineno);
        if (fields.size() != header.size())
            throw DataError(where + ": expected " + std::to_string(header.size()) + " fields, got " +
                            std::to_string(fields.size()));
        const auto label = parse_emotion(fields[1]);
        if (!label) throw DataError(where + ": bad label '" + fields[1] + "'");
        m.ids.push_back(fields[0]);
        m.labels.push_back(*label);
        std::vector<double> row;
        row.reserve(fields.size() - 2);
        for (std::size_t i = 2; i < fields.size(); ++i) row.push_back(parse_double(fields[i], where));
        rows.push_back(std::move(row));
    }
    m.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(m.feature_names.size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[r].size(); ++c)
            m.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    return m;
}

}  // namespace wser
