#include "wser/evaluation.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "wser/audio.hpp"
#include "wser/error.hpp"
#include "wser/io.hpp"
#include "wser/random.hpp"

namespace wser {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

long long parse_integer(const std::string& key, const std::string& value)
{
    try {
        std::size_t used = 0;
        const long long v = std::stoll(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: '" + key + "' expects an integer, got '" + value + "'");
    }
}

std::uint64_t parse_seed(const std::string& key, const std::string& value)
{
    try {
        std::size_t used = 0;
        const auto v = std::stoull(value, &used);
        if (used != value.size() || value.front() == '-') throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: '" + key + "' expects a non-negative integer, got '" + value + "'");
    }
}

double parse_real(const std::string& key, const std::string& value)
{
    try {
        return parse_double(value, "config: '" + key + "'");
    } catch (const DataError& e) {
        throw ConfigError(e.what());
    }
}

int to_int(const std::string& key, long long v)
{
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
        throw ConfigError("config: '" + key + "' out of range");
    return static_cast<int>(v);
}

}  // namespace

Split stratified_split(const FeatureMatrix& matrix, std::uint64_t seed, double test_fraction)
{
    if (!(test_fraction > 0 && test_fraction < 1)) throw ConfigError("test_fraction must be in (0, 1)");
    matrix.require_rows_per_label(2, "split");
    Rng rng(seed);
    Split split;
    for (Emotion e : kEmotions) {
        std::vector<Eigen::Index> rows;
        for (std::size_t i = 0; i < matrix.labels.size(); ++i)
            if (matrix.labels[i] == e) rows.push_back(static_cast<Eigen::Index>(i));
        rng.shuffle(std::span(rows));
        const auto n = static_cast<long long>(rows.size());
        const long long n_test = std::clamp(std::llround(double(n) * test_fraction), 1LL, n - 1);
        split.test.insert(split.test.end(), rows.begin(), rows.begin() + n_test);
        split.train.insert(split.train.end(), rows.begin() + n_test, rows.end());
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

Eigen::Matrix<double, kNumEmotions, kNumEmotions> ConfusionMatrix::row_percent() const
{
    Eigen::Matrix<double, kNumEmotions, kNumEmotions> pct = Eigen::Matrix<double, kNumEmotions, kNumEmotions>::Zero();
    for (int r = 0; r < kNumEmotions; ++r) {
        const long long total = row_total(r);
        if (total == 0) continue;
        for (int c = 0; c < kNumEmotions; ++c) pct(r, c) = 100.0 * double(counts(r, c)) / double(total);
    }
    return pct;
}

ConfusionMatrix confusion(const std::vector<Emotion>& truth, const std::vector<Emotion>& predicted)
{
    if (truth.size() != predicted.size())
        throw DataError("confusion: " + std::to_string(truth.size()) + " true labels vs " +
                        std::to_string(predicted.size()) + " predictions");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const int t = index_of(truth[i]);
        const int p = index_of(predicted[i]);
        if (t < 0 || t >= kNumEmotions || p < 0 || p >= kNumEmotions) throw DataError("confusion: unknown label");
        ++cm.counts(t, p);
    }
    return cm;
}

std::vector<PairError> pairwise_errors(const ConfusionMatrix& cm)
{
    const auto pct = cm.row_percent();
    std::vector<PairError> out;
    out.reserve(kNumPairs);
    for (const auto& [a, b] : emotion_pairs()) {
        const int i = index_of(a), j = index_of(b);
        const bool has_a = cm.row_total(i) > 0, has_b = cm.row_total(j) > 0;
        if (!has_a && !has_b) throw DataError("pairwise_errors: rows for " + pair_name(a, b) + " are both empty");
        double sum = 0;
        int rows = 0;
        if (has_a) sum += pct(i, j), ++rows;
        if (has_b) sum += pct(j, i), ++rows;
        out.push_back({a, b, sum / rows});
    }
    return out;
}

double overall_accuracy(const ConfusionMatrix& cm)
{
    const long long total = cm.total();
    if (total == 0) throw DataError("overall_accuracy: empty confusion matrix");
    return 100.0 * double(cm.counts.trace()) / double(total);
}

double mean_class_accuracy(const ConfusionMatrix& cm)
{
    if (cm.total() == 0) throw DataError("mean_class_accuracy: empty confusion matrix");
    const auto pct = cm.row_percent();
    double sum = 0;
    int rows = 0;
    for (int r = 0; r < kNumEmotions; ++r) {
        if (cm.row_total(r) == 0) continue;
        sum += pct(r, r);
        ++rows;
    }
    return sum / rows;
}

std::string format_percent(double value)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%05.2f%%", value);
    return buf;
}

std::string render_confusion_table(const ConfusionMatrix& cm)
{
    const auto pct = cm.row_percent();
    std::ostringstream os;
    os << "Emotional states";
    for (Emotion e : kEmotions) os << '\t' << display_name(e);
    os << '\n';
    for (int r = 0; r < kNumEmotions; ++r) {
        os << display_name(kEmotions[static_cast<std::size_t>(r)]);
        for (int c = 0; c < kNumEmotions; ++c) os << '\t' << format_percent(pct(r, c));
        os << '\n';
    }
    return os.str();
}

std::string render_pairwise_table(const std::vector<PairError>& errors)
{
    std::ostringstream os;
    os << "Pair of emotional states\tError percentage\n";
    char buf[32];
    for (const auto& e : errors) {
        std::snprintf(buf, sizeof buf, "%.2f%%", e.percent);
        os << display_name(e.a) << " - " << display_name(e.b) << '\t' << buf << '\n';
    }
    return os.str();
}

std::string render_counts_csv(const ConfusionMatrix& cm)
{
    std::ostringstream os;
    os << "true\\predicted";
    for (auto name : kEmotionNames) os << ',' << name;
    os << '\n';
    for (int r = 0; r < kNumEmotions; ++r) {
        os << kEmotionNames[static_cast<std::size_t>(r)];
        for (int c = 0; c < kNumEmotions; ++c) os << ',' << cm.counts(r, c);
        os << '\n';
    }
    return os.str();
}

std::string render_report_json(const ConfusionMatrix& cm)
{
    nlohmann::ordered_json j;
    j["labels"] = std::vector<std::string>(kEmotionNames.begin(), kEmotionNames.end());
    auto counts = nlohmann::json::array();
    for (int r = 0; r < kNumEmotions; ++r) {
        std::vector<long long> row;
        for (int c = 0; c < kNumEmotions; ++c) row.push_back(cm.counts(r, c));
        counts.push_back(row);
    }
    j["counts"] = counts;
    j["total"] = cm.total();
    j["correct"] = cm.counts.trace();
    if (cm.total() > 0) {
        j["overall_accuracy_percent"] = overall_accuracy(cm);
        j["mean_class_accuracy_percent"] = mean_class_accuracy(cm);
    }
    return j.dump(1) + "\n";
}

void RunConfig::validate() const
{
    if (!manifest && !synth_seed)
        throw ConfigError("config: no corpus given; set 'manifest' or the synthetic corpus field 'synth_seed'");
    if (manifest && synth_seed) throw ConfigError("config: 'manifest' and 'synth_seed' are mutually exclusive");
    if (!seed) throw ConfigError("config: missing required field 'seed'");
    if (synth_seed) {
        if (synth_per_class < 2) throw ConfigError("config: 'synth_per_class' must be >= 2");
        if (synth_length < 2) throw ConfigError("config: 'synth_length' must be >= 2");
        if (synth_rate <= 0) throw ConfigError("config: 'synth_rate' must be positive");
    }
    if (wavelets.empty()) throw ConfigError("config: 'wavelets' is empty");
    if (levels < 1 || levels > 20) throw ConfigError("config: 'levels' must be in [1, 20]");
    if (!(test_fraction > 0 && test_fraction < 0.5)) throw ConfigError("config: 'test_fraction' must be in (0, 0.5)");
    train.validate();
    (void)parse_wavelets(wavelets);
}

void apply_config_value(RunConfig& config, const std::string& key, const std::string& value)
{
    if (key == "manifest") config.manifest = value;
    else if (key == "synth_seed") config.synth_seed = parse_seed(key, value);
    else if (key == "synth_per_class") config.synth_per_class = to_int(key, parse_integer(key, value));
    else if (key == "synth_length") config.synth_length = to_int(key, parse_integer(key, value));
    else if (key == "synth_rate") config.synth_rate = to_int(key, parse_integer(key, value));
    else if (key == "wavelets") {
        config.wavelets.clear();
        for (auto& w : split_fields(value, ',')) {
            w = trim(w);
            if (!w.empty()) config.wavelets.push_back(w);
        }
    } else if (key == "levels") config.levels = to_int(key, parse_integer(key, value));
    else if (key == "seed") config.seed = parse_seed(key, value);
    else if (key == "test_fraction") config.test_fraction = parse_real(key, value);
    else if (key == "learning_rate") config.train.learning_rate = parse_real(key, value);
    else if (key == "momentum") config.train.momentum = parse_real(key, value);
    else if (key == "batch_size") config.train.batch_size = to_int(key, parse_integer(key, value));
    else if (key == "max_epochs") config.train.max_epochs = to_int(key, parse_integer(key, value));
    else if (key == "patience") config.train.patience = to_int(key, parse_integer(key, value));
    else if (key == "validation_fraction") config.train.validation_fraction = parse_real(key, value);
    else if (key == "hidden") config.train.hidden = to_int(key, parse_integer(key, value));
    else if (key == "output") config.output = value;
    else if (key == "threads") config.threads = static_cast<unsigned>(to_int(key, parse_integer(key, value)));
    else throw ConfigError("config: unknown key '" + key + "'");
}

void apply_config_file(RunConfig& config, const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected 'key = value'");
        apply_config_value(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
}

std::vector<WaveletSpec<double>> parse_wavelets(const std::vector<std::string>& names)
{
    std::vector<WaveletSpec<double>> specs;
    for (const auto& n : names) specs.push_back(wavelet_by_name(n));
    return specs;
}

ConfusionMatrix evaluate(const NetworkParams& params, const FeatureMatrix& projected)
{
    const Eigen::MatrixXd memberships = forward_batch(params, projected.values);
    std::vector<Emotion> predicted;
    predicted.reserve(static_cast<std::size_t>(memberships.rows()));
    for (Eigen::Index i = 0; i < memberships.rows(); ++i)
        predicted.push_back(kEmotions[static_cast<std::size_t>(argmax_first(memberships.row(i).transpose()))]);
    return confusion(projected.labels, predicted);
}

void write_reports(const std::filesystem::path& dir, const ConfusionMatrix& cm)
{
    std::filesystem::create_directories(dir);
    write_file_atomic(dir / "confusion.txt", render_confusion_table(cm));
    write_file_atomic(dir / "confusion_counts.csv", render_counts_csv(cm));
    write_file_atomic(dir / "pairwise_errors.txt", render_pairwise_table(pairwise_errors(cm)));
    write_file_atomic(dir / "report.json", render_report_json(cm));
}

namespace {

template <typename F>
auto stage(const char* name, F&& f)
{
    try {
        return f();
    } catch (const ConfigError& e) {
        throw ConfigError(std::string(name) + ": " + e.what());
    } catch (const DivergenceError& e) {
        throw DivergenceError(std::string(name) + ": " + e.what());
    } catch (const DataError& e) {
        throw DataError(std::string(name) + ": " + e.what());
    }
}

}  // namespace

PipelineReport run_pipeline(const RunConfig& config)
{
    config.validate();
    std::filesystem::create_directories(config.output);
    const auto wavelets = parse_wavelets(config.wavelets);

    const auto corpus = stage("load", [&] {
        if (config.manifest) return load_corpus(read_manifest(*config.manifest), config.threads);
        return synth_corpus(*config.synth_seed, config.synth_per_class, config.synth_length, config.synth_rate);
    });

    const auto features = stage("extract", [&] { return extract_corpus(corpus, wavelets, config.levels, config.threads); });
    write_feature_csv(config.output / "features.csv", features);

    const auto split = stage("split", [&] { return stratified_split(features, *config.seed, config.test_fraction); });
    {
        std::ostringstream os;
        os << "id\tpartition\n";
        std::vector<std::string> part(features.ids.size());
        for (auto r : split.train) part[static_cast<std::size_t>(r)] = "train";
        for (auto r : split.test) part[static_cast<std::size_t>(r)] = "test";
        for (std::size_t i = 0; i < part.size(); ++i) os << features.ids[i] << '\t' << part[i] << '\n';
        write_file_atomic(config.output / "split.tsv", os.str());
    }
    const auto train_matrix = features.select_rows(split.train);
    const auto test_matrix = features.select_rows(split.test);

    PipelineReport report;
    report.train_rows = split.train.size();
    report.test_rows = split.test.size();
    report.schema = stage("select", [&] { return build_schema(train_matrix); });
    write_schema(config.output / "schema.txt", report.schema);

    TrainConfig tc = config.train;
    tc.seed = *config.seed;
    report.training = stage("train", [&] { return train(project(train_matrix, report.schema), report.schema, tc); });
    write_params(config.output / "params.json", report.training.params);
    write_training_log(config.output / "training_log.csv", report.training, tc);

    report.confusion = stage("evaluate", [&] { return evaluate(report.training.params, project(test_matrix, report.schema)); });
    report.pairwise = pairwise_errors(report.confusion);
    report.accuracy = overall_accuracy(report.confusion);
    report.mean_class_accuracy = mean_class_accuracy(report.confusion);
    write_reports(config.output, report.confusion);
    return report;
}

}  // namespace wser
