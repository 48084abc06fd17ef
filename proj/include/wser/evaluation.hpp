#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "wser/features.hpp"
#include "wser/labels.hpp"
#include "wser/network.hpp"
#include "wser/selection.hpp"

namespace wser {

struct Split {
    std::vector<Eigen::Index> train;
    std::vector<Eigen::Index> test;
};

/// Stratified holdout: each label contributes round(n * test_fraction) rows
/// (at least 1, at most n - 1) to the test side. Indices come back sorted.
Split stratified_split(const FeatureMatrix& matrix, std::uint64_t seed, double test_fraction);

/// Rows are true labels, columns predictions, both in canonical order.
struct ConfusionMatrix {
    Eigen::Matrix<long long, kNumEmotions, kNumEmotions> counts =
        Eigen::Matrix<long long, kNumEmotions, kNumEmotions>::Zero();

    long long row_total(int row) const { return counts.row(row).sum(); }
    long long total() const { return counts.sum(); }

    /// 100 * counts / row total; empty rows are all zero.
    Eigen::Matrix<double, kNumEmotions, kNumEmotions> row_percent() const;
};

ConfusionMatrix confusion(const std::vector<Emotion>& truth, const std::vector<Emotion>& predicted);

struct PairError {
    Emotion a = Emotion::boredom;
    Emotion b = Emotion::disgust;
    double percent = 0;
};

/// Per-pair error: the mean of the two row-normalized cross-confusion
/// rates, (pct[a][b] + pct[b][a]) / 2. An empty row drops out of the mean.
std::vector<PairError> pairwise_errors(const ConfusionMatrix& cm);

/// 100 * trace / total.
double overall_accuracy(const ConfusionMatrix& cm);

/// Unweighted mean of the diagonal row percentages over non-empty rows.
double mean_class_accuracy(const ConfusionMatrix& cm);

/// Row-percentage table in the layout of the published confusion matrix.
std::string render_confusion_table(const ConfusionMatrix& cm);
std::string render_pairwise_table(const std::vector<PairError>& errors);
/// Raw counts as CSV: `true\predicted,<labels...>`.
std::string render_counts_csv(const ConfusionMatrix& cm);
/// Machine-readable summary holding the raw counts and derived totals.
std::string render_report_json(const ConfusionMatrix& cm);

/// Two decimals, zero-padded to width 5: "00.00%", "93.33%", "100.00%".
std::string format_percent(double value);

struct RunConfig {
    std::optional<std::filesystem::path> manifest;
    std::optional<std::uint64_t> synth_seed;
    int synth_per_class = 40;
    int synth_length = 8192;
    int synth_rate = 16000;
    std::vector<std::string> wavelets = {"db1", "db6", "db8", "db10"};
    int levels = 10;
    std::optional<std::uint64_t> seed;
    double test_fraction = 0.2;
    TrainConfig train;
    std::filesystem::path output = "out";
    unsigned threads = 0;

    /// Throws ConfigError naming the missing or invalid field.
    void validate() const;
};

/// Reads `key = value` lines ('#' comments). Unknown keys are errors.
void apply_config_file(RunConfig& config, const std::filesystem::path& path);
void apply_config_value(RunConfig& config, const std::string& key, const std::string& value);

struct PipelineReport {
    ConfusionMatrix confusion;
    std::vector<PairError> pairwise;
    double accuracy = 0;
    double mean_class_accuracy = 0;
    SelectionSchema schema;
    TrainResult training;
    std::size_t train_rows = 0;
    std::size_t test_rows = 0;
};

/// Evaluates trained params on the given (already projected) rows.
ConfusionMatrix evaluate(const NetworkParams& params, const FeatureMatrix& projected);

/// Writes confusion.txt, confusion_counts.csv, pairwise_errors.txt and
/// report.json under `dir`.
void write_reports(const std::filesystem::path& dir, const ConfusionMatrix& cm);

/// corpus -> features -> split -> schema (train rows) -> projection ->
/// training -> held-out evaluation -> reports. All artifacts land in
/// config.output.
PipelineReport run_pipeline(const RunConfig& config);

std::vector<WaveletSpec<double>> parse_wavelets(const std::vector<std::string>& names);

}  // namespace wser
