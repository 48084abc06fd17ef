// wser: wavelet-feature speech emotion recognition command line.
//
// Exit codes: 0 success, 1 usage/config error, 2 data error, 3 numeric divergence.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "wser/audio.hpp"
#include "wser/error.hpp"
#include "wser/evaluation.hpp"
#include "wser/features.hpp"
#include "wser/io.hpp"
#include "wser/network.hpp"
#include "wser/selection.hpp"
#include "wser/wavelet.hpp"

namespace fs = std::filesystem;
using namespace wser;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kDivergence = 3 };

std::vector<std::string> split_list(const std::string& s)
{
    std::vector<std::string> out;
    for (auto& part : split_fields(s, ','))
        if (!part.empty()) out.push_back(part);
    return out;
}

int run_filters(const std::vector<int>& orders)
{
    bool ok = true;
    for (int order : orders) {
        const auto spec = daubechies_filter(order);
        const auto check = check_filter(spec);
        std::printf("%s (N=%d, %ld taps)\n", spec.name.c_str(), spec.order, static_cast<long>(spec.length()));
        for (Eigen::Index k = 0; k < spec.length(); ++k)
            std::printf("  h[%2ld] = % .17e   g[%2ld] = % .17e\n", static_cast<long>(k), spec.lowpass(k),
                        static_cast<long>(k), spec.highpass(k));
        std::printf("  |sum h - sqrt2|        %.3e\n", check.sum_error);
        std::printf("  |sum h^2 - 1|          %.3e\n", check.norm_error);
        std::printf("  double-shift orth.     %.3e\n", check.orthogonality_error);
        std::printf("  quadrature mirror      %.3e\n", check.qmf_error);
        std::printf("  vanishing moments      %.3e\n", check.moment_error);
        const bool pass = check.passes();
        std::printf("  %s\n", pass ? "PASS" : "FAIL");
        ok = ok && pass;
    }
    return ok ? kOk : kData;
}

struct CorpusOptions {
    std::string manifest;
    std::optional<std::uint64_t> synth_seed;
    int per_class = 40;
    int length = 8192;
    int rate = 16000;

    void add(CLI::App* app)
    {
        app->add_option("--manifest", manifest, "Corpus manifest (rate= header, <path>\\t<label> lines)");
        app->add_option("--synth-seed", synth_seed, "Use the synthetic corpus with this seed");
        app->add_option("--per-class", per_class, "Synthetic recordings per class")->capture_default_str();
        app->add_option("--length", length, "Synthetic recording length in samples")->capture_default_str();
        app->add_option("--rate", rate, "Synthetic sample rate in Hz")->capture_default_str();
    }

    std::vector<Recording> load() const
    {
        if (!manifest.empty() && synth_seed) throw ConfigError("--manifest and --synth-seed are mutually exclusive");
        if (!manifest.empty()) return load_corpus(read_manifest(manifest));
        if (synth_seed) return synth_corpus(*synth_seed, per_class, length, rate);
        throw ConfigError("no corpus given: pass --manifest or --synth-seed");
    }
};

void add_train_options(CLI::App* app, TrainConfig& tc)
{
    app->add_option("--learning-rate", tc.learning_rate)->capture_default_str();
    app->add_option("--momentum", tc.momentum)->capture_default_str();
    app->add_option("--batch-size", tc.batch_size)->capture_default_str();
    app->add_option("--max-epochs", tc.max_epochs)->capture_default_str();
    app->add_option("--patience", tc.patience)->capture_default_str();
    app->add_option("--validation-fraction", tc.validation_fraction)->capture_default_str();
}

FeatureMatrix split_part(const FeatureMatrix& features, std::uint64_t seed, double test_fraction, bool test_side)
{
    const auto split = stratified_split(features, seed, test_fraction);
    return features.select_rows(test_side ? split.test : split.train);
}

int dispatch(int argc, char** argv)
{
    CLI::App app{"Speech emotion recognition from Daubechies wavelet subband statistics"};
    app.require_subcommand(1);

    // filters
    auto* filters = app.add_subcommand("filters", "Print Daubechies filters and check their invariants");
    std::vector<int> orders = {1, 6, 8, 10};
    filters->add_option("--order", orders, "Orders to print (default: 1 6 8 10)");

    // synth
    auto* synth = app.add_subcommand("synth", "Write a synthetic seven-class corpus as WAV files plus manifest");
    std::uint64_t synth_seed = 0;
    int synth_per_class = 40, synth_length = 8192, synth_rate = 16000;
    std::string synth_out;
    synth->add_option("--seed", synth_seed)->required();
    synth->add_option("--per-class", synth_per_class)->capture_default_str();
    synth->add_option("--length", synth_length)->capture_default_str();
    synth->add_option("--rate", synth_rate)->capture_default_str();
    synth->add_option("--out", synth_out, "Output directory")->required();

    // emodb-manifest
    auto* emodb = app.add_subcommand("emodb-manifest", "Build a manifest from an Emo-DB wav directory");
    std::string emodb_dir, emodb_out;
    int emodb_rate = 16000;
    emodb->add_option("--dir", emodb_dir)->required();
    emodb->add_option("--rate", emodb_rate)->capture_default_str();
    emodb->add_option("--out", emodb_out)->required();

    // extract
    auto* extract = app.add_subcommand("extract", "Compute the wavelet feature matrix (CSV)");
    CorpusOptions extract_corpus_opts;
    extract_corpus_opts.add(extract);
    std::string extract_wavelets = "db1,db6,db8,db10", extract_out, dump_dir;
    int extract_levels = 10;
    extract->add_option("--wavelets", extract_wavelets)->capture_default_str();
    extract->add_option("--levels", extract_levels)->capture_default_str();
    extract->add_option("--out", extract_out, "Feature CSV path")->required();
    extract->add_option("--dump-trees", dump_dir, "Also write every decomposition tree as text here");

    // select
    auto* select = app.add_subcommand("select", "Pairwise t-test feature selection on the training split");
    std::string select_features, select_out;
    std::uint64_t select_seed = 0;
    double select_test_fraction = 0.2;
    select->add_option("--features", select_features)->required();
    select->add_option("--seed", select_seed, "Split seed")->required();
    select->add_option("--test-fraction", select_test_fraction)->capture_default_str();
    select->add_option("--out", select_out, "Schema path")->required();

    // train
    auto* train_cmd = app.add_subcommand("train", "Train the classifier on the training split");
    std::string train_features, train_schema, train_out, train_log;
    double train_test_fraction = 0.2;
    TrainConfig tc;
    train_cmd->add_option("--features", train_features)->required();
    train_cmd->add_option("--schema", train_schema)->required();
    train_cmd->add_option("--seed", tc.seed, "Split and training seed")->required();
    train_cmd->add_option("--test-fraction", train_test_fraction)->capture_default_str();
    add_train_options(train_cmd, tc);
    train_cmd->add_option("--out", train_out, "Parameter file path")->required();
    train_cmd->add_option("--log", train_log, "Training log CSV path");

    // evaluate
    auto* evaluate_cmd = app.add_subcommand("evaluate", "Evaluate trained parameters on the held-out split");
    std::string eval_features, eval_schema, eval_params, eval_out;
    std::uint64_t eval_seed = 0;
    double eval_test_fraction = 0.2;
    evaluate_cmd->add_option("--features", eval_features)->required();
    evaluate_cmd->add_option("--schema", eval_schema)->required();
    evaluate_cmd->add_option("--params", eval_params)->required();
    evaluate_cmd->add_option("--seed", eval_seed, "Split seed")->required();
    evaluate_cmd->add_option("--test-fraction", eval_test_fraction)->capture_default_str();
    evaluate_cmd->add_option("--out", eval_out, "Report directory")->required();

    // pipeline
    auto* pipeline = app.add_subcommand("pipeline", "Run every stage end to end");
    std::string config_path, p_manifest, p_wavelets, p_output;
    std::optional<std::uint64_t> p_seed, p_synth_seed;
    std::optional<int> p_per_class, p_length, p_rate, p_levels, p_threads;
    std::optional<double> p_test_fraction;
    std::optional<double> p_lr, p_momentum, p_val;
    std::optional<int> p_batch, p_epochs, p_patience;
    pipeline->add_option("--config", config_path, "key = value config file; flags override it");
    pipeline->add_option("--seed", p_seed, "Split and training seed (required here or in the config)");
    pipeline->add_option("--manifest", p_manifest);
    pipeline->add_option("--synth-seed", p_synth_seed);
    pipeline->add_option("--per-class", p_per_class);
    pipeline->add_option("--length", p_length);
    pipeline->add_option("--rate", p_rate);
    pipeline->add_option("--wavelets", p_wavelets);
    pipeline->add_option("--levels", p_levels);
    pipeline->add_option("--test-fraction", p_test_fraction);
    pipeline->add_option("--learning-rate", p_lr);
    pipeline->add_option("--momentum", p_momentum);
    pipeline->add_option("--batch-size", p_batch);
    pipeline->add_option("--max-epochs", p_epochs);
    pipeline->add_option("--patience", p_patience);
    pipeline->add_option("--validation-fraction", p_val);
    pipeline->add_option("--threads", p_threads);
    pipeline->add_option("--out", p_output, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    if (*filters) return run_filters(orders);

    if (*synth) {
        const auto corpus = synth_corpus(synth_seed, synth_per_class, synth_length, synth_rate);
        fs::create_directories(synth_out);
        CorpusManifest m;
        m.root = synth_out;
        m.expected_sample_rate = synth_rate;
        for (const auto& rec : corpus) {
            const auto name = rec.id + ".wav";
            write_wav(fs::path(synth_out) / name, rec.samples, rec.sample_rate);
            m.entries.push_back({name, rec.label});
        }
        write_manifest(fs::path(synth_out) / "manifest.tsv", m);
        std::printf("wrote %zu recordings and %s\n", corpus.size(), (fs::path(synth_out) / "manifest.tsv").c_str());
        return kOk;
    }

    if (*emodb) {
        const auto m = emodb_manifest(emodb_dir, emodb_rate);
        write_manifest(emodb_out, m);
        std::printf("wrote %zu entries to %s\n", m.entries.size(), emodb_out.c_str());
        return kOk;
    }

    if (*extract) {
        const auto wavelets = parse_wavelets(split_list(extract_wavelets));
        const auto corpus = extract_corpus_opts.load();
        const auto matrix = extract_corpus(corpus, wavelets, extract_levels);
        write_feature_csv(extract_out, matrix);
        if (!dump_dir.empty()) {
            fs::create_directories(dump_dir);
            for (const auto& rec : corpus) {
                for (const auto& spec : wavelets) {
                    std::ofstream os(fs::path(dump_dir) / (rec.id + "." + spec.name + ".tree.txt"));
                    write_tree(os, decompose(rec.samples, spec, extract_levels));
                }
            }
        }
        std::printf("%ld recordings x %ld features -> %s\n", static_cast<long>(matrix.rows()),
                    static_cast<long>(matrix.cols()), extract_out.c_str());
        return kOk;
    }

    if (*select) {
        const auto train_rows = split_part(read_feature_csv(select_features), select_seed, select_test_fraction, false);
        const auto schema = build_schema(train_rows);
        write_schema(select_out, schema);
        std::printf("%zu slots -> %s\n", schema.slots.size(), select_out.c_str());
        return kOk;
    }

    if (*train_cmd) {
        const auto schema = read_schema(train_schema);
        const auto train_rows = split_part(read_feature_csv(train_features), tc.seed, train_test_fraction, false);
        const auto result = train(project(train_rows, schema), schema, tc);
        write_params(train_out, result.params);
        if (!train_log.empty()) write_training_log(train_log, result, tc);
        std::printf("trained %zu epochs (best %d) -> %s\n", result.log.size(), result.best_epoch, train_out.c_str());
        return kOk;
    }

    if (*evaluate_cmd) {
        const auto schema = read_schema(eval_schema);
        const auto params = read_params(eval_params, schema);
        const auto test_rows = split_part(read_feature_csv(eval_features), eval_seed, eval_test_fraction, true);
        const auto cm = evaluate(params, project(test_rows, schema));
        write_reports(eval_out, cm);
        std::fputs(render_confusion_table(cm).c_str(), stdout);
        std::printf("overall accuracy %.2f%%, mean class accuracy %.2f%%\n", overall_accuracy(cm),
                    mean_class_accuracy(cm));
        return kOk;
    }

    if (*pipeline) {
        RunConfig config;
        if (!config_path.empty()) apply_config_file(config, config_path);
        if (!p_manifest.empty()) config.manifest = p_manifest, config.synth_seed.reset();
        if (p_synth_seed) config.synth_seed = p_synth_seed, config.manifest.reset();
        if (p_seed) config.seed = p_seed;
        if (p_per_class) config.synth_per_class = *p_per_class;
        if (p_length) config.synth_length = *p_length;
        if (p_rate) config.synth_rate = *p_rate;
        if (!p_wavelets.empty()) config.wavelets = split_list(p_wavelets);
        if (p_levels) config.levels = *p_levels;
        if (p_test_fraction) config.test_fraction = *p_test_fraction;
        if (p_lr) config.train.learning_rate = *p_lr;
        if (p_momentum) config.train.momentum = *p_momentum;
        if (p_batch) config.train.batch_size = *p_batch;
        if (p_epochs) config.train.max_epochs = *p_epochs;
        if (p_patience) config.train.patience = *p_patience;
        if (p_val) config.train.validation_fraction = *p_val;
        if (p_threads) config.threads = static_cast<unsigned>(*p_threads);
        if (!p_output.empty()) config.output = p_output;

        const auto report = run_pipeline(config);
        std::fputs(render_confusion_table(report.confusion).c_str(), stdout);
        std::fputs(render_pairwise_table(report.pairwise).c_str(), stdout);
        std::printf("train rows %zu, test rows %zu, best epoch %d\n", report.train_rows, report.test_rows,
                    report.training.best_epoch);
        std::printf("overall accuracy %.2f%%, mean class accuracy %.2f%%\n", report.accuracy,
                    report.mean_class_accuracy);
        return kOk;
    }
    return kUsage;
}

}  // namespace

int main(int argc, char** argv)
{
    try {
        return dispatch(argc, argv);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kUsage;
    } catch (const DivergenceError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kDivergence;
    } catch (const DataError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kData;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kData;
    }
}
