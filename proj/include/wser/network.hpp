#pragma once

// Single-hidden-layer classifier: standardized inputs, tanh hidden units,
// softmax outputs read as per-emotion membership values.

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "wser/features.hpp"
#include "wser/labels.hpp"
#include "wser/selection.hpp"

namespace wser {

inline constexpr int kInputs = 2 * kNumPairs;  // 42
inline constexpr int kHidden = 50;
inline constexpr int kOutputs = kNumEmotions;

struct NetworkParams {
    Eigen::MatrixXd w1;  // hidden x inputs
    Eigen::VectorXd b1;
    Eigen::MatrixXd w2;  // outputs x hidden
    Eigen::VectorXd b2;
    Eigen::VectorXd feature_means;
    Eigen::VectorXd feature_stds;
    /// Input columns with zero training variance (their std was set to 1).
    std::vector<int> constant_columns;
    std::string schema_hash;

    static NetworkParams zeros(int inputs = kInputs, int hidden = kHidden, int outputs = kOutputs);

    int inputs() const { return static_cast<int>(w1.cols()); }
    int hidden() const { return static_cast<int>(w1.rows()); }
    int outputs() const { return static_cast<int>(w2.rows()); }
    bool all_finite() const;
};

/// Same shapes as the trainable part of NetworkParams.
struct Gradients {
    Eigen::MatrixXd w1;
    Eigen::VectorXd b1;
    Eigen::MatrixXd w2;
    Eigen::VectorXd b2;
};

/// Rows of `x` are samples; `labels` holds class indices in canonical order.
struct Batch {
    Eigen::MatrixXd x;
    std::vector<int> labels;

    Eigen::Index size() const { return x.rows(); }
};

Batch make_batch(const FeatureMatrix& matrix);

/// (x - means) / stds, row-wise.
Eigen::MatrixXd standardize(const NetworkParams& params, const Eigen::MatrixXd& x);

/// Row-wise softmax, max-shifted.
Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& scores);

/// Pre-softmax scores for each row of `x`.
Eigen::MatrixXd output_scores(const NetworkParams& params, const Eigen::MatrixXd& x);

/// Membership values for one input vector.
Eigen::VectorXd forward(const NetworkParams& params, const Eigen::VectorXd& x);
Eigen::MatrixXd forward_batch(const NetworkParams& params, const Eigen::MatrixXd& x);

/// Mean categorical cross-entropy.
double loss(const NetworkParams& params, const Batch& batch);

/// Exact gradient of `loss` by backpropagation.
Gradients gradient(const NetworkParams& params, const Batch& batch);

struct Prediction {
    Emotion label = Emotion::boredom;
    Eigen::VectorXd memberships;
};

/// Argmax of the memberships; ties go to the earlier label.
Prediction predict(const NetworkParams& params, const Eigen::VectorXd& x);
int argmax_first(const Eigen::VectorXd& v);

struct TrainConfig {
    std::uint64_t seed = 1;
    double learning_rate = 0.01;
    double momentum = 0.9;
    int batch_size = 16;
    int max_epochs = 500;
    int patience = 25;
    double validation_fraction = 0.15;
    int hidden = kHidden;

    void validate() const;
};

struct EpochLog {
    int epoch = 0;
    double train_loss = 0;
    double validation_loss = 0;
};

struct TrainResult {
    NetworkParams params;
    std::vector<EpochLog> log;
    int best_epoch = 0;
    double initial_train_loss = 0;
    /// Rows used for fitting and for early stopping. When the validation
    /// split is empty the training loss drives early stopping.
    std::vector<Eigen::Index> train_rows;
    std::vector<Eigen::Index> validation_rows;
};

/// Deterministic given (matrix, config): stratified validation split,
/// uniform +-sqrt(6 / (fan_in + fan_out)) initialization, mini-batch gradient
/// descent with classical momentum, early stopping. Returns the parameters
/// of the best validation epoch.
TrainResult train(const FeatureMatrix& matrix, const SelectionSchema& schema, const TrainConfig& config);

void write_params(const std::filesystem::path& path, const NetworkParams& params);
/// Refuses files whose schema hash differs from `schema.hash()`.
NetworkParams read_params(const std::filesystem::path& path, const SelectionSchema& schema);

std::string params_to_json(const NetworkParams& params);
NetworkParams params_from_json(const std::string& text);

void write_training_log(const std::filesystem::path& path, const TrainResult& result, const TrainConfig& config);

}  // namespace wser
