#include "wser/network.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wser/error.hpp"
#include "wser/io.hpp"
#include "wser/random.hpp"

namespace wser {

namespace {

constexpr int kParamsVersion = 1;

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m)
{
    auto rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        auto row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

nlohmann::json vector_to_json(const Eigen::VectorXd& v)
{
    return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, Eigen::Index rows, Eigen::Index cols, const char* what)
{
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows)
        throw DataError(std::string("params: bad shape for ") + what);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
            throw DataError(std::string("params: bad shape for ") + what);
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
    return m;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j, Eigen::Index size, const char* what)
{
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != size)
        throw DataError(std::string("params: bad length for ") + what);
    Eigen::VectorXd v(size);
    for (Eigen::Index i = 0; i < size; ++i) v(i) = j[static_cast<std::size_t>(i)].get<double>();
    return v;
}

void check_batch(const NetworkParams& params, const Batch& batch)
{
    if (batch.size() == 0) throw DataError("empty batch");
    if (batch.x.cols() != params.inputs())
        throw DataError("batch has " + std::to_string(batch.x.cols()) + " inputs, network expects " +
                        std::to_string(params.inputs()));
    if (static_cast<Eigen::Index>(batch.labels.size()) != batch.size())
        throw DataError("batch label count does not match row count");
    for (int l : batch.labels)
        if (l < 0 || l >= params.outputs()) throw DataError("batch label out of range");
}

void fill_uniform(Eigen::MatrixXd& m, double r, Rng& rng)
{
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rng.uniform(-r, r);
}

Batch rows_batch(const Batch& full, const std::vector<Eigen::Index>& rows, std::size_t begin, std::size_t end)
{
    Batch b;
    b.x.resize(static_cast<Eigen::Index>(end - begin), full.x.cols());
    b.labels.reserve(end - begin);
    for (std::size_t i = begin; i < end; ++i) {
        b.x.row(static_cast<Eigen::Index>(i - begin)) = full.x.row(rows[i]);
        b.labels.push_back(full.labels[static_cast<std::size_t>(rows[i])]);
    }
    return b;
}

}  // namespace

NetworkParams NetworkParams::zeros(int inputs, int hidden, int outputs)
{
    NetworkParams p;
    p.w1 = Eigen::MatrixXd::Zero(hidden, inputs);
    p.b1 = Eigen::VectorXd::Zero(hidden);
    p.w2 = Eigen::MatrixXd::Zero(outputs, hidden);
    p.b2 = Eigen::VectorXd::Zero(outputs);
    p.feature_means = Eigen::VectorXd::Zero(inputs);
    p.feature_stds = Eigen::VectorXd::Ones(inputs);
    return p;
}

bool NetworkParams::all_finite() const
{
    return w1.allFinite() && b1.allFinite() && w2.allFinite() && b2.allFinite() && feature_means.allFinite() &&
           feature_stds.allFinite();
}

Batch make_batch(const FeatureMatrix& matrix)
{
    Batch b;
    b.x = matrix.values;
    b.labels.reserve(matrix.labels.size());
    for (Emotion e : matrix.labels) b.labels.push_back(index_of(e));
    return b;
}

Eigen::MatrixXd standardize(const NetworkParams& params, const Eigen::MatrixXd& x)
{
    return (x.rowwise() - params.feature_means.transpose()).array().rowwise() /
           params.feature_stds.transpose().array();
}

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& scores)
{
    Eigen::MatrixXd e = (scores.colwise() - scores.rowwise().maxCoeff()).array().exp();
    return e.array().colwise() / e.rowwise().sum().array();
}

Eigen::MatrixXd output_scores(const NetworkParams& params, const Eigen::MatrixXd& x)
{
    const Eigen::MatrixXd z = standardize(params, x);
    const Eigen::MatrixXd h = ((z * params.w1.transpose()).rowwise() + params.b1.transpose()).array().tanh();
    return (h * params.w2.transpose()).rowwise() + params.b2.transpose();
}

Eigen::MatrixXd forward_batch(const NetworkParams& params, const Eigen::MatrixXd& x)
{
    if (x.cols() != params.inputs())
        throw DataError("input has " + std::to_string(x.cols()) + " features, network expects " +
                        std::to_string(params.inputs()));
    if (!x.allFinite()) throw DataError("non-finite network input");
    return softmax_rows(output_scores(params, x));
}

Eigen::VectorXd forward(const NetworkParams& params, const Eigen::VectorXd& x)
{
    return forward_batch(params, x.transpose()).row(0).transpose();
}

double loss(const NetworkParams& params, const Batch& batch)
{
    check_batch(params, batch);
    const Eigen::MatrixXd scores = output_scores(params, batch.x);
    double total = 0;
    for (Eigen::Index i = 0; i < batch.size(); ++i) {
        // -log softmax = logsumexp(s) - s_label
        const double m = scores.row(i).maxCoeff();
        const double lse = m + std::log((scores.row(i).array() - m).exp().sum());
        total += lse - scores(i, batch.labels[static_cast<std::size_t>(i)]);
    }
    return total / double(batch.size());
}

Gradients gradient(const NetworkParams& params, const Batch& batch)
{
    check_batch(params, batch);
    const double n = double(batch.size());
    const Eigen::MatrixXd z = standardize(params, batch.x);
    const Eigen::MatrixXd h = ((z * params.w1.transpose()).rowwise() + params.b1.transpose()).array().tanh();
    const Eigen::MatrixXd scores = (h * params.w2.transpose()).rowwise() + params.b2.transpose();

    // Output error: (softmax - onehot) / n
    Eigen::MatrixXd delta_out = softmax_rows(scores);
    for (Eigen::Index i = 0; i < batch.size(); ++i) delta_out(i, batch.labels[static_cast<std::size_t>(i)]) -= 1.0;
    delta_out /= n;

    const Eigen::MatrixXd delta_hidden = ((delta_out * params.w2).array() * (1.0 - h.array().square())).matrix();

    Gradients g;
    g.w2 = delta_out.transpose() * h;
    g.b2 = delta_out.colwise().sum().transpose();
    g.w1 = delta_hidden.transpose() * z;
    g.b1 = delta_hidden.colwise().sum().transpose();
    return g;
}

int argmax_first(const Eigen::VectorXd& v)
{
    int best = 0;
    for (Eigen::Index i = 1; i < v.size(); ++i)
        if (v(i) > v(best)) best = static_cast<int>(i);
    return best;
}

Prediction predict(const NetworkParams& params, const Eigen::VectorXd& x)
{
    Prediction p;
    p.memberships = forward(params, x);
    p.label = kEmotions[static_cast<std::size_t>(argmax_first(p.memberships))];
    return p;
}

void TrainConfig::validate() const
{
    if (!(learning_rate > 0)) throw ConfigError("learning_rate must be > 0");
    if (!(momentum >= 0 && momentum < 1)) throw ConfigError("momentum must be in [0, 1)");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
    if (patience < 1) throw ConfigError("patience must be >= 1");
    if (!(validation_fraction > 0 && validation_fraction < 1))
        throw ConfigError("validation_fraction must be in (0, 1)");
    if (hidden < 1) throw ConfigError("hidden must be >= 1");
}

TrainResult train(const FeatureMatrix& matrix, const SelectionSchema& schema, const TrainConfig& config)
{
    config.validate();
    matrix.require_rows_per_label(2, "train");
    if (matrix.cols() == 0) throw DataError("train: matrix has no feature columns");

    Rng rng(config.seed);
    const Batch all = make_batch(matrix);
    const auto inputs = static_cast<int>(matrix.cols());

    TrainResult result;
    for (Emotion e : kEmotions) {
        std::vector<Eigen::Index> rows;
        for (std::size_t i = 0; i < matrix.labels.size(); ++i)
            if (matrix.labels[i] == e) rows.push_back(static_cast<Eigen::Index>(i));
        rng.shuffle(std::span(rows));
        const auto n = rows.size();
        const auto n_val = std::min<std::size_t>(
            static_cast<std::size_t>(std::llround(double(n) * config.validation_fraction)), n - 1);
        result.validation_rows.insert(result.validation_rows.end(), rows.begin(), rows.begin() + std::ptrdiff_t(n_val));
        result.train_rows.insert(result.train_rows.end(), rows.begin() + std::ptrdiff_t(n_val), rows.end());
    }
    std::sort(result.train_rows.begin(), result.train_rows.end());
    std::sort(result.validation_rows.begin(), result.validation_rows.end());

    NetworkParams params = NetworkParams::zeros(inputs, config.hidden, kOutputs);
    params.schema_hash = schema.hash();
    {
        const double count = double(result.train_rows.size());
        for (int c = 0; c < inputs; ++c) {
            double mean = 0;
            for (auto r : result.train_rows) mean += all.x(r, c);
            mean /= count;
            double var = 0;
            for (auto r : result.train_rows) var += (all.x(r, c) - mean) * (all.x(r, c) - mean);
            const double sd = std::sqrt(var / count);
            params.feature_means(c) = mean;
            if (sd > 0 && std::isfinite(sd)) {
                params.feature_stds(c) = sd;
            } else {
                params.feature_stds(c) = 1.0;
                params.constant_columns.push_back(c);
            }
        }
    }
    fill_uniform(params.w1, std::sqrt(6.0 / double(inputs + config.hidden)), rng);
    fill_uniform(params.w2, std::sqrt(6.0 / double(config.hidden + kOutputs)), rng);

    const Batch train_set = rows_batch(all, result.train_rows, 0, result.train_rows.size());
    const bool have_validation = !result.validation_rows.empty();
    const Batch validation_set =
        have_validation ? rows_batch(all, result.validation_rows, 0, result.validation_rows.size()) : train_set;

    auto check_finite = [&](double value, int epoch) {
        if (!std::isfinite(value))
            throw DivergenceError("training diverged at epoch " + std::to_string(epoch) +
                                  " (non-finite loss); try a smaller learning_rate than " +
                                  format_double(config.learning_rate));
    };

    result.initial_train_loss = loss(params, train_set);
    check_finite(result.initial_train_loss, 0);

    Gradients velocity{Eigen::MatrixXd::Zero(params.w1.rows(), params.w1.cols()), Eigen::VectorXd::Zero(params.b1.size()),
                       Eigen::MatrixXd::Zero(params.w2.rows(), params.w2.cols()), Eigen::VectorXd::Zero(params.b2.size())};
    std::vector<Eigen::Index> order(result.train_rows.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<Eigen::Index>(i);

    NetworkParams best = params;
    double best_loss = loss(params, validation_set);
    result.best_epoch = 0;
    const auto batch_size = static_cast<std::size_t>(config.batch_size);

    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
        rng.shuffle(std::span(order));
        for (std::size_t begin = 0; begin < order.size(); begin += batch_size) {
            const auto end = std::min(order.size(), begin + batch_size);
            const Batch mb = rows_batch(train_set, order, begin, end);
            const Gradients g = gradient(params, mb);
            velocity.w1 = config.momentum * velocity.w1 - config.learning_rate * g.w1;
            velocity.b1 = config.momentum * velocity.b1 - config.learning_rate * g.b1;
            velocity.w2 = config.momentum * velocity.w2 - config.learning_rate * g.w2;
            velocity.b2 = config.momentum * velocity.b2 - config.learning_rate * g.b2;
            params.w1 += velocity.w1;
            params.b1 += velocity.b1;
            params.w2 += velocity.w2;
            params.b2 += velocity.b2;
        }
        const double train_loss = loss(params, train_set);
        check_finite(train_loss, epoch);
        const double validation_loss = have_validation ? loss(params, validation_set) : train_loss;
        check_finite(validation_loss, epoch);
        result.log.push_back({epoch, train_loss, validation_loss});

        if (validation_loss < best_loss) {
            best_loss = validation_loss;
            best = params;
            result.best_epoch = epoch;
        } else if (epoch - result.best_epoch >= config.patience) {
            break;
        }
    }
    result.params = std::move(best);
    return result;
}

std::string params_to_json(const NetworkParams& params)
{
    nlohmann::ordered_json j;
    j["format"] = "wser-network";
    j["version"] = kParamsVersion;
    j["inputs"] = params.inputs();
    j["hidden"] = params.hidden();
    j["outputs"] = params.outputs();
    j["hidden_activation"] = "tanh";
    j["output_activation"] = "softmax";
    j["schema_hash"] = params.schema_hash;
    j["constant_columns"] = params.constant_columns;
    j["feature_means"] = vector_to_json(params.feature_means);
    j["feature_stds"] = vector_to_json(params.feature_stds);
    j["w1"] = matrix_to_json(params.w1);
    j["b1"] = vector_to_json(params.b1);
    j["w2"] = matrix_to_json(params.w2);
    j["b2"] = vector_to_json(params.b2);
    return j.dump(1) + "\n";
}

NetworkParams params_from_json(const std::string& text)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("params: invalid JSON: ") + e.what());
    }
    try {
        if (j.value("format", "") != "wser-network") throw DataError("params: not a network parameter file");
        if (j.at("version").get<int>() != kParamsVersion)
            throw DataError("params: unsupported version " + j.at("version").dump());
        const int inputs = j.at("inputs").get<int>();
        const int hidden = j.at("hidden").get<int>();
        const int outputs = j.at("outputs").get<int>();
        if (inputs < 1 || hidden < 1 || outputs != kOutputs) throw DataError("params: bad layer sizes");
        NetworkParams p;
        p.schema_hash = j.at("schema_hash").get<std::string>();
        p.constant_columns = j.at("constant_columns").get<std::vector<int>>();
        p.feature_means = vector_from_json(j.at("feature_means"), inputs, "feature_means");
        p.feature_stds = vector_from_json(j.at("feature_stds"), inputs, "feature_stds");
        p.w1 = matrix_from_json(j.at("w1"), hidden, inputs, "w1");
        p.b1 = vector_from_json(j.at("b1"), hidden, "b1");
        p.w2 = matrix_from_json(j.at("w2"), outputs, hidden, "w2");
        p.b2 = vector_from_json(j.at("b2"), outputs, "b2");
        if (!p.all_finite()) throw DataError("params: non-finite entries");
        if ((p.feature_stds.array() <= 0).any()) throw DataError("params: feature_stds must be positive");
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("params: ") + e.what());
    }
}

void write_params(const std::filesystem::path& path, const NetworkParams& params)
{
    write_file_atomic(path, params_to_json(params));
}

NetworkParams read_params(const std::filesystem::path& path, const SelectionSchema& schema)
{
    auto p = params_from_json(read_file(path));
    const auto expected = schema.hash();
    if (p.schema_hash != expected)
        throw DataError("params " + path.string() + " were trained for schema " + p.schema_hash +
                        ", not the provided schema " + expected);
    if (static_cast<std::size_t>(p.inputs()) != schema.slots.size())
        throw DataError("params input count does not match schema slot count");
    return p;
}

void write_training_log(const std::filesystem::path& path, const TrainResult& result, const TrainConfig& config)
{
    std::ostringstream os;
    os << "# seed=" << config.seed << " learning_rate=" << format_double(config.learning_rate)
       << " momentum=" << format_double(config.momentum) << " batch_size=" << config.batch_size
       << " max_epochs=" << config.max_epochs << " patience=" << config.patience
       << " validation_fraction=" << format_double(config.validation_fraction) << " hidden=" << config.hidden << '\n';
    os << "# train_rows=" << result.train_rows.size() << " validation_rows=" << result.validation_rows.size()
       << " initial_train_loss=" << format_double(result.initial_train_loss) << " best_epoch=" << result.best_epoch
       << '\n';
    os << "epoch,train_loss,validation_loss\n";
    for (const auto& e : result.log)
        os << e.epoch << ',' << format_double(e.train_loss) << ',' << format_double(e.validation_loss) << '\n';
    write_file_atomic(path, os.str());
}

}  // namespace wser
