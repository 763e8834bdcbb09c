#include "rsl/network.h"

#include "rsl/rng.h"
#include "rsl/sha256.h"
#include "rsl/task_io.h"

#include <spdlog/spdlog.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <limits>

using namespace std;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace rsl::nn {
size_t HeuristicModel::parameter_count() const {
    size_t n = 0;
    for (const DenseLayer &layer : layers)
        n += layer.weights.size() + layer.biases.size();
    return n;
}

bool HeuristicModel::all_finite() const {
    for (const DenseLayer &layer : layers)
        if (!layer.weights.allFinite() || !layer.biases.allFinite())
            return false;
    return true;
}

void HeuristicModel::check_shapes() const {
    if (layers.size() != static_cast<size_t>(num_layers))
        throw invalid_argument("model must have 5 dense layers");
    Eigen::Index width = layers[Input].weights.rows();
    for (int i = 0; i < num_layers; ++i) {
        const DenseLayer &layer = layers[i];
        Eigen::Index rows = (i == Output) ? 1 : width;
        Eigen::Index cols = (i == Input) ? layer.weights.cols() : width;
        if (layer.weights.rows() != rows || layer.weights.cols() != cols ||
            layer.biases.size() != rows || cols < 1)
            throw invalid_argument("model layer " + std::to_string(i) + " has inconsistent shape");
    }
}

HeuristicModel init_model(size_t num_atoms, uint64_t seed, int hidden_width) {
    if (num_atoms < 1 || hidden_width < 1)
        throw invalid_argument("model dimensions must be positive");
    Rng rng(derive_seed(seed, "init"));
    const Eigen::Index h = hidden_width;
    const Eigen::Index shapes[HeuristicModel::num_layers][2] = {
        {h, static_cast<Eigen::Index>(num_atoms)}, {h, h}, {h, h}, {h, h}, {1, h}};
    HeuristicModel model;
    for (const auto &shape : shapes) {
        DenseLayer layer{MatrixXd(shape[0], shape[1]), VectorXd::Zero(shape[0])};
        double bound = sqrt(6.0 / static_cast<double>(shape[1]));
        for (Eigen::Index r = 0; r < shape[0]; ++r)
            for (Eigen::Index c = 0; c < shape[1]; ++c)
                layer.weights(r, c) = rng.uniform_real(-bound, bound);
        model.layers.push_back(move(layer));
    }
    return model;
}

static void check_input_width(const HeuristicModel &model, size_t width) {
    if (width != model.num_atoms())
        throw DimensionMismatch("input has " + std::to_string(width) + " atoms, model expects " +
                                std::to_string(model.num_atoms()));
}

double forward(const HeuristicModel &model, const AtomSet &input) {
    check_input_width(model, input.width());
    using L = HeuristicModel::Layer;
    const auto &layers = model.layers;
    // The input is Boolean, so the first layer sums the columns of true atoms.
    VectorXd z = layers[L::Input].biases;
    input.for_each([&](AtomId p) {z += layers[L::Input].weights.col(p);});
    VectorXd a1 = z.cwiseMax(0.0);
    VectorXd a2 = (layers[L::Hidden].weights * a1 + layers[L::Hidden].biases).cwiseMax(0.0);
    VectorXd a3 =
        (layers[L::ResidualFirst].weights * a2 + layers[L::ResidualFirst].biases).cwiseMax(0.0);
    VectorXd a4 =
        (layers[L::ResidualSecond].weights * a3 + layers[L::ResidualSecond].biases).cwiseMax(0.0);
    VectorXd r = a4 + a2;
    return layers[L::Output].weights.row(0).dot(r) + layers[L::Output].biases(0);
}

double heuristic_value(const HeuristicModel &model, const State &s) {
    return max(0.0, forward(model, s));
}

MatrixXd to_input_matrix(span<const State> states, size_t num_atoms) {
    MatrixXd inputs = MatrixXd::Zero(static_cast<Eigen::Index>(num_atoms),
                                     static_cast<Eigen::Index>(states.size()));
    for (size_t k = 0; k < states.size(); ++k) {
        if (states[k].atoms.width() != num_atoms)
            throw DimensionMismatch("state width differs from model input width");
        states[k].atoms.for_each([&](AtomId p) {inputs(p, static_cast<Eigen::Index>(k)) = 1.0;});
    }
    return inputs;
}

namespace {
// Activations of one batch, kept for the backward pass.
struct Activations {
    MatrixXd z1, a1, z2, a2, z3, a3, z4, a4, r;
    Eigen::RowVectorXd out;
};

Activations forward_pass(const HeuristicModel &model, const MatrixXd &x) {
    using L = HeuristicModel::Layer;
    const auto &layers = model.layers;
    Activations act;
    act.z1 = (layers[L::Input].weights * x).colwise() + layers[L::Input].biases;
    act.a1 = act.z1.cwiseMax(0.0);
    act.z2 = (layers[L::Hidden].weights * act.a1).colwise() + layers[L::Hidden].biases;
    act.a2 = act.z2.cwiseMax(0.0);
    act.z3 = (layers[L::ResidualFirst].weights * act.a2).colwise() +
             layers[L::ResidualFirst].biases;
    act.a3 = act.z3.cwiseMax(0.0);
    act.z4 = (layers[L::ResidualSecond].weights * act.a3).colwise() +
             layers[L::ResidualSecond].biases;
    act.a4 = act.z4.cwiseMax(0.0);
    act.r = act.a4 + act.a2;
    act.out = (layers[L::Output].weights * act.r).row(0).array() + layers[L::Output].biases(0);
    return act;
}

MatrixXd relu_mask(const MatrixXd &z) {
    return (z.array() > 0.0).cast<double>().matrix();
}
}

VectorXd forward_batch(const HeuristicModel &model, const MatrixXd &inputs) {
    check_input_width(model, static_cast<size_t>(inputs.rows()));
    return forward_pass(model, inputs).out.transpose();
}

double mse_loss(span<const double> predictions, span<const double> targets) {
    if (predictions.size() != targets.size())
        throw invalid_argument("mse_loss: length mismatch");
    if (predictions.empty())
        throw invalid_argument("mse_loss: empty input");
    double sum = 0.0;
    for (size_t i = 0; i < predictions.size(); ++i) {
        double d = predictions[i] - targets[i];
        sum += d * d;
    }
    return sum / static_cast<double>(predictions.size());
}

Batch make_batch(const LabeledDataset &dataset, span<const size_t> record_indices) {
    Batch batch{MatrixXd::Zero(static_cast<Eigen::Index>(dataset.num_atoms),
                               static_cast<Eigen::Index>(record_indices.size())),
                VectorXd(static_cast<Eigen::Index>(record_indices.size()))};
    for (size_t k = 0; k < record_indices.size(); ++k) {
        const LabeledRecord &record = dataset.records[record_indices[k]];
        auto col = static_cast<Eigen::Index>(k);
        record.state.atoms.for_each([&](AtomId p) {batch.inputs(p, col) = 1.0;});
        batch.targets(col) = static_cast<double>(record.label);
    }
    return batch;
}

double batch_loss(const HeuristicModel &model, const Batch &batch) {
    VectorXd predictions = forward_batch(model, batch.inputs);
    return (predictions - batch.targets).squaredNorm() / static_cast<double>(batch.targets.size());
}

Gradients backward(const HeuristicModel &model, const Batch &batch, double *loss) {
    check_input_width(model, static_cast<size_t>(batch.inputs.rows()));
    if (batch.targets.size() == 0)
        throw invalid_argument("backward: empty batch");
    using L = HeuristicModel::Layer;
    const auto &layers = model.layers;
    const double n = static_cast<double>(batch.targets.size());
    Activations act = forward_pass(model, batch.inputs);

    Eigen::RowVectorXd residual = act.out - batch.targets.transpose();
    if (loss)
        *loss = residual.squaredNorm() / n;
    Eigen::RowVectorXd d_out = (2.0 / n) * residual;

    Gradients grads;
    grads.layers.resize(HeuristicModel::num_layers);
    auto set_grad = [&](int layer, const MatrixXd &dz, const MatrixXd &input) {
        grads.layers[layer].weights = dz * input.transpose();
        grads.layers[layer].biases = dz.rowwise().sum();
    };

    set_grad(L::Output, d_out, act.r);
    MatrixXd d_r = layers[L::Output].weights.transpose() * d_out;

    MatrixXd d_z4 = d_r.cwiseProduct(relu_mask(act.z4));
    set_grad(L::ResidualSecond, d_z4, act.a3);
    MatrixXd d_z3 = (layers[L::ResidualSecond].weights.transpose() * d_z4)
                        .cwiseProduct(relu_mask(act.z3));
    set_grad(L::ResidualFirst, d_z3, act.a2);

    // The skip connection routes d_r straight into a2.
    MatrixXd d_a2 = d_r + layers[L::ResidualFirst].weights.transpose() * d_z3;
    MatrixXd d_z2 = d_a2.cwiseProduct(relu_mask(act.z2));
    set_grad(L::Hidden, d_z2, act.a1);
    MatrixXd d_z1 = (layers[L::Hidden].weights.transpose() * d_z2)
                        .cwiseProduct(relu_mask(act.z1));
    set_grad(L::Input, d_z1, batch.inputs);
    return grads;
}

void adam_step(span<double> params, span<const double> grads, span<double> first_moment,
               span<double> second_moment, long step, const AdamConfig &config) {
    if (step < 1)
        throw invalid_argument("adam_step: step index must be >= 1");
    if (grads.size() != params.size() || first_moment.size() != params.size() ||
        second_moment.size() != params.size())
        throw invalid_argument("adam_step: size mismatch");
    const double correction1 = 1.0 - pow(config.beta1, static_cast<double>(step));
    const double correction2 = 1.0 - pow(config.beta2, static_cast<double>(step));
    for (size_t i = 0; i < params.size(); ++i) {
        double g = grads[i];
        first_moment[i] = config.beta1 * first_moment[i] + (1.0 - config.beta1) * g;
        second_moment[i] = config.beta2 * second_moment[i] + (1.0 - config.beta2) * g * g;
        double m_hat = first_moment[i] / correction1;
        double v_hat = second_moment[i] / correction2;
        params[i] -= config.learning_rate * m_hat / (sqrt(v_hat) + config.epsilon);
    }
}

static span<double> flat(MatrixXd &m) {return {m.data(), static_cast<size_t>(m.size())};}
static span<double> flat(VectorXd &v) {return {v.data(), static_cast<size_t>(v.size())};}
static span<const double> flat(const MatrixXd &m) {
    return {m.data(), static_cast<size_t>(m.size())};
}
static span<const double> flat(const VectorXd &v) {
    return {v.data(), static_cast<size_t>(v.size())};
}

AdamOptimizer::AdamOptimizer(const HeuristicModel &model, const AdamConfig &config)
    : config(config) {
    for (const DenseLayer &layer : model.layers) {
        DenseLayer zero{MatrixXd::Zero(layer.weights.rows(), layer.weights.cols()),
                        VectorXd::Zero(layer.biases.size())};
        first_moment.push_back(zero);
        second_moment.push_back(zero);
    }
}

void AdamOptimizer::step(HeuristicModel &model, const Gradients &grads) {
    ++steps;
    for (size_t i = 0; i < model.layers.size(); ++i) {
        adam_step(flat(model.layers[i].weights), flat(grads.layers[i].weights),
                  flat(first_moment[i].weights), flat(second_moment[i].weights), steps, config);
        adam_step(flat(model.layers[i].biases), flat(grads.layers[i].biases),
                  flat(first_moment[i].biases), flat(second_moment[i].biases), steps, config);
    }
}

void TrainConfig::validate() const {
    if (!(learning_rate > 0) || batch_size < 1 || max_epochs < 1 || patience < 1 ||
        !(beta1 > 0 && beta1 < 1) || !(beta2 > 0 && beta2 < 1) || !(epsilon > 0))
        throw ConfigError("invalid training configuration");
}

string to_string(StopReason reason) {
    return reason == StopReason::Patience ? "patience" : "max-epochs";
}

bool EarlyStopping::observe(double validation_loss) {
    if (best < 0 || validation_loss < best_loss) {
        best = epochs_seen;
        best_loss = validation_loss;
        since_improvement = 0;
    } else {
        ++since_improvement;
    }
    ++epochs_seen;
    return since_improvement >= patience;
}

double dataset_mse(const HeuristicModel &model, const LabeledDataset &dataset, bool validation) {
    constexpr size_t chunk = 256;
    vector<size_t> indices;
    double sum = 0.0;
    size_t count = 0;
    auto flush = [&] {
        if (indices.empty())
            return;
        Batch batch = make_batch(dataset, indices);
        VectorXd predictions = forward_batch(model, batch.inputs);
        sum += (predictions - batch.targets).squaredNorm();
        count += indices.size();
        indices.clear();
    };
    for (size_t i = 0; i < dataset.records.size(); ++i) {
        if (dataset.records[i].validation != validation)
            continue;
        indices.push_back(i);
        if (indices.size() == chunk)
            flush();
    }
    flush();
    if (count == 0)
        throw EmptySplit(validation ? "validation split is empty" : "training split is empty");
    return sum / static_cast<double>(count);
}

TrainResult train(HeuristicModel model, const LabeledDataset &dataset, const TrainConfig &config) {
    config.validate();
    check_input_width(model, dataset.num_atoms);
    vector<size_t> train_indices;
    size_t num_validation = 0;
    for (size_t i = 0; i < dataset.records.size(); ++i) {
        if (dataset.records[i].validation)
            ++num_validation;
        else
            train_indices.push_back(i);
    }
    if (train_indices.empty())
        throw EmptySplit("training split is empty");
    if (num_validation == 0)
        throw EmptySplit("validation split is empty");

    Rng rng(derive_seed(config.seed, "shuffle"));
    AdamOptimizer optimizer(model, config.adam());
    EarlyStopping stopping(config.patience);
    TrainResult result{model, TrainHistory{}};
    result.history.config = config;

    for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
        rng.shuffle(train_indices);
        for (size_t begin = 0; begin < train_indices.size(); begin += config.batch_size) {
            size_t end = min(train_indices.size(), begin + static_cast<size_t>(config.batch_size));
            Batch batch = make_batch(
                dataset, span<const size_t>(train_indices.data() + begin, end - begin));
            double loss = 0.0;
            Gradients grads = backward(model, batch, &loss);
            if (!isfinite(loss))
                throw NumericalFailure("non-finite training loss in epoch " +
                                       std::to_string(epoch));
            optimizer.step(model, grads);
        }
        if (!model.all_finite())
            throw NumericalFailure("non-finite parameters after epoch " + std::to_string(epoch));

        EpochStats stats{dataset_mse(model, dataset, false), dataset_mse(model, dataset, true)};
        if (!isfinite(stats.train_mse) || !isfinite(stats.validation_mse))
            throw NumericalFailure("non-finite loss after epoch " + std::to_string(epoch));
        result.history.epochs.push_back(stats);
        spdlog::debug("epoch {}: train mse {:.6f}, validation mse {:.6f}", epoch,
                      stats.train_mse, stats.validation_mse);

        bool stop = stopping.observe(stats.validation_mse);
        if (stopping.improved_last())
            result.model = model;
        if (stop) {
            result.history.stop_reason = StopReason::Patience;
            break;
        }
    }
    if (result.history.stop_reason != StopReason::Patience)
        result.history.stop_reason = StopReason::MaxEpochs;
    result.history.best_epoch = stopping.best_epoch();
    return result;
}

namespace {
static_assert(std::endian::native == std::endian::little,
              "model serialization assumes a little-endian host");

constexpr char model_magic[4] = {'R', 'S', 'L', 'M'};
constexpr uint32_t model_version = 1;

template<typename T>
void put(string &out, T value) {
    char bytes[sizeof(T)];
    memcpy(bytes, &value, sizeof(T));
    out.append(bytes, sizeof(T));
}

class ByteReader {
    const string &bytes;
    size_t pos = 0;
    size_t limit;

public:
    ByteReader(const string &bytes, size_t limit) : bytes(bytes), limit(limit) {}

    template<typename T>
    T get() {
        if (pos + sizeof(T) > limit)
            throw ModelFileError(ModelFileError::Kind::Format, "model file is truncated");
        T value;
        memcpy(&value, bytes.data() + pos, sizeof(T));
        pos += sizeof(T);
        return value;
    }
    size_t position() const {return pos;}
};
}

string serialize_model(const HeuristicModel &model) {
    model.check_shapes();
    string out(model_magic, 4);
    put<uint32_t>(out, model_version);
    put<uint32_t>(out, static_cast<uint32_t>(model.num_atoms()));
    put<uint32_t>(out, static_cast<uint32_t>(model.layers.size()));
    for (const DenseLayer &layer : model.layers) {
        put<uint32_t>(out, static_cast<uint32_t>(layer.weights.rows()));
        put<uint32_t>(out, static_cast<uint32_t>(layer.weights.cols()));
        for (Eigen::Index r = 0; r < layer.weights.rows(); ++r)
            for (Eigen::Index c = 0; c < layer.weights.cols(); ++c)
                put<double>(out, layer.weights(r, c));
        for (Eigen::Index r = 0; r < layer.biases.size(); ++r)
            put<double>(out, layer.biases(r));
    }
    Sha256Digest digest = sha256(out);
    out.append(reinterpret_cast<const char *>(digest.data()), digest.size());
    return out;
}

HeuristicModel deserialize_model(const string &bytes) {
    constexpr size_t digest_size = 32;
    if (bytes.size() < 4 + digest_size)
        throw ModelFileError(ModelFileError::Kind::Checksum, "model file is truncated");
    size_t body = bytes.size() - digest_size;
    Sha256Digest digest = sha256(string_view(bytes.data(), body));
    if (memcmp(digest.data(), bytes.data() + body, digest_size) != 0)
        throw ModelFileError(ModelFileError::Kind::Checksum, "model checksum mismatch");
    if (memcmp(bytes.data(), model_magic, 4) != 0)
        throw ModelFileError(ModelFileError::Kind::Format, "not a model file (bad magic)");

    ByteReader in(bytes, body);
    in.get<uint32_t>();   // magic
    uint32_t version = in.get<uint32_t>();
    if (version != model_version)
        throw ModelFileError(ModelFileError::Kind::Version,
                             "unsupported model version " + std::to_string(version));
    uint32_t num_atoms = in.get<uint32_t>();
    uint32_t num_layers = in.get<uint32_t>();
    if (num_layers != static_cast<uint32_t>(HeuristicModel::num_layers))
        throw ModelFileError(ModelFileError::Kind::Format, "unexpected layer count");
    HeuristicModel model;
    for (uint32_t i = 0; i < num_layers; ++i) {
        uint32_t rows = in.get<uint32_t>();
        uint32_t cols = in.get<uint32_t>();
        if (static_cast<uint64_t>(rows) * cols * 8 > body)
            throw ModelFileError(ModelFileError::Kind::Format, "layer larger than file");
        DenseLayer layer{MatrixXd(rows, cols), VectorXd(rows)};
        for (uint32_t r = 0; r < rows; ++r)
            for (uint32_t c = 0; c < cols; ++c)
                layer.weights(r, c) = in.get<double>();
        for (uint32_t r = 0; r < rows; ++r)
            layer.biases(r) = in.get<double>();
        model.layers.push_back(move(layer));
    }
    if (in.position() != body)
        throw ModelFileError(ModelFileError::Kind::Format, "trailing bytes in model file");
    try {
        model.check_shapes();
    } catch (const invalid_argument &e) {
        throw ModelFileError(ModelFileError::Kind::Format, e.what());
    }
    if (model.num_atoms() != num_atoms)
        throw ModelFileError(ModelFileError::Kind::Format, "header atom count disagrees with layers");
    return model;
}

void save_model(const HeuristicModel &model, const filesystem::path &path) {
    try {
        write_file(path, serialize_model(model));
    } catch (const TaskFileError &e) {
        throw ModelFileError(ModelFileError::Kind::Io, e.what());
    }
}

HeuristicModel load_model(const filesystem::path &path) {
    string bytes;
    try {
        bytes = read_file(path);
    } catch (const TaskFileError &e) {
        throw ModelFileError(ModelFileError::Kind::Io, e.what());
    }
    return deserialize_model(bytes);
}
}
