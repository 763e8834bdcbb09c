#ifndef RSL_NETWORK_H
#define RSL_NETWORK_H

#include "atom_set.h"
#include "dataset.h"
#include "strips.h"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rsl::nn {
class DimensionMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class NumericalFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class EmptySplit : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class ModelFileError : public std::runtime_error {
public:
    enum class Kind {Io, Format, Version, Checksum};

private:
    Kind error_kind;

public:
    ModelFileError(Kind kind, const std::string &message)
        : runtime_error(message), error_kind(kind) {
    }
    Kind kind() const {return error_kind;}
};

constexpr int default_hidden_width = 250;

// y = W x + b with W stored rows = outputs, cols = inputs.
struct DenseLayer {
    Eigen::MatrixXd weights;
    Eigen::VectorXd biases;

    friend bool operator==(const DenseLayer &a, const DenseLayer &b) {
        return a.weights.rows() == b.weights.rows() && a.weights.cols() == b.weights.cols() &&
               a.biases.size() == b.biases.size() && a.weights == b.weights &&
               a.biases == b.biases;
    }
};

/*
  Residual MLP heuristic:

    input |F| -> dense 250 -> dense 250 -> [dense 250 -> dense 250] + skip
              -> linear output neuron

  ReLU follows every hidden dense layer. The residual block adds its input
  to the ReLU output of its second layer.
*/
class HeuristicModel {
public:
    enum Layer {Input = 0, Hidden = 1, ResidualFirst = 2, ResidualSecond = 3, Output = 4};
    static constexpr int num_layers = 5;

    std::vector<DenseLayer> layers;

    std::size_t num_atoms() const {return static_cast<std::size_t>(layers[Input].weights.cols());}
    int hidden_width() const {return static_cast<int>(layers[Input].weights.rows());}
    std::size_t parameter_count() const;
    bool all_finite() const;
    // Throws std::invalid_argument if layer shapes do not chain.
    void check_shapes() const;

    friend bool operator==(const HeuristicModel &, const HeuristicModel &) = default;
};

// Weights uniform in ±sqrt(6 / fan_in), zero biases.
HeuristicModel init_model(std::size_t num_atoms, std::uint64_t seed,
                          int hidden_width = default_hidden_width);

double forward(const HeuristicModel &model, const AtomSet &input);
inline double forward(const HeuristicModel &model, const State &s) {
    return forward(model, s.atoms);
}

// max(0, forward); the value used to guide search.
double heuristic_value(const HeuristicModel &model, const State &s);

// Column k of the result is the input vector of states[k].
Eigen::MatrixXd to_input_matrix(std::span<const State> states, std::size_t num_atoms);

// One prediction per input column.
Eigen::VectorXd forward_batch(const HeuristicModel &model, const Eigen::MatrixXd &inputs);

double mse_loss(std::span<const double> predictions, std::span<const double> targets);

struct Batch {
    Eigen::MatrixXd inputs;    // num_atoms x batch size
    Eigen::VectorXd targets;
};

Batch make_batch(const LabeledDataset &dataset, std::span<const std::size_t> record_indices);

double batch_loss(const HeuristicModel &model, const Batch &batch);

// Same layer shapes as the model.
struct Gradients {
    std::vector<DenseLayer> layers;
};

// Exact gradient of the batch MSE. The ReLU derivative at 0 is taken as 0.
Gradients backward(const HeuristicModel &model, const Batch &batch, double *loss = nullptr);

struct AdamConfig {
    double learning_rate = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/*
  One bias-corrected Adam update over flat parameter storage:
    m <- b1 m + (1 - b1) g,  v <- b2 v + (1 - b2) g^2
    theta <- theta - lr * (m / (1 - b1^t)) / (sqrt(v / (1 - b2^t)) + eps)
  step must be >= 1.
*/
void adam_step(std::span<double> params, std::span<const double> grads,
               std::span<double> first_moment, std::span<double> second_moment,
               long step, const AdamConfig &config);

class AdamOptimizer {
    AdamConfig config;
    std::vector<DenseLayer> first_moment;
    std::vector<DenseLayer> second_moment;
    long steps = 0;

public:
    AdamOptimizer(const HeuristicModel &model, const AdamConfig &config);
    void step(HeuristicModel &model, const Gradients &grads);
    long step_count() const {return steps;}
};

struct TrainConfig {
    double learning_rate = 1e-4;
    int batch_size = 64;
    int max_epochs = 1000;
    int patience = 2;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t seed = 0;

    void validate() const;
    AdamConfig adam() const {return {learning_rate, beta1, beta2, epsilon};}
};

enum class StopReason {Patience, MaxEpochs};
std::string to_string(StopReason reason);

struct EpochStats {
    double train_mse = 0.0;
    double validation_mse = 0.0;
};

struct TrainHistory {
    std::vector<EpochStats> epochs;
    int best_epoch = -1;
    StopReason stop_reason = StopReason::MaxEpochs;
    TrainConfig config;
};

/*
  Patience-based stopping on validation loss. An epoch improves if its loss
  is strictly below the best so far; `patience` consecutive non-improving
  epochs stop training.
*/
class EarlyStopping {
    int patience;
    int epochs_seen = 0;
    int since_improvement = 0;
    int best = -1;
    double best_loss = 0.0;

public:
    explicit EarlyStopping(int patience) : patience(patience) {}

    // Returns true when training should stop after this epoch.
    bool observe(double validation_loss);
    bool improved_last() const {return since_improvement == 0;}
    int best_epoch() const {return best;}
    double best_validation_loss() const {return best_loss;}
};

struct TrainResult {
    HeuristicModel model;   // parameters from the best validation epoch
    TrainHistory history;
};

// Mean squared error of the model over the records with the given split flag.
double dataset_mse(const HeuristicModel &model, const LabeledDataset &dataset, bool validation);

TrainResult train(HeuristicModel model, const LabeledDataset &dataset, const TrainConfig &config);

/*
  Little-endian binary model file:
    "RSLM", u32 version = 1, u32 num_atoms, u32 layer count,
    per layer: u32 rows, u32 cols, rows*cols f64 weights (row-major),
               rows f64 biases,
    32-byte SHA-256 of every preceding byte.
*/
std::string serialize_model(const HeuristicModel &model);
HeuristicModel deserialize_model(const std::string &bytes);
void save_model(const HeuristicModel &model, const std::filesystem::path &path);
HeuristicModel load_model(const std::filesystem::path &path);
}

#endif
