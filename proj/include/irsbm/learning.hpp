#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace irsbm {

enum class OutputActivation { Softmax, Identity };

/// Fully connected layer; `weights` is outputs x inputs, row-major.
struct DenseLayer {
    int inputs = 0;
    int outputs = 0;
    std::vector<double> weights;
    std::vector<double> biases;

    friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

/// Feedforward network with ReLU hidden layers and a softmax (classifier) or
/// identity (regressor) output. Inputs are standardised with the stored
/// per-feature shift and scale before the first layer.
struct MLPModel {
    std::vector<int> layer_dims;
    OutputActivation output = OutputActivation::Softmax;
    std::vector<DenseLayer> layers;
    std::vector<double> feature_shift;
    std::vector<double> feature_scale;
    /// Class labels of the softmax outputs; empty for regressors.
    std::vector<std::string> class_map;

    int input_dim() const { return layer_dims.front(); }
    int output_dim() const { return layer_dims.back(); }
    std::size_t parameter_count() const;

    /// Throws ModelFormatError naming the first inconsistent field.
    void validate() const;

    friend bool operator==(const MLPModel&, const MLPModel&) = default;
};

/// Zero weights and identity normalisation.
MLPModel make_mlp(std::vector<int> layer_dims, OutputActivation output);

/// Glorot-uniform weights in +-sqrt(6/(fan_in+fan_out)), zero biases.
void initialize_weights(MLPModel& m, std::uint64_t seed);

/// Supervised samples stored row-major. Classifier sets use `labels`,
/// regressor sets use `targets` (target_dim values per sample).
struct Dataset {
    int feature_dim = 0;
    int target_dim = 0;
    std::vector<double> features;
    std::vector<int> labels;
    std::vector<double> targets;

    std::size_t size() const { return feature_dim == 0 ? 0 : features.size() / static_cast<std::size_t>(feature_dim); }
    bool empty() const { return size() == 0; }
    std::span<const double> row(std::size_t i) const {
        return {features.data() + i * static_cast<std::size_t>(feature_dim), static_cast<std::size_t>(feature_dim)};
    }
    void add(std::span<const double> x, int label);
    void add(std::span<const double> x, std::span<const double> target);
};

/// Mean/standard-deviation standardisation. Features whose spread is zero or
/// at rounding level (below 1e-10 of the mean) keep scale 1.
void fit_normalization(MLPModel& m, const Dataset& data);

std::vector<double> forward(const MLPModel& m, std::span<const double> x);

/// Same shapes as the model's layers.
struct Gradients {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;
};

struct LossAndGrad {
    double loss = 0.0;
    Gradients gradients;
};

/// Mean cross-entropy (softmax) or mean squared error (identity) over the
/// batch, with exact backpropagated gradients.
LossAndGrad loss_and_grad(const MLPModel& m, const Dataset& batch);

struct TrainConfig {
    double learning_rate = 0.05;
    int epochs = 200;
    int batch_size = 64;
    std::uint64_t seed = 1;
    double momentum = 0.9;
    /// Refit the input standardisation on the training data first.
    bool fit_normalization = true;

    void validate() const;
};

struct TrainResult {
    MLPModel model;
    /// Mean training loss of every epoch.
    std::vector<double> loss_trace;
};

/// Minibatch SGD with momentum. The architecture, output kind and class map
/// come from `m`; the weights are re-initialised from cfg.seed. Identical
/// inputs give bit-identical parameters. Throws TrainingError on a
/// non-finite loss.
TrainResult train(const MLPModel& m, const Dataset& data, const TrainConfig& cfg);

/// Argmax of the output, lowest index on ties.
int predict_class(const MLPModel& m, std::span<const double> x);

double accuracy(const MLPModel& m, const Dataset& data);

void save_model(const MLPModel& m, const std::filesystem::path& path);
std::string model_to_json(const MLPModel& m);
/// Throws ModelFormatError for malformed or inconsistent documents.
MLPModel load_model(const std::filesystem::path& path);
MLPModel model_from_json(const std::string& text);

}  // namespace irsbm
