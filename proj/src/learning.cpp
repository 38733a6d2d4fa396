#include "irsbm/learning.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "irsbm/error.hpp"
#include "irsbm/random.hpp"

namespace irsbm {

using nlohmann::json;

std::size_t MLPModel::parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.weights.size() + l.biases.size();
    return n;
}

void MLPModel::validate() const {
    const auto fail = [](const std::string& msg) { throw ModelFormatError(msg); };
    if (layer_dims.size() < 2) fail("layer_dims: need at least an input and an output size");
    for (std::size_t i = 0; i < layer_dims.size(); ++i)
        if (layer_dims[i] <= 0) fail(fmt::format("layer_dims[{}]: must be positive", i));
    if (layers.size() != layer_dims.size() - 1)
        fail(fmt::format("layers: expected {} layers, found {}", layer_dims.size() - 1, layers.size()));
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const auto& layer = layers[l];
        if (layer.inputs != layer_dims[l] || layer.outputs != layer_dims[l + 1])
            fail(fmt::format("layers[{}]: shape {}x{} does not match layer_dims", l, layer.outputs, layer.inputs));
        const auto expected = static_cast<std::size_t>(layer.inputs) * static_cast<std::size_t>(layer.outputs);
        if (layer.weights.size() != expected)
            fail(fmt::format("layers[{}].weights: expected {} values, found {}", l, expected, layer.weights.size()));
        if (layer.biases.size() != static_cast<std::size_t>(layer.outputs))
            fail(fmt::format("layers[{}].biases: expected {} values, found {}", l, layer.outputs, layer.biases.size()));
        const auto finite = [](double v) { return std::isfinite(v); };
        if (!std::all_of(layer.weights.begin(), layer.weights.end(), finite) ||
            !std::all_of(layer.biases.begin(), layer.biases.end(), finite))
            fail(fmt::format("layers[{}]: non-finite parameter", l));
    }
    const auto in = static_cast<std::size_t>(layer_dims.front());
    if (feature_shift.size() != in)
        fail(fmt::format("normalization.shift: expected {} values, found {}", in, feature_shift.size()));
    if (feature_scale.size() != in)
        fail(fmt::format("normalization.scale: expected {} values, found {}", in, feature_scale.size()));
    for (std::size_t i = 0; i < in; ++i) {
        if (!std::isfinite(feature_shift[i])) fail(fmt::format("normalization.shift[{}]: non-finite", i));
        if (!(feature_scale[i] > 0.0) || !std::isfinite(feature_scale[i]))
            fail(fmt::format("normalization.scale[{}]: must be positive and finite", i));
    }
    if (!class_map.empty() && class_map.size() != static_cast<std::size_t>(layer_dims.back()))
        fail(fmt::format("class_map: expected {} labels, found {}", layer_dims.back(), class_map.size()));
}

MLPModel make_mlp(std::vector<int> layer_dims, OutputActivation output) {
    MLPModel m;
    m.layer_dims = std::move(layer_dims);
    m.output = output;
    if (m.layer_dims.size() < 2) throw InvalidArgument("make_mlp: need at least an input and an output size");
    for (int d : m.layer_dims)
        if (d <= 0) throw InvalidArgument("make_mlp: layer sizes must be positive");
    for (std::size_t l = 0; l + 1 < m.layer_dims.size(); ++l) {
        DenseLayer layer;
        layer.inputs = m.layer_dims[l];
        layer.outputs = m.layer_dims[l + 1];
        layer.weights.assign(static_cast<std::size_t>(layer.inputs) * layer.outputs, 0.0);
        layer.biases.assign(static_cast<std::size_t>(layer.outputs), 0.0);
        m.layers.push_back(std::move(layer));
    }
    m.feature_shift.assign(static_cast<std::size_t>(m.layer_dims.front()), 0.0);
    m.feature_scale.assign(static_cast<std::size_t>(m.layer_dims.front()), 1.0);
    return m;
}

void initialize_weights(MLPModel& m, std::uint64_t seed) {
    Rng rng(seed);
    for (auto& layer : m.layers) {
        const double limit = std::sqrt(6.0 / (layer.inputs + layer.outputs));
        for (double& w : layer.weights) w = uniform(rng, -limit, limit);
        std::fill(layer.biases.begin(), layer.biases.end(), 0.0);
    }
}

void Dataset::add(std::span<const double> x, int label) {
    if (feature_dim == 0) feature_dim = static_cast<int>(x.size());
    if (x.size() != static_cast<std::size_t>(feature_dim)) throw InvalidArgument("Dataset::add: feature size mismatch");
    features.insert(features.end(), x.begin(), x.end());
    labels.push_back(label);
}

void Dataset::add(std::span<const double> x, std::span<const double> target) {
    if (feature_dim == 0) feature_dim = static_cast<int>(x.size());
    if (target_dim == 0) target_dim = static_cast<int>(target.size());
    if (x.size() != static_cast<std::size_t>(feature_dim) || target.size() != static_cast<std::size_t>(target_dim))
        throw InvalidArgument("Dataset::add: sample size mismatch");
    features.insert(features.end(), x.begin(), x.end());
    targets.insert(targets.end(), target.begin(), target.end());
}

void fit_normalization(MLPModel& m, const Dataset& data) {
    if (data.empty()) throw InvalidArgument("fit_normalization: empty dataset");
    if (data.feature_dim != m.input_dim()) throw InvalidArgument("fit_normalization: feature size mismatch");
    const std::size_t n = data.size();
    const auto d = static_cast<std::size_t>(data.feature_dim);
    for (std::size_t j = 0; j < d; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += data.features[i * d + j];
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double c = data.features[i * d + j] - mean;
            var += c * c;
        }
        const double sd = std::sqrt(var / static_cast<double>(n));
        m.feature_shift[j] = mean;
        // A spread at rounding level is a constant feature; dividing by it would amplify noise.
        const bool constant = !(sd > 1e-10 * std::abs(mean)) || sd == 0.0;
        m.feature_scale[j] = (!constant && std::isfinite(sd)) ? sd : 1.0;
    }
}

namespace {

// Batch buffers reused across minibatches. acts[0] is the standardised input,
// acts[l + 1] the output of layer l (post-ReLU for hidden layers, logits or
// identity output for the last one).
struct Workspace {
    std::vector<std::vector<double>> acts;
    std::vector<std::vector<double>> transposed;
    std::vector<double> delta;
    std::vector<double> delta_prev;
};

void forward_batch(const MLPModel& m, const double* x, std::size_t batch, Workspace& ws) {
    const std::size_t layers = m.layers.size();
    ws.acts.resize(layers + 1);
    ws.transposed.resize(layers);
    const auto in_dim = static_cast<std::size_t>(m.input_dim());
    auto& input = ws.acts[0];
    input.resize(batch * in_dim);
    for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t j = 0; j < in_dim; ++j)
            input[b * in_dim + j] = (x[b * in_dim + j] - m.feature_shift[j]) / m.feature_scale[j];

    for (std::size_t l = 0; l < layers; ++l) {
        const DenseLayer& layer = m.layers[l];
        const auto n_in = static_cast<std::size_t>(layer.inputs);
        const auto n_out = static_cast<std::size_t>(layer.outputs);
        auto& wt = ws.transposed[l];
        wt.resize(n_in * n_out);
        for (std::size_t o = 0; o < n_out; ++o)
            for (std::size_t i = 0; i < n_in; ++i) wt[i * n_out + o] = layer.weights[o * n_in + i];

        const auto& in = ws.acts[l];
        auto& out = ws.acts[l + 1];
        out.resize(batch * n_out);
        for (std::size_t b = 0; b < batch; ++b) {
            double* row = out.data() + b * n_out;
            std::copy(layer.biases.begin(), layer.biases.end(), row);
            for (std::size_t i = 0; i < n_in; ++i) {
                const double a = in[b * n_in + i];
                if (a == 0.0) continue;
                const double* w = wt.data() + i * n_out;
                for (std::size_t o = 0; o < n_out; ++o) row[o] += a * w[o];
            }
            if (l + 1 < layers)
                for (std::size_t o = 0; o < n_out; ++o) row[o] = std::max(row[o], 0.0);
        }
    }
}

void softmax_row(const double* logits, double* probs, std::size_t n) {
    const double peak = *std::max_element(logits, logits + n);
    double total = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
        probs[c] = std::exp(logits[c] - peak);
        total += probs[c];
    }
    for (std::size_t c = 0; c < n; ++c) probs[c] /= total;
}

// Loss of the batch and, when grads is non-null, the gradients accumulated
// into freshly zeroed buffers.
double loss_batch(const MLPModel& m, const double* x, const int* labels, const double* targets, std::size_t batch,
                  Workspace& ws, Gradients* grads) {
    forward_batch(m, x, batch, ws);
    const std::size_t layers = m.layers.size();
    const auto n_out = static_cast<std::size_t>(m.output_dim());
    const auto& logits = ws.acts[layers];
    const double inv_batch = 1.0 / static_cast<double>(batch);

    ws.delta.assign(batch * n_out, 0.0);
    double loss = 0.0;
    if (m.output == OutputActivation::Softmax) {
        std::vector<double> probs(n_out);
        for (std::size_t b = 0; b < batch; ++b) {
            const double* z = logits.data() + b * n_out;
            const auto label = static_cast<std::size_t>(labels[b]);
            if (labels[b] < 0 || label >= n_out) throw InvalidArgument(fmt::format("label {} out of range", labels[b]));
            const double peak = *std::max_element(z, z + n_out);
            double total = 0.0;
            for (std::size_t c = 0; c < n_out; ++c) total += std::exp(z[c] - peak);
            loss += peak + std::log(total) - z[label];
            softmax_row(z, probs.data(), n_out);
            for (std::size_t c = 0; c < n_out; ++c)
                ws.delta[b * n_out + c] = (probs[c] - (c == label ? 1.0 : 0.0)) * inv_batch;
        }
    } else {
        const double scale = 1.0 / static_cast<double>(n_out);
        for (std::size_t b = 0; b < batch; ++b)
            for (std::size_t c = 0; c < n_out; ++c) {
                const double err = logits[b * n_out + c] - targets[b * n_out + c];
                loss += err * err * scale;
                ws.delta[b * n_out + c] = 2.0 * err * scale * inv_batch;
            }
    }
    loss *= inv_batch;
    if (grads == nullptr) return loss;

    grads->weights.resize(layers);
    grads->biases.resize(layers);
    for (std::size_t l = layers; l-- > 0;) {
        const DenseLayer& layer = m.layers[l];
        const auto li = static_cast<std::size_t>(layer.inputs);
        const auto lo = static_cast<std::size_t>(layer.outputs);
        auto& gw = grads->weights[l];
        auto& gb = grads->biases[l];
        gw.assign(li * lo, 0.0);
        gb.assign(lo, 0.0);
        const auto& in = ws.acts[l];
        for (std::size_t b = 0; b < batch; ++b) {
            const double* in_row = in.data() + b * li;
            for (std::size_t o = 0; o < lo; ++o) {
                const double d = ws.delta[b * lo + o];
                gb[o] += d;
                if (d == 0.0) continue;
                double* g = gw.data() + o * li;
                for (std::size_t i = 0; i < li; ++i) g[i] += d * in_row[i];
            }
        }
        if (l == 0) break;
        ws.delta_prev.assign(batch * li, 0.0);
        for (std::size_t b = 0; b < batch; ++b) {
            double* dp = ws.delta_prev.data() + b * li;
            for (std::size_t o = 0; o < lo; ++o) {
                const double d = ws.delta[b * lo + o];
                if (d == 0.0) continue;
                const double* w = layer.weights.data() + o * li;
                for (std::size_t i = 0; i < li; ++i) dp[i] += d * w[i];
            }
            const double* act = in.data() + b * li;
            for (std::size_t i = 0; i < li; ++i)
                if (act[i] <= 0.0) dp[i] = 0.0;
        }
        std::swap(ws.delta, ws.delta_prev);
    }
    return loss;
}

void check_dataset(const MLPModel& m, const Dataset& data) {
    if (data.empty()) throw InvalidArgument("dataset is empty");
    if (data.feature_dim != m.input_dim())
        throw InvalidArgument(fmt::format("dataset has {} features, model expects {}", data.feature_dim, m.input_dim()));
    if (m.output == OutputActivation::Softmax) {
        if (data.labels.size() != data.size()) throw InvalidArgument("classifier dataset needs one label per sample");
        for (int label : data.labels)
            if (label < 0 || label >= m.output_dim())
                throw InvalidArgument(fmt::format("label {} outside [0, {})", label, m.output_dim()));
    } else if (data.target_dim != m.output_dim() ||
               data.targets.size() != data.size() * static_cast<std::size_t>(data.target_dim)) {
        throw InvalidArgument(fmt::format("regressor dataset needs {} targets per sample", m.output_dim()));
    }
}

}  // namespace

std::vector<double> forward(const MLPModel& m, std::span<const double> x) {
    if (x.size() != static_cast<std::size_t>(m.input_dim()))
        throw InvalidArgument(fmt::format("forward: input has {} values, model expects {}", x.size(), m.input_dim()));
    Workspace ws;
    forward_batch(m, x.data(), 1, ws);
    std::vector<double> out = ws.acts.back();
    if (m.output == OutputActivation::Softmax) softmax_row(ws.acts.back().data(), out.data(), out.size());
    return out;
}

LossAndGrad loss_and_grad(const MLPModel& m, const Dataset& batch) {
    check_dataset(m, batch);
    Workspace ws;
    LossAndGrad result;
    result.loss = loss_batch(m, batch.features.data(), batch.labels.data(), batch.targets.data(), batch.size(), ws,
                             &result.gradients);
    return result;
}

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ConfigError("training.learning_rate: must be positive");
    if (epochs < 0) throw ConfigError("training.epochs: must be nonnegative");
    if (batch_size <= 0) throw ConfigError("training.batch_size: must be positive");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("training.momentum: must lie in [0, 1)");
}

TrainResult train(const MLPModel& m, const Dataset& data, const TrainConfig& cfg) {
    cfg.validate();
    check_dataset(m, data);
    TrainResult result;
    result.model = m;
    MLPModel& model = result.model;
    if (cfg.fit_normalization) fit_normalization(model, data);
    initialize_weights(model, cfg.seed);

    Gradients velocity;
    for (const auto& layer : model.layers) {
        velocity.weights.emplace_back(layer.weights.size(), 0.0);
        velocity.biases.emplace_back(layer.biases.size(), 0.0);
    }

    const std::size_t n = data.size();
    const auto fd = static_cast<std::size_t>(data.feature_dim);
    const auto td = static_cast<std::size_t>(data.target_dim);
    const bool classifier = model.output == OutputActivation::Softmax;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng shuffler(mix_seed(cfg.seed, 1));
    Workspace ws;
    Gradients grads;
    std::vector<double> bx;
    std::vector<int> by;
    std::vector<double> bt;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        shuffle(order, shuffler);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t end = std::min(n, start + static_cast<std::size_t>(cfg.batch_size));
            bx.clear();
            by.clear();
            bt.clear();
            for (std::size_t k = start; k < end; ++k) {
                const std::size_t i = order[k];
                bx.insert(bx.end(), data.features.begin() + i * fd, data.features.begin() + (i + 1) * fd);
                if (classifier)
                    by.push_back(data.labels[i]);
                else
                    bt.insert(bt.end(), data.targets.begin() + i * td, data.targets.begin() + (i + 1) * td);
            }
            const double loss = loss_batch(model, bx.data(), by.data(), bt.data(), end - start, ws, &grads);
            if (!std::isfinite(loss))
                throw TrainingError(fmt::format("non-finite loss at epoch {}, batch starting at sample {}", epoch, start));
            epoch_loss += loss * static_cast<double>(end - start);

            for (std::size_t l = 0; l < model.layers.size(); ++l) {
                auto& layer = model.layers[l];
                auto& vw = velocity.weights[l];
                auto& vb = velocity.biases[l];
                for (std::size_t k = 0; k < vw.size(); ++k) {
                    vw[k] = cfg.momentum * vw[k] + grads.weights[l][k];
                    layer.weights[k] -= cfg.learning_rate * vw[k];
                }
                for (std::size_t k = 0; k < vb.size(); ++k) {
                    vb[k] = cfg.momentum * vb[k] + grads.biases[l][k];
                    layer.biases[k] -= cfg.learning_rate * vb[k];
                }
            }
        }
        result.loss_trace.push_back(epoch_loss / static_cast<double>(n));
    }
    return result;
}

int predict_class(const MLPModel& m, std::span<const double> x) {
    const auto out = forward(m, x);
    return static_cast<int>(std::max_element(out.begin(), out.end()) - out.begin());
}

double accuracy(const MLPModel& m, const Dataset& data) {
    if (data.empty()) return 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < data.size(); ++i)
        if (predict_class(m, data.row(i)) == data.labels[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(data.size());
}

// --- persistence -----------------------------------------------------------

std::string model_to_json(const MLPModel& m) {
    m.validate();
    json doc;
    doc["format"] = "irsbm-mlp";
    doc["version"] = 1;
    doc["layer_dims"] = m.layer_dims;
    doc["output"] = m.output == OutputActivation::Softmax ? "softmax" : "identity";
    doc["class_map"] = m.class_map;
    doc["normalization"] = {{"shift", m.feature_shift}, {"scale", m.feature_scale}};
    json layers = json::array();
    for (const auto& l : m.layers) layers.push_back({{"weights", l.weights}, {"biases", l.biases}});
    doc["layers"] = std::move(layers);
    return doc.dump(1) + "\n";
}

void save_model(const MLPModel& m, const std::filesystem::path& path) {
    const std::string text = model_to_json(m);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(fmt::format("{}: cannot open for writing", path.string()));
    out << text;
    if (!out) throw IoError(fmt::format("{}: write failed", path.string()));
}

namespace {

const json& field(const json& obj, const std::string& key, const std::string& path) {
    if (!obj.is_object() || !obj.contains(key)) throw ModelFormatError(fmt::format("{}: missing", path));
    return obj.at(key);
}

std::vector<double> number_array(const json& value, const std::string& path) {
    if (!value.is_array()) throw ModelFormatError(fmt::format("{}: expected an array of numbers", path));
    std::vector<double> out;
    out.reserve(value.size());
    for (std::size_t i = 0; i < value.size(); ++i) {
        if (!value[i].is_number()) throw ModelFormatError(fmt::format("{}[{}]: expected a number", path, i));
        out.push_back(value[i].get<double>());
    }
    return out;
}

}  // namespace

MLPModel model_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ModelFormatError(fmt::format("document: {}", e.what()));
    }
    if (!doc.is_object()) throw ModelFormatError("document: expected an object");
    if (field(doc, "format", "format") != "irsbm-mlp") throw ModelFormatError("format: expected \"irsbm-mlp\"");
    if (field(doc, "version", "version") != 1) throw ModelFormatError("version: unsupported");

    MLPModel m;
    const json& dims = field(doc, "layer_dims", "layer_dims");
    if (!dims.is_array()) throw ModelFormatError("layer_dims: expected an array of integers");
    for (std::size_t i = 0; i < dims.size(); ++i) {
        if (!dims[i].is_number_integer()) throw ModelFormatError(fmt::format("layer_dims[{}]: expected an integer", i));
        m.layer_dims.push_back(dims[i].get<int>());
    }
    const json& output = field(doc, "output", "output");
    if (output == "softmax")
        m.output = OutputActivation::Softmax;
    else if (output == "identity")
        m.output = OutputActivation::Identity;
    else
        throw ModelFormatError("output: expected \"softmax\" or \"identity\"");

    const json& classes = field(doc, "class_map", "class_map");
    if (!classes.is_array()) throw ModelFormatError("class_map: expected an array of strings");
    for (std::size_t i = 0; i < classes.size(); ++i) {
        if (!classes[i].is_string()) throw ModelFormatError(fmt::format("class_map[{}]: expected a string", i));
        m.class_map.push_back(classes[i].get<std::string>());
    }

    const json& norm = field(doc, "normalization", "normalization");
    m.feature_shift = number_array(field(norm, "shift", "normalization.shift"), "normalization.shift");
    m.feature_scale = number_array(field(norm, "scale", "normalization.scale"), "normalization.scale");

    const json& layers = field(doc, "layers", "layers");
    if (!layers.is_array()) throw ModelFormatError("layers: expected an array");
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const std::string prefix = fmt::format("layers[{}]", l);
        DenseLayer layer;
        layer.weights = number_array(field(layers[l], "weights", prefix + ".weights"), prefix + ".weights");
        layer.biases = number_array(field(layers[l], "biases", prefix + ".biases"), prefix + ".biases");
        if (l + 1 < m.layer_dims.size()) {
            layer.inputs = m.layer_dims[l];
            layer.outputs = m.layer_dims[l + 1];
        }
        m.layers.push_back(std::move(layer));
    }
    m.validate();
    return m;
}

MLPModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("{}: cannot open for reading", path.string()));
    std::stringstream buffer;
    buffer << in.rdbuf();
    return model_from_json(buffer.str());
}

}  // namespace irsbm
