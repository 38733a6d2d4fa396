#include "irsbm/classifier.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "irsbm/error.hpp"

namespace irsbm {

AccessPointId predict_access_point(const MLPModel& m, const Vec3& pos, std::span<const AccessPointId> class_map) {
    if (class_map.size() != static_cast<std::size_t>(m.output_dim()))
        throw InvalidArgument(fmt::format("class map has {} entries, model has {} outputs", class_map.size(),
                                          m.output_dim()));
    const double x[3] = {pos.x, pos.y, pos.z};
    return class_map[static_cast<std::size_t>(predict_class(m, x))];
}

MlpAccessClassifier::MlpAccessClassifier(MLPModel model) : model_(std::move(model)) {
    model_.validate();
    if (model_.output != OutputActivation::Softmax || model_.input_dim() != 3)
        throw ConfigError("access classifier: expected a softmax model over (x, y, z)");
    if (model_.class_map.size() != static_cast<std::size_t>(model_.output_dim()))
        throw ConfigError("access classifier: class_map must label every output");
    for (const auto& label : model_.class_map) {
        try {
            classes_.push_back(AccessPointId::parse(label));
        } catch (const Error&) {
            throw ConfigError(fmt::format("access classifier: class_map entry '{}' is not an access point", label));
        }
    }
}

AccessPointId MlpAccessClassifier::predict(const Vec3& position) const {
    return predict_access_point(model_, position, classes_);
}

AccessPointId OracleAccessClassifier::predict(const Vec3& position) const {
    return label_position(scenario_, link_, position).label;
}

Dataset to_classifier_dataset(const std::vector<FingerprintRecord>& records, std::span<const AccessPointId> classes) {
    Dataset data;
    data.feature_dim = 3;
    for (const auto& r : records) {
        const auto it = std::find(classes.begin(), classes.end(), r.label);
        if (it == classes.end())
            throw DatasetError(fmt::format("label {} is not one of the classifier classes", r.label.to_string()));
        const double x[3] = {r.position.x, r.position.y, r.position.z};
        data.add(x, static_cast<int>(it - classes.begin()));
    }
    return data;
}

ClassifierTraining train_access_classifier(const Scenario& s, const FingerprintDataset& data,
                                           const std::vector<int>& hidden, const TrainConfig& cfg) {
    const auto classes = s.serving_points();
    std::vector<int> dims{3};
    dims.insert(dims.end(), hidden.begin(), hidden.end());
    dims.push_back(static_cast<int>(classes.size()));
    MLPModel arch = make_mlp(dims, OutputActivation::Softmax);
    for (const auto& c : classes) arch.class_map.push_back(c.to_string());

    const Dataset train_set = to_classifier_dataset(data.train, classes);
    TrainResult trained = train(arch, train_set, cfg);
    ClassifierTraining out;
    out.model = std::move(trained.model);
    out.loss_trace = std::move(trained.loss_trace);
    out.train_accuracy = accuracy(out.model, train_set);
    out.holdout_accuracy = data.holdout.empty() ? 0.0 : accuracy(out.model, to_classifier_dataset(data.holdout, classes));
    return out;
}

void check_classifier_matches(const MLPModel& m, const Scenario& s) {
    std::vector<std::string> expected;
    for (const auto& c : s.serving_points()) expected.push_back(c.to_string());
    if (m.class_map != expected)
        throw ConfigError(fmt::format("model class map [{}] does not match the scenario's serving points [{}]",
                                      fmt::join(m.class_map, ","), fmt::join(expected, ",")));
}

}  // namespace irsbm
