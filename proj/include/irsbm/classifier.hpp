#pragma once

#include <span>
#include <utility>
#include <vector>

#include "irsbm/fingerprint.hpp"
#include "irsbm/learning.hpp"
#include "irsbm/protocols.hpp"

namespace irsbm {

/// Argmax class of the model mapped through class_map (lowest index on ties).
AccessPointId predict_access_point(const MLPModel& m, const Vec3& pos, std::span<const AccessPointId> class_map);

/// Classifier backed by a trained network whose class_map labels are access points.
class MlpAccessClassifier final : public AccessClassifier {
public:
    explicit MlpAccessClassifier(MLPModel model);

    AccessPointId predict(const Vec3& position) const override;

    const MLPModel& model() const { return model_; }
    const std::vector<AccessPointId>& classes() const { return classes_; }

private:
    MLPModel model_;
    std::vector<AccessPointId> classes_;
};

/// Exact classifier: the brute-force best server at the given position.
class OracleAccessClassifier final : public AccessClassifier {
public:
    OracleAccessClassifier(Scenario s, const LinkBudget& link) : scenario_(std::move(s)), link_(link) {}

    AccessPointId predict(const Vec3& position) const override;

private:
    Scenario scenario_;
    LinkBudget link_;
};

/// Labels as class indices into `classes`; features are (x, y, z).
Dataset to_classifier_dataset(const std::vector<FingerprintRecord>& records, std::span<const AccessPointId> classes);

struct ClassifierTraining {
    MLPModel model;
    std::vector<double> loss_trace;
    double train_accuracy = 0.0;
    double holdout_accuracy = 0.0;
};

/// Trains a 3-hidden...-C softmax network, C = 1 + number of IRSs, with the
/// scenario's serving points as class map.
ClassifierTraining train_access_classifier(const Scenario& s, const FingerprintDataset& data,
                                           const std::vector<int>& hidden, const TrainConfig& cfg);

/// Throws ConfigError unless the model's class map is exactly the scenario's serving points.
void check_classifier_matches(const MLPModel& m, const Scenario& s);

}  // namespace irsbm
