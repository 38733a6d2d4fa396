#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "irsbm/channel.hpp"
#include "irsbm/learning.hpp"
#include "irsbm/mobility.hpp"
#include "irsbm/protocols.hpp"
#include "irsbm/scenario.hpp"

namespace irsbm {

/// Classifier architecture and optimiser settings. The training seed is
/// derived from the master seed.
struct ClassifierConfig {
    std::vector<int> hidden{64, 64};
    double learning_rate = 0.05;
    int epochs = 200;
    int batch_size = 64;
    double momentum = 0.9;
};

struct OverheadConfig {
    /// Any of "exhaustive", "hierarchical", "ml".
    std::vector<std::string> protocols{"exhaustive", "hierarchical", "ml"};
    std::vector<int> users{10, 25, 50, 100};
    int fanout = 4;
};

struct TrackingConfig {
    /// Any of "genie", "mobility_aware", "conventional".
    std::vector<std::string> schemes{"genie", "mobility_aware", "conventional"};
    MobilityModelSpec trajectory = Waypoint{{{85.0, 5.0, 1.5}, {85.0, 95.0, 1.5}}, 10.0};
    /// Starting point for constant-velocity and random-walk trajectories;
    /// waypoint trajectories start at their first point.
    Vec3 start{85.0, 5.0, 1.5};
    double duration_s = 9.0;
    PredictorSpec predictor = LinearExtrapolation{};
    /// Gaussian noise on reported positions; 0 disables it.
    double position_noise_std = 0.0;
    /// Motion is sampled once every this many slots.
    int motion_step_slots = 100;
    /// "model" uses the trained network; "oracle" uses the brute-force labeler.
    std::string classifier = "model";
};

/// Complete experiment description. Absent keys keep the study-case defaults.
struct SimConfig {
    BsSpec bs;
    std::vector<IrsSpec> irs;
    std::vector<Obstacle> obstacles;
    Area area;
    double ue_height = 1.5;
    LinkBudget link;
    FrameConfig frame;
    double grid_resolution = 1.0;
    double holdout_fraction = 0.2;
    ClassifierConfig classifier;
    OverheadConfig overhead;
    TrackingConfig tracking;
    std::uint64_t seed = 1;

    /// Throws ConfigError naming the offending key.
    void validate() const;
    Scenario scenario() const;
    GridSpec grid() const;
    TrainConfig classifier_train_config() const;
};

/// Substream tags for the master seed.
enum class SeedStream : std::uint64_t { Split = 1, Classifier = 2, Placement = 3, Tracking = 4, Regressor = 5 };

std::uint64_t derive_seed(std::uint64_t master, SeedStream stream);

/// The canonical study case: 100 m x 100 m, BS at the west edge, four
/// shadowing buildings and one IRS per shadow.
SimConfig default_config();

/// Parses a JSON document over the defaults; unknown keys are rejected.
SimConfig config_from_json(const std::string& text);
SimConfig load_config(const std::filesystem::path& path);
/// Canonical JSON echo of every field.
std::string config_to_json(const SimConfig& cfg);

}  // namespace irsbm
