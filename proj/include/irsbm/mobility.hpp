#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <optional>
#include <variant>
#include <vector>

#include "irsbm/learning.hpp"
#include "irsbm/random.hpp"
#include "irsbm/scenario.hpp"

namespace irsbm {

struct MotionState {
    Vec3 position;
    Vec3 velocity;
    long slot_index = 0;
};

/// Bounded history of motion states, oldest first, with strictly increasing slots.
class TraceBuffer {
public:
    explicit TraceBuffer(std::size_t capacity = 10);

    /// Appends, evicting the oldest entry when full. Throws InvalidArgument if
    /// the slot index does not exceed the newest stored one.
    void push(const MotionState& state);

    std::size_t size() const { return entries_.size(); }
    std::size_t capacity() const { return capacity_; }
    bool empty() const { return entries_.empty(); }
    bool full() const { return entries_.size() == capacity_; }
    const std::deque<MotionState>& entries() const { return entries_; }
    const MotionState& back() const { return entries_.back(); }

private:
    std::size_t capacity_;
    std::deque<MotionState> entries_;
};

struct ConstantVelocity {
    Vec3 velocity;
};

/// Polyline traversed at constant speed, stopping at the last point.
struct Waypoint {
    std::vector<Vec3> points;
    double speed = 1.0;
};

/// Horizontal Gaussian steps with standard deviation step_std * sqrt(dt).
struct RandomWalk {
    double step_std = 1.0;
    std::uint64_t seed = 1;
};

using MobilityModelSpec = std::variant<ConstantVelocity, Waypoint, RandomWalk>;

/// Throws ConfigError for malformed specs or waypoints outside `area`.
void validate_mobility(const MobilityModelSpec& spec, const Area& area);

/// Stateful motion generator; keeps the waypoint cursor or the walk's RNG.
class MobilityModel {
public:
    explicit MobilityModel(MobilityModelSpec spec);

    /// Advances by dt seconds (dt > 0). slot_index is carried through unchanged.
    MotionState advance(const MotionState& state, double dt);

    const MobilityModelSpec& spec() const { return spec_; }

private:
    MobilityModelSpec spec_;
    std::size_t next_vertex_ = 1;
    Rng rng_;
};

inline MotionState advance(MobilityModel& model, const MotionState& state, double dt) {
    return model.advance(state, dt);
}

/// Least-squares line fit of position against slot index, extrapolated to
/// newest_slot + j * step_slots for j = 1..k. Needs at least two entries.
std::vector<Vec3> predict_linear(const TraceBuffer& trace, int k, double step_slots);

/// Sliding-window delta regressor retrained on the cached trace.
struct OnlineRegressorSpec {
    /// Trace length H used for training.
    int window = 10;
    /// Prediction horizon K in motion steps.
    int horizon = 5;
    /// Retrain period U in motion steps.
    int retrain_every = 50;
    /// Number of past position deltas fed to the network.
    int input_deltas = 2;
    std::vector<int> hidden{16};
    TrainConfig train{0.01, 400, 8, 7, 0.9, true};

    void validate() const;
};

struct LinearExtrapolation {
    int horizon = 5;
};

using PredictorSpec = std::variant<LinearExtrapolation, OnlineRegressorSpec>;

int predictor_horizon(const PredictorSpec& spec);

class OnlineRegressor {
public:
    explicit OnlineRegressor(OnlineRegressorSpec spec);

    /// Retrains when the trace holds `window` entries and either no model
    /// exists yet or `retrain_every` steps have passed since the last
    /// training. Returns whether a retrain happened.
    bool online_update(const TraceBuffer& trace, long step);

    void retrain(const TraceBuffer& trace);

    bool trained() const { return model_.has_value(); }
    const MLPModel& model() const { return model_.value(); }
    const OnlineRegressorSpec& spec() const { return spec_; }

    /// Rolls the regressor k steps forward, feeding back its own deltas.
    std::vector<Vec3> predict(const TraceBuffer& trace, int k) const;

private:
    OnlineRegressorSpec spec_;
    std::optional<MLPModel> model_;
    std::optional<long> last_update_;
};

/// Dispatches between the closed-form and learned predictors.
class Predictor {
public:
    explicit Predictor(PredictorSpec spec);

    /// Feeds the latest trace to online learners.
    void observe(const TraceBuffer& trace, long step);

    /// k future positions spaced step_slots apart. An untrained regressor
    /// falls back to linear extrapolation. Throws InvalidArgument when the
    /// trace holds fewer than two entries.
    std::vector<Vec3> predict(const TraceBuffer& trace, int k, double step_slots) const;

    const PredictorSpec& spec() const { return spec_; }
    const OnlineRegressor* regressor() const { return regressor_ ? &*regressor_ : nullptr; }

private:
    PredictorSpec spec_;
    std::optional<OnlineRegressor> regressor_;
};

struct TrajectoryPoint {
    long slot = 0;
    Vec3 position;
};

/// CSV `slot,x,y,z`.
void write_trajectory_csv(const std::filesystem::path& path, const std::vector<TrajectoryPoint>& points);
std::vector<TrajectoryPoint> read_trajectory_csv(const std::filesystem::path& path);

}  // namespace irsbm
