#include "irsbm/mobility.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "irsbm/error.hpp"

namespace irsbm {

TraceBuffer::TraceBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ == 0) throw InvalidArgument("TraceBuffer: capacity must be positive");
}

void TraceBuffer::push(const MotionState& state) {
    if (!entries_.empty() && state.slot_index <= entries_.back().slot_index)
        throw InvalidArgument(fmt::format("TraceBuffer: slot {} does not follow slot {}", state.slot_index,
                                          entries_.back().slot_index));
    if (entries_.size() == capacity_) entries_.pop_front();
    entries_.push_back(state);
}

void validate_mobility(const MobilityModelSpec& spec, const Area& area) {
    if (const auto* cv = std::get_if<ConstantVelocity>(&spec)) {
        if (!cv->velocity.finite()) throw ConfigError("trajectory.velocity: non-finite value");
    } else if (const auto* wp = std::get_if<Waypoint>(&spec)) {
        if (wp->points.size() < 2) throw ConfigError("trajectory.points: need at least two waypoints");
        if (!(wp->speed > 0.0) || !std::isfinite(wp->speed)) throw ConfigError("trajectory.speed: must be positive");
        for (std::size_t i = 0; i < wp->points.size(); ++i)
            if (!wp->points[i].finite() || !area.contains(wp->points[i]))
                throw ConfigError(fmt::format("trajectory.points[{}]: outside the scenario area", i));
    } else if (const auto* rw = std::get_if<RandomWalk>(&spec)) {
        if (!(rw->step_std >= 0.0) || !std::isfinite(rw->step_std))
            throw ConfigError("trajectory.step_std: must be nonnegative");
    }
}

MobilityModel::MobilityModel(MobilityModelSpec spec) : spec_(std::move(spec)) {
    if (const auto* rw = std::get_if<RandomWalk>(&spec_)) rng_.seed(rw->seed);
}

MotionState MobilityModel::advance(const MotionState& state, double dt) {
    if (!(dt > 0.0)) throw InvalidArgument("advance: dt must be positive");
    MotionState next = state;
    if (const auto* cv = std::get_if<ConstantVelocity>(&spec_)) {
        next.position = state.position + dt * cv->velocity;
        next.velocity = cv->velocity;
    } else if (const auto* wp = std::get_if<Waypoint>(&spec_)) {
        double remaining = wp->speed * dt;
        Vec3 pos = state.position;
        next.velocity = {};
        while (remaining > 0.0 && next_vertex_ < wp->points.size()) {
            const Vec3& target = wp->points[next_vertex_];
            const double gap = distance(pos, target);
            if (gap > remaining) {
                pos = pos + (remaining / gap) * (target - pos);
                next.velocity = (wp->speed / (target - pos).norm()) * (target - pos);
                remaining = 0.0;
            } else {
                pos = target;
                remaining -= gap;
                ++next_vertex_;
            }
        }
        next.position = pos;
    } else {
        const auto& rw = std::get<RandomWalk>(spec_);
        const double sigma = rw.step_std * std::sqrt(dt);
        const Vec3 step{sigma * standard_normal(rng_), sigma * standard_normal(rng_), 0.0};
        next.position = state.position + step;
        next.velocity = (1.0 / dt) * step;
    }
    return next;
}

std::vector<Vec3> predict_linear(const TraceBuffer& trace, int k, double step_slots) {
    if (trace.size() < 2) throw InvalidArgument("predict_linear: need at least two trace entries");
    if (k <= 0) return {};
    const auto& e = trace.entries();
    const double n = static_cast<double>(e.size());
    double t_mean = 0.0;
    Vec3 p_mean;
    for (const auto& s : e) {
        t_mean += static_cast<double>(s.slot_index);
        p_mean = p_mean + s.position;
    }
    t_mean /= n;
    p_mean = (1.0 / n) * p_mean;
    double stt = 0.0;
    Vec3 stp;
    for (const auto& s : e) {
        const double dt = static_cast<double>(s.slot_index) - t_mean;
        stt += dt * dt;
        stp = stp + dt * (s.position - p_mean);
    }
    const Vec3 slope = (1.0 / stt) * stp;
    std::vector<Vec3> out;
    out.reserve(static_cast<std::size_t>(k));
    const double t_last = static_cast<double>(e.back().slot_index);
    for (int j = 1; j <= k; ++j) out.push_back(p_mean + (t_last + j * step_slots - t_mean) * slope);
    return out;
}

void OnlineRegressorSpec::validate() const {
    if (window < 2) throw ConfigError("predictor.window: must be at least 2");
    if (horizon < 1) throw ConfigError("predictor.horizon: must be at least 1");
    if (retrain_every < 1) throw ConfigError("predictor.retrain_every: must be at least 1");
    if (input_deltas < 1 || input_deltas > window - 2)
        throw ConfigError("predictor.input_deltas: must lie in [1, window - 2]");
    train.validate();
}

int predictor_horizon(const PredictorSpec& spec) {
    return std::visit([](const auto& s) { return s.horizon; }, spec);
}

OnlineRegressor::OnlineRegressor(OnlineRegressorSpec spec) : spec_(std::move(spec)) { spec_.validate(); }

namespace {

std::vector<Vec3> deltas_of(const TraceBuffer& trace) {
    std::vector<Vec3> d;
    const auto& e = trace.entries();
    for (std::size_t i = 1; i < e.size(); ++i) d.push_back(e[i].position - e[i - 1].position);
    return d;
}

void append(std::vector<double>& out, const Vec3& v) {
    out.push_back(v.x);
    out.push_back(v.y);
    out.push_back(v.z);
}

}  // namespace

bool OnlineRegressor::online_update(const TraceBuffer& trace, long step) {
    if (trace.size() < static_cast<std::size_t>(spec_.window)) return false;
    if (last_update_ && step - *last_update_ < spec_.retrain_every) return false;
    retrain(trace);
    last_update_ = step;
    return true;
}

void OnlineRegressor::retrain(const TraceBuffer& trace) {
    const auto deltas = deltas_of(trace);
    const auto w = static_cast<std::size_t>(spec_.input_deltas);
    if (deltas.size() <= w) throw InvalidArgument("OnlineRegressor: trace too short to form a training window");
    Dataset data;
    for (std::size_t j = w; j < deltas.size(); ++j) {
        std::vector<double> x;
        for (std::size_t i = j - w; i < j; ++i) append(x, deltas[i]);
        const double target[3] = {deltas[j].x, deltas[j].y, deltas[j].z};
        data.add(x, target);
    }
    std::vector<int> dims{3 * spec_.input_deltas};
    dims.insert(dims.end(), spec_.hidden.begin(), spec_.hidden.end());
    dims.push_back(3);
    model_ = train(make_mlp(dims, OutputActivation::Identity), data, spec_.train).model;
}

std::vector<Vec3> OnlineRegressor::predict(const TraceBuffer& trace, int k) const {
    if (!model_) throw InvalidArgument("OnlineRegressor: not trained");
    if (k <= 0) return {};
    auto window = deltas_of(trace);
    const auto w = static_cast<std::size_t>(spec_.input_deltas);
    if (window.size() < w) throw InvalidArgument("OnlineRegressor: insufficient history");
    window.erase(window.begin(), window.end() - static_cast<std::ptrdiff_t>(w));
    Vec3 pos = trace.back().position;
    std::vector<Vec3> out;
    for (int j = 0; j < k; ++j) {
        std::vector<double> x;
        for (const Vec3& d : window) append(x, d);
        const auto y = forward(*model_, x);
        const Vec3 delta{y[0], y[1], y[2]};
        pos = pos + delta;
        out.push_back(pos);
        window.erase(window.begin());
        window.push_back(delta);
    }
    return out;
}

Predictor::Predictor(PredictorSpec spec) : spec_(std::move(spec)) {
    if (const auto* r = std::get_if<OnlineRegressorSpec>(&spec_)) regressor_.emplace(*r);
    if (predictor_horizon(spec_) < 1) throw ConfigError("predictor.horizon: must be at least 1");
}

void Predictor::observe(const TraceBuffer& trace, long step) {
    if (regressor_) regressor_->online_update(trace, step);
}

std::vector<Vec3> Predictor::predict(const TraceBuffer& trace, int k, double step_slots) const {
    if (trace.size() < 2) throw InvalidArgument("predict: need at least two trace entries");
    if (k <= 0) return {};
    if (regressor_ && regressor_->trained() &&
        trace.size() > static_cast<std::size_t>(regressor_->spec().input_deltas))
        return regressor_->predict(trace, k);
    return predict_linear(trace, k, step_slots);
}

void write_trajectory_csv(const std::filesystem::path& path, const std::vector<TrajectoryPoint>& points) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(fmt::format("{}: cannot open for writing", path.string()));
    out << "slot,x,y,z\n";
    for (const auto& p : points)
        out << fmt::format("{},{:.17g},{:.17g},{:.17g}\n", p.slot, p.position.x, p.position.y, p.position.z);
    if (!out) throw IoError(fmt::format("{}: write failed", path.string()));
}

std::vector<TrajectoryPoint> read_trajectory_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("{}: cannot open for reading", path.string()));
    std::string line;
    if (!std::getline(in, line) || line != "slot,x,y,z")
        throw DatasetError(fmt::format("{}: missing header slot,x,y,z", path.string()));
    std::vector<TrajectoryPoint> points;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        for (std::string v; std::getline(ss, v, ',');) f.push_back(v);
        if (f.size() != 4) throw DatasetError(fmt::format("{}:{}: expected 4 fields", path.string(), line_no));
        try {
            points.push_back({std::stol(f[0]), {std::stod(f[1]), std::stod(f[2]), std::stod(f[3])}});
        } catch (const std::exception& e) {
            throw DatasetError(fmt::format("{}:{}: {}", path.string(), line_no, e.what()));
        }
    }
    return points;
}

}  // namespace irsbm
