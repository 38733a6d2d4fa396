#include "irsbm/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <numbers>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "irsbm/error.hpp"

namespace irsbm {

using nlohmann::json;

std::uint64_t derive_seed(std::uint64_t master, SeedStream stream) {
    return mix_seed(master, static_cast<std::uint64_t>(stream));
}

SimConfig default_config() {
    constexpr double pi = std::numbers::pi;
    SimConfig c;
    c.bs = BsSpec{{0.0, 50.0, 10.0}, 64, 0.0};
    c.irs = {
        IrsSpec{0, {50.0, 100.0, 5.0}, -pi / 2, 64},
        IrsSpec{1, {50.0, 0.0, 5.0}, pi / 2, 64},
        IrsSpec{2, {100.0, 75.0, 5.0}, pi, 64},
        IrsSpec{3, {100.0, 25.0, 5.0}, pi, 64},
    };
    c.obstacles = {
        Obstacle{{30.0, 62.0, 0.0}, {38.0, 72.0, 15.0}},
        Obstacle{{30.0, 28.0, 0.0}, {38.0, 38.0, 15.0}},
        Obstacle{{62.0, 84.0, 0.0}, {70.0, 100.0, 15.0}},
        Obstacle{{62.0, 0.0, 0.0}, {70.0, 16.0, 15.0}},
    };
    c.area = Area{0.0, 100.0, 0.0, 100.0};
    c.ue_height = 1.5;
    return c;
}

namespace {

std::string join_path(const std::string& base, const std::string& key) {
    return base.empty() ? key : base + "." + key;
}

void expect_object(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ConfigError(fmt::format("{}: expected an object", path.empty() ? "document" : path));
    for (const auto& item : j.items()) {
        const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* k) { return item.key() == k; });
        if (!known) throw ConfigError(fmt::format("{}: unknown key", join_path(path, item.key())));
    }
}

double number(const json& j, const std::string& path) {
    if (!j.is_number()) throw ConfigError(fmt::format("{}: expected a number", path));
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ConfigError(fmt::format("{}: non-finite value", path));
    return v;
}

int integer(const json& j, const std::string& path) {
    if (!j.is_number_integer()) throw ConfigError(fmt::format("{}: expected an integer", path));
    const auto v = j.get<std::int64_t>();
    if (v < -2147483647LL || v > 2147483647LL) throw ConfigError(fmt::format("{}: out of range", path));
    return static_cast<int>(v);
}

std::uint64_t unsigned_integer(const json& j, const std::string& path) {
    if (j.is_number_unsigned()) return j.get<std::uint64_t>();
    if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(j.get<std::int64_t>());
    throw ConfigError(fmt::format("{}: expected a nonnegative integer", path));
}

std::string text(const json& j, const std::string& path) {
    if (!j.is_string()) throw ConfigError(fmt::format("{}: expected a string", path));
    return j.get<std::string>();
}

Vec3 vec3(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 3) throw ConfigError(fmt::format("{}: expected [x, y, z]", path));
    return {number(j[0], path + "[0]"), number(j[1], path + "[1]"), number(j[2], path + "[2]")};
}

template <typename T, typename F>
std::vector<T> list(const json& j, const std::string& path, F&& item) {
    if (!j.is_array()) throw ConfigError(fmt::format("{}: expected an array", path));
    std::vector<T> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(item(j[i], fmt::format("{}[{}]", path, i)));
    return out;
}

template <typename F>
void optional_key(const json& obj, const char* key, const std::string& path, F&& apply) {
    if (const auto it = obj.find(key); it != obj.end()) apply(*it, join_path(path, key));
}

json to_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

MobilityModelSpec parse_trajectory(const json& j, const std::string& path) {
    if (!j.is_object() || !j.contains("type")) throw ConfigError(fmt::format("{}.type: missing", path));
    const std::string type = text(j["type"], path + ".type");
    if (type == "constant_velocity") {
        expect_object(j, path, {"type", "velocity"});
        ConstantVelocity cv;
        optional_key(j, "velocity", path, [&](const json& v, const std::string& p) { cv.velocity = vec3(v, p); });
        return cv;
    }
    if (type == "waypoint") {
        expect_object(j, path, {"type", "points", "speed"});
        Waypoint wp;
        optional_key(j, "points", path,
                     [&](const json& v, const std::string& p) { wp.points = list<Vec3>(v, p, vec3); });
        optional_key(j, "speed", path, [&](const json& v, const std::string& p) { wp.speed = number(v, p); });
        return wp;
    }
    if (type == "random_walk") {
        expect_object(j, path, {"type", "step_std", "seed"});
        RandomWalk rw;
        optional_key(j, "step_std", path, [&](const json& v, const std::string& p) { rw.step_std = number(v, p); });
        optional_key(j, "seed", path, [&](const json& v, const std::string& p) { rw.seed = unsigned_integer(v, p); });
        return rw;
    }
    throw ConfigError(fmt::format("{}.type: expected constant_velocity, waypoint or random_walk", path));
}

json trajectory_to_json(const MobilityModelSpec& spec) {
    if (const auto* cv = std::get_if<ConstantVelocity>(&spec))
        return {{"type", "constant_velocity"}, {"velocity", to_json(cv->velocity)}};
    if (const auto* wp = std::get_if<Waypoint>(&spec)) {
        json points = json::array();
        for (const Vec3& p : wp->points) points.push_back(to_json(p));
        return {{"type", "waypoint"}, {"points", points}, {"speed", wp->speed}};
    }
    const auto& rw = std::get<RandomWalk>(spec);
    return {{"type", "random_walk"}, {"step_std", rw.step_std}, {"seed", rw.seed}};
}

PredictorSpec parse_predictor(const json& j, const std::string& path) {
    if (!j.is_object() || !j.contains("type")) throw ConfigError(fmt::format("{}.type: missing", path));
    const std::string type = text(j["type"], path + ".type");
    if (type == "linear") {
        expect_object(j, path, {"type", "horizon"});
        LinearExtrapolation lin;
        optional_key(j, "horizon", path, [&](const json& v, const std::string& p) { lin.horizon = integer(v, p); });
        return lin;
    }
    if (type == "regressor") {
        expect_object(j, path,
                      {"type", "window", "horizon", "retrain_every", "input_deltas", "hidden", "learning_rate",
                       "epochs", "batch_size", "momentum"});
        OnlineRegressorSpec r;
        const auto int_field = [&](const char* key, int& out) {
            optional_key(j, key, path, [&](const json& v, const std::string& p) { out = integer(v, p); });
        };
        int_field("window", r.window);
        int_field("horizon", r.horizon);
        int_field("retrain_every", r.retrain_every);
        int_field("input_deltas", r.input_deltas);
        int_field("epochs", r.train.epochs);
        int_field("batch_size", r.train.batch_size);
        optional_key(j, "hidden", path,
                     [&](const json& v, const std::string& p) { r.hidden = list<int>(v, p, integer); });
        optional_key(j, "learning_rate", path,
                     [&](const json& v, const std::string& p) { r.train.learning_rate = number(v, p); });
        optional_key(j, "momentum", path,
                     [&](const json& v, const std::string& p) { r.train.momentum = number(v, p); });
        return r;
    }
    throw ConfigError(fmt::format("{}.type: expected linear or regressor", path));
}

json predictor_to_json(const PredictorSpec& spec) {
    if (const auto* lin = std::get_if<LinearExtrapolation>(&spec)) return {{"type", "linear"}, {"horizon", lin->horizon}};
    const auto& r = std::get<OnlineRegressorSpec>(spec);
    return {{"type", "regressor"},       {"window", r.window},
            {"horizon", r.horizon},      {"retrain_every", r.retrain_every},
            {"input_deltas", r.input_deltas}, {"hidden", r.hidden},
            {"learning_rate", r.train.learning_rate}, {"epochs", r.train.epochs},
            {"batch_size", r.train.batch_size}, {"momentum", r.train.momentum}};
}

void require(bool ok, const std::string& message) {
    if (!ok) throw ConfigError(message);
}

}  // namespace

SimConfig config_from_json(const std::string& document) {
    json doc;
    try {
        doc = json::parse(document);
    } catch (const json::exception& e) {
        throw ConfigError(fmt::format("document: {}", e.what()));
    }
    expect_object(doc, "",
                  {"seed", "bs", "irs", "obstacles", "area", "ue_height", "link", "frame", "grid", "training",
                   "overhead", "tracking"});
    SimConfig c = default_config();

    optional_key(doc, "seed", "", [&](const json& v, const std::string& p) { c.seed = unsigned_integer(v, p); });
    optional_key(doc, "bs", "", [&](const json& bs, const std::string& p) {
        expect_object(bs, p, {"position", "elements", "boresight_azimuth"});
        optional_key(bs, "position", p, [&](const json& v, const std::string& q) { c.bs.position = vec3(v, q); });
        optional_key(bs, "elements", p,
                     [&](const json& v, const std::string& q) { c.bs.array_elements = integer(v, q); });
        optional_key(bs, "boresight_azimuth", p,
                     [&](const json& v, const std::string& q) { c.bs.boresight_azimuth = number(v, q); });
    });
    optional_key(doc, "irs", "", [&](const json& arr, const std::string& p) {
        c.irs = list<IrsSpec>(arr, p, [](const json& j, const std::string& q) {
            expect_object(j, q, {"id", "position", "normal_azimuth", "elements"});
            for (const char* key : {"id", "position", "normal_azimuth"})
                if (!j.contains(key)) throw ConfigError(fmt::format("{}.{}: missing", q, key));
            IrsSpec irs;
            irs.id = integer(j["id"], q + ".id");
            irs.position = vec3(j["position"], q + ".position");
            irs.normal_azimuth = number(j["normal_azimuth"], q + ".normal_azimuth");
            optional_key(j, "elements", q, [&](const json& v, const std::string& r) { irs.elements = integer(v, r); });
            return irs;
        });
    });
    optional_key(doc, "obstacles", "", [&](const json& arr, const std::string& p) {
        c.obstacles = list<Obstacle>(arr, p, [](const json& j, const std::string& q) {
            expect_object(j, q, {"min", "max"});
            if (!j.contains("min") || !j.contains("max")) throw ConfigError(fmt::format("{}: needs min and max", q));
            return Obstacle{vec3(j["min"], q + ".min"), vec3(j["max"], q + ".max")};
        });
    });
    optional_key(doc, "area", "", [&](const json& a, const std::string& p) {
        expect_object(a, p, {"x_min", "x_max", "y_min", "y_max"});
        optional_key(a, "x_min", p, [&](const json& v, const std::string& q) { c.area.x_min = number(v, q); });
        optional_key(a, "x_max", p, [&](const json& v, const std::string& q) { c.area.x_max = number(v, q); });
        optional_key(a, "y_min", p, [&](const json& v, const std::string& q) { c.area.y_min = number(v, q); });
        optional_key(a, "y_max", p, [&](const json& v, const std::string& q) { c.area.y_max = number(v, q); });
    });
    optional_key(doc, "ue_height", "", [&](const json& v, const std::string& p) { c.ue_height = number(v, p); });
    optional_key(doc, "link", "", [&](const json& l, const std::string& p) {
        expect_object(l, p, {"tx_power_dbm", "noise_power_dbm", "carrier_ghz", "irs_element_gain_db"});
        optional_key(l, "tx_power_dbm", p, [&](const json& v, const std::string& q) { c.link.tx_power_dbm = number(v, q); });
        optional_key(l, "noise_power_dbm", p,
                     [&](const json& v, const std::string& q) { c.link.noise_power_dbm = number(v, q); });
        optional_key(l, "carrier_ghz", p, [&](const json& v, const std::string& q) { c.link.carrier_ghz = number(v, q); });
        optional_key(l, "irs_element_gain_db", p,
                     [&](const json& v, const std::string& q) { c.link.irs_element_gain_db = number(v, q); });
    });
    optional_key(doc, "frame", "", [&](const json& f, const std::string& p) {
        expect_object(f, p, {"slot_us", "report_slots", "ml_access_slots", "track_window", "confirm_slots"});
        optional_key(f, "slot_us", p, [&](const json& v, const std::string& q) { c.frame.slot_us = number(v, q); });
        optional_key(f, "report_slots", p,
                     [&](const json& v, const std::string& q) { c.frame.report_slots = integer(v, q); });
        optional_key(f, "ml_access_slots", p,
                     [&](const json& v, const std::string& q) { c.frame.ml_access_slots = integer(v, q); });
        optional_key(f, "track_window", p,
                     [&](const json& v, const std::string& q) { c.frame.track_window = integer(v, q); });
        optional_key(f, "confirm_slots", p,
                     [&](const json& v, const std::string& q) { c.frame.confirm_slots = integer(v, q); });
    });
    optional_key(doc, "grid", "", [&](const json& g, const std::string& p) {
        expect_object(g, p, {"resolution", "holdout_fraction"});
        optional_key(g, "resolution", p, [&](const json& v, const std::string& q) { c.grid_resolution = number(v, q); });
        optional_key(g, "holdout_fraction", p,
                     [&](const json& v, const std::string& q) { c.holdout_fraction = number(v, q); });
    });
    optional_key(doc, "training", "", [&](const json& t, const std::string& p) {
        expect_object(t, p, {"hidden", "learning_rate", "epochs", "batch_size", "momentum"});
        optional_key(t, "hidden", p,
                     [&](const json& v, const std::string& q) { c.classifier.hidden = list<int>(v, q, integer); });
        optional_key(t, "learning_rate", p,
                     [&](const json& v, const std::string& q) { c.classifier.learning_rate = number(v, q); });
        optional_key(t, "epochs", p, [&](const json& v, const std::string& q) { c.classifier.epochs = integer(v, q); });
        optional_key(t, "batch_size", p,
                     [&](const json& v, const std::string& q) { c.classifier.batch_size = integer(v, q); });
        optional_key(t, "momentum", p, [&](const json& v, const std::string& q) { c.classifier.momentum = number(v, q); });
    });
    optional_key(doc, "overhead", "", [&](const json& o, const std::string& p) {
        expect_object(o, p, {"protocols", "users", "fanout"});
        optional_key(o, "protocols", p,
                     [&](const json& v, const std::string& q) { c.overhead.protocols = list<std::string>(v, q, text); });
        optional_key(o, "users", p,
                     [&](const json& v, const std::string& q) { c.overhead.users = list<int>(v, q, integer); });
        optional_key(o, "fanout", p, [&](const json& v, const std::string& q) { c.overhead.fanout = integer(v, q); });
    });
    optional_key(doc, "tracking", "", [&](const json& t, const std::string& p) {
        expect_object(t, p,
                      {"schemes", "trajectory", "start", "duration_s", "predictor", "position_noise_std",
                       "motion_step_slots", "classifier"});
        optional_key(t, "schemes", p,
                     [&](const json& v, const std::string& q) { c.tracking.schemes = list<std::string>(v, q, text); });
        optional_key(t, "trajectory", p,
                     [&](const json& v, const std::string& q) { c.tracking.trajectory = parse_trajectory(v, q); });
        optional_key(t, "start", p, [&](const json& v, const std::string& q) { c.tracking.start = vec3(v, q); });
        optional_key(t, "duration_s", p,
                     [&](const json& v, const std::string& q) { c.tracking.duration_s = number(v, q); });
        optional_key(t, "predictor", p,
                     [&](const json& v, const std::string& q) { c.tracking.predictor = parse_predictor(v, q); });
        optional_key(t, "position_noise_std", p,
                     [&](const json& v, const std::string& q) { c.tracking.position_noise_std = number(v, q); });
        optional_key(t, "motion_step_slots", p,
                     [&](const json& v, const std::string& q) { c.tracking.motion_step_slots = integer(v, q); });
        optional_key(t, "classifier", p,
                     [&](const json& v, const std::string& q) { c.tracking.classifier = text(v, q); });
    });
    c.validate();
    return c;
}

SimConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("{}: cannot open for reading", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return config_from_json(ss.str());
    } catch (const ConfigError& e) {
        throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
    }
}

std::string config_to_json(const SimConfig& c) {
    json irs = json::array();
    for (const auto& i : c.irs)
        irs.push_back({{"id", i.id}, {"position", to_json(i.position)}, {"normal_azimuth", i.normal_azimuth},
                       {"elements", i.elements}});
    json obstacles = json::array();
    for (const auto& o : c.obstacles) obstacles.push_back({{"min", to_json(o.min_corner)}, {"max", to_json(o.max_corner)}});
    const json doc = {
        {"seed", c.seed},
        {"bs",
         {{"position", to_json(c.bs.position)},
          {"elements", c.bs.array_elements},
          {"boresight_azimuth", c.bs.boresight_azimuth}}},
        {"irs", irs},
        {"obstacles", obstacles},
        {"area", {{"x_min", c.area.x_min}, {"x_max", c.area.x_max}, {"y_min", c.area.y_min}, {"y_max", c.area.y_max}}},
        {"ue_height", c.ue_height},
        {"link",
         {{"tx_power_dbm", c.link.tx_power_dbm},
          {"noise_power_dbm", c.link.noise_power_dbm},
          {"carrier_ghz", c.link.carrier_ghz},
          {"irs_element_gain_db", c.link.irs_element_gain_db}}},
        {"frame",
         {{"slot_us", c.frame.slot_us},
          {"report_slots", c.frame.report_slots},
          {"ml_access_slots", c.frame.ml_access_slots},
          {"track_window", c.frame.track_window},
          {"confirm_slots", c.frame.confirm_slots}}},
        {"grid", {{"resolution", c.grid_resolution}, {"holdout_fraction", c.holdout_fraction}}},
        {"training",
         {{"hidden", c.classifier.hidden},
          {"learning_rate", c.classifier.learning_rate},
          {"epochs", c.classifier.epochs},
          {"batch_size", c.classifier.batch_size},
          {"momentum", c.classifier.momentum}}},
        {"overhead", {{"protocols", c.overhead.protocols}, {"users", c.overhead.users}, {"fanout", c.overhead.fanout}}},
        {"tracking",
         {{"schemes", c.tracking.schemes},
          {"trajectory", trajectory_to_json(c.tracking.trajectory)},
          {"start", to_json(c.tracking.start)},
          {"duration_s", c.tracking.duration_s},
          {"predictor", predictor_to_json(c.tracking.predictor)},
          {"position_noise_std", c.tracking.position_noise_std},
          {"motion_step_slots", c.tracking.motion_step_slots},
          {"classifier", c.tracking.classifier}}},
    };
    return doc.dump(2);
}

void SimConfig::validate() const {
    (void)scenario();
    link.validate();
    frame.validate();
    require(grid_resolution > 0.0, "grid.resolution: must be positive");
    require(holdout_fraction > 0.0 && holdout_fraction < 1.0, "grid.holdout_fraction: must lie in (0, 1)");
    require(!classifier.hidden.empty(), "training.hidden: need at least one hidden layer");
    for (int h : classifier.hidden) require(h > 0, "training.hidden: layer sizes must be positive");
    classifier_train_config().validate();

    for (const auto& p : overhead.protocols)
        require(p == "exhaustive" || p == "hierarchical" || p == "ml",
                fmt::format("overhead.protocols: unknown protocol '{}'", p));
    for (int n : overhead.users) require(n >= 0, "overhead.users: counts must be nonnegative");
    require(overhead.fanout >= 2 && is_power_of_two(overhead.fanout),
            "overhead.fanout: must be a power of two >= 2");

    for (const auto& s : tracking.schemes)
        require(s == "genie" || s == "mobility_aware" || s == "conventional",
                fmt::format("tracking.schemes: unknown scheme '{}'", s));
    validate_mobility(tracking.trajectory, area);
    if (!std::holds_alternative<Waypoint>(tracking.trajectory))
        require(tracking.start.finite() && area.contains(tracking.start), "tracking.start: outside the scenario area");
    require(tracking.duration_s > 0.0 && std::isfinite(tracking.duration_s), "tracking.duration_s: must be positive");
    require(tracking.motion_step_slots >= 1, "tracking.motion_step_slots: must be at least 1");
    require(tracking.position_noise_std >= 0.0, "tracking.position_noise_std: must be nonnegative");
    require(tracking.classifier == "model" || tracking.classifier == "oracle",
            "tracking.classifier: expected model or oracle");
    if (const auto* r = std::get_if<OnlineRegressorSpec>(&tracking.predictor)) r->validate();
    require(predictor_horizon(tracking.predictor) >= 1, "tracking.predictor.horizon: must be at least 1");
}

Scenario SimConfig::scenario() const { return Scenario(bs, irs, obstacles, area, ue_height); }

GridSpec SimConfig::grid() const {
    return GridSpec{grid_resolution, holdout_fraction, derive_seed(seed, SeedStream::Split)};
}

TrainConfig SimConfig::classifier_train_config() const {
    TrainConfig t;
    t.learning_rate = classifier.learning_rate;
    t.epochs = classifier.epochs;
    t.batch_size = classifier.batch_size;
    t.momentum = classifier.momentum;
    t.seed = derive_seed(seed, SeedStream::Classifier);
    return t;
}

}  // namespace irsbm
