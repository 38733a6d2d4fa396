#include "irsbm/engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include <fmt/format.h>

#include "irsbm/classifier.hpp"
#include "irsbm/error.hpp"
#include "irsbm/fingerprint.hpp"
#include "irsbm/parallel.hpp"

namespace irsbm {

long ZoneCensus::count(const AccessPointId& access) const {
    for (const auto& [a, n] : counts)
        if (a == access) return n;
    return 0;
}

long ZoneCensus::total() const {
    long n = 0;
    for (const auto& entry : counts) n += entry.second;
    return n;
}

ZoneCensus zone_census(const Scenario& s, const LinkBudget& link, double resolution, unsigned threads) {
    const auto points = grid_points(s, resolution);
    std::vector<AccessPointId> labels(points.size(), AccessPointId::outage());
    parallel_for(points.size(), threads, [&](std::size_t i) { labels[i] = label_position(s, link, points[i]).label; });
    ZoneCensus census;
    auto keys = s.serving_points();
    keys.push_back(AccessPointId::outage());
    for (const auto& key : keys)
        census.counts.emplace_back(key, static_cast<long>(std::count(labels.begin(), labels.end(), key)));
    return census;
}

void check_zone_structure(const ZoneCensus& census, const Scenario& s) {
    for (const auto& access : s.serving_points())
        if (census.count(access) == 0)
            throw ConfigError(fmt::format("scenario: the {} zone is empty", access.to_string()));
}

Scenario build_study_case() {
    const SimConfig cfg = default_config();
    Scenario s = cfg.scenario();
    check_zone_structure(zone_census(s, cfg.link, cfg.grid_resolution), s);
    return s;
}

std::vector<Vec3> sample_user_positions(const Scenario& s, const LinkBudget& link, std::uint64_t seed, int count,
                                        unsigned threads) {
    if (count < 0) throw InvalidArgument("sample_user_positions: negative count");
    constexpr int kMaxAttempts = 100000;
    const Area& a = s.area();
    std::vector<Vec3> users(static_cast<std::size_t>(count));
    parallel_for(users.size(), threads, [&](std::size_t i) {
        Rng rng(mix_seed(seed, i));
        for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
            const double x = uniform(rng, a.x_min, a.x_max);
            const double y = uniform(rng, a.y_min, a.y_max);
            const Vec3 p{x, y, s.ue_height()};
            if (!label_position(s, link, p).label.is_outage()) {
                users[i] = p;
                return;
            }
        }
        throw ConfigError("scenario: no covered position found for user placement");
    });
    return users;
}

SimReport overhead_sweep(const SimConfig& cfg, const std::vector<std::string>& protocols,
                         const std::vector<int>& user_counts, const AccessClassifier* ml, unsigned threads) {
    const Scenario s = cfg.scenario();
    for (int n : user_counts)
        if (n < 0) throw InvalidArgument(fmt::format("user count {} is negative", n));
    for (const auto& p : protocols) {
        if (p != "exhaustive" && p != "hierarchical" && p != "ml")
            throw InvalidArgument(fmt::format("unknown protocol '{}'", p));
        if (p == "ml" && ml == nullptr) throw ConfigError("ml protocol requires a trained model");
    }

    const int max_users = user_counts.empty() ? 0 : *std::max_element(user_counts.begin(), user_counts.end());
    const auto users = sample_user_positions(s, cfg.link, derive_seed(cfg.seed, SeedStream::Placement), max_users,
                                             threads);

    SimReport report;
    report.seed = cfg.seed;
    report.config_json = config_to_json(cfg);
    for (const auto& protocol : protocols) {
        std::vector<long> cost(users.size());
        parallel_for(users.size(), threads, [&](std::size_t i) {
            if (protocol == "exhaustive")
                cost[i] = exhaustive_initial_access(s, cfg.link, cfg.frame, users[i]).slots_used;
            else if (protocol == "hierarchical")
                cost[i] = hierarchical_initial_access(s, cfg.link, cfg.frame, users[i], cfg.overhead.fanout).slots_used;
            else
                cost[i] = ml_initial_access(s, cfg.link, cfg.frame, *ml, users[i]).slots_used;
        });
        std::vector<long> prefix(cost.size() + 1, 0);
        std::partial_sum(cost.begin(), cost.end(), prefix.begin() + 1);
        for (int n : user_counts) {
            const long slots = prefix[static_cast<std::size_t>(n)];
            report.overhead.push_back({protocol, n, slots, cfg.frame.seconds(slots)});
        }
    }
    return report;
}

long tracking_total_slots(const SimConfig& cfg) {
    return std::llround(cfg.tracking.duration_s * 1e6 / cfg.frame.slot_us);
}

std::vector<Vec3> trajectory_positions(const SimConfig& cfg, long total_slots, std::vector<std::string>& warnings) {
    const long step = cfg.tracking.motion_step_slots;
    const long epochs = (total_slots + step - 1) / step;
    const double dt = cfg.frame.seconds(step);
    MobilityModel model(cfg.tracking.trajectory);
    MotionState state;
    if (const auto* wp = std::get_if<Waypoint>(&cfg.tracking.trajectory))
        state.position = wp->points.front();
    else
        state.position = cfg.tracking.start;

    std::vector<Vec3> positions;
    for (long e = 0; e < epochs; ++e) {
        if (!cfg.area.contains(state.position)) {
            warnings.push_back(fmt::format("trajectory leaves the area at slot {}; run truncated", e * step));
            break;
        }
        positions.push_back(state.position);
        state.slot_index = e * step;
        if (e + 1 < epochs) state = model.advance(state, dt);
    }
    return positions;
}

std::vector<HandoverEvent> label_transitions(const Scenario& s, const LinkBudget& link,
                                             const std::vector<Vec3>& positions, int step_slots) {
    std::vector<HandoverEvent> events;
    std::optional<AccessPointId> serving;
    for (std::size_t e = 0; e < positions.size(); ++e) {
        const AccessPointId label = label_position(s, link, positions[e]).label;
        if (label.is_outage()) continue;
        if (serving && *serving != label)
            events.push_back({static_cast<long>(e) * step_slots, *serving, label});
        serving = label;
    }
    return events;
}

namespace {

enum class SlotUse { Training, Handover };

// Slot bookkeeping shared by every scheme. Procedures start at motion-step
// boundaries; while one runs the lane is busy and scores SE 0.
class Lane {
public:
    Lane(std::string name, long total_slots) {
        trace_.scheme = std::move(name);
        trace_.se.assign(static_cast<std::size_t>(total_slots), 0.0);
    }

    bool busy_at(long slot) const { return slot < busy_until_; }

    void occupy(long slot, long slots, SlotUse use) {
        const long end = std::min<long>(slot + slots, static_cast<long>(trace_.se.size()));
        for (long t = slot; t < end; ++t) {
            if (use == SlotUse::Training)
                ++trace_.training_slots;
            else
                ++trace_.handover_slots;
        }
        busy_until_ = std::max(busy_until_, slot + slots);
    }

    // Scores the data slots of [begin, end) with a fixed SE.
    void serve(long begin, long end, double se) {
        for (long t = std::max(begin, busy_until_); t < end; ++t) {
            trace_.se[static_cast<std::size_t>(t)] = se;
            ++trace_.data_slots;
            if (se == 0.0) ++trace_.outage_slots;
        }
    }

    void handover(const HandoverEvent& event) { trace_.handovers.push_back(event); }

    SchemeTrace finish() {
        const double sum = std::accumulate(trace_.se.begin(), trace_.se.end(), 0.0);
        trace_.effective_se = trace_.se.empty() ? 0.0 : sum / static_cast<double>(trace_.se.size());
        return std::move(trace_);
    }

private:
    SchemeTrace trace_;
    long busy_until_ = 0;
};

struct TrackInputs {
    const Scenario& scenario;
    const SimConfig& cfg;
    const std::vector<Vec3>& positions;
    const std::vector<Vec3>& reported;
    long total_slots;
    long step;
};

long epoch_end(const TrackInputs& in, std::size_t e) {
    return std::min<long>(static_cast<long>(e + 1) * in.step, in.total_slots);
}

SchemeTrace run_genie(const TrackInputs& in) {
    Lane lane("genie", in.total_slots);
    std::optional<AccessPointId> serving;
    for (std::size_t e = 0; e < in.positions.size(); ++e) {
        const long slot = static_cast<long>(e) * in.step;
        const auto best = label_position(in.scenario, in.cfg.link, in.positions[e]);
        if (!best.label.is_outage()) {
            if (serving && *serving != best.label) lane.handover({slot, *serving, best.label});
            serving = best.label;
        }
        lane.serve(slot, epoch_end(in, e), best.se_bits_per_hz);
    }
    return lane.finish();
}

double data_se(const TrackInputs& in, const BMDecision& d, const Vec3& ue) {
    return se_bits(decision_snr_db(in.scenario, in.cfg.link, d, ue));
}

SchemeTrace run_mobility_aware(const TrackInputs& in, const AccessClassifier& classifier) {
    const auto& s = in.scenario;
    const auto& cfg = in.cfg;
    Lane lane("mobility_aware", in.total_slots);
    PredictorSpec spec = cfg.tracking.predictor;
    if (auto* r = std::get_if<OnlineRegressorSpec>(&spec)) r->train.seed = derive_seed(cfg.seed, SeedStream::Regressor);
    const int horizon = predictor_horizon(spec);
    const std::size_t capacity =
        std::holds_alternative<OnlineRegressorSpec>(spec) ? static_cast<std::size_t>(std::get<OnlineRegressorSpec>(spec).window)
                                                          : 10;
    Predictor predictor(std::move(spec));
    TraceBuffer trace(capacity);
    BMDecision current;

    for (std::size_t e = 0; e < in.positions.size(); ++e) {
        const long slot = static_cast<long>(e) * in.step;
        const Vec3& ue = in.positions[e];
        if (e == 0) {
            current = ml_initial_access(s, cfg.link, cfg.frame, classifier, in.reported[0], ue);
            lane.occupy(slot, current.slots_used, SlotUse::Training);
        } else if (!lane.busy_at(slot)) {
            // Reports arrive one motion step late: the trace ends at e - 1.
            predictor.observe(trace, static_cast<long>(e));
            const Vec3 predicted = trace.size() >= 2
                                       ? predictor.predict(trace, horizon, static_cast<double>(in.step)).front()
                                       : trace.back().position;
            TrackOutcome out = mobility_aware_track(s, cfg.link, cfg.frame, classifier, predicted, current, ue, slot);
            if (out.handover) lane.handover(*out.handover);
            lane.occupy(slot, out.decision.slots_used, out.handover ? SlotUse::Handover : SlotUse::Training);
            current = std::move(out.decision);
        }
        trace.push({in.reported[e], {}, slot});
        lane.serve(slot, epoch_end(in, e), data_se(in, current, ue));
    }
    return lane.finish();
}

SchemeTrace run_conventional(const TrackInputs& in) {
    const auto& s = in.scenario;
    const auto& cfg = in.cfg;
    Lane lane("conventional", in.total_slots);
    BMDecision current;
    for (std::size_t e = 0; e < in.positions.size(); ++e) {
        const long slot = static_cast<long>(e) * in.step;
        const Vec3& ue = in.positions[e];
        if (!lane.busy_at(slot)) {
            const AccessPointId before = current.access;
            long slots = 0;
            if (e > 0 && !current.access.is_outage()) {
                current = conventional_track(s, cfg.link, cfg.frame, current, ue);
                slots = current.slots_used;
            }
            if (current.access.is_outage()) {
                current = exhaustive_initial_access(s, cfg.link, cfg.frame, ue);
                slots += current.slots_used;
            }
            if (e > 0 && !before.is_outage() && !current.access.is_outage() && before != current.access)
                lane.handover({slot, before, current.access});
            lane.occupy(slot, slots, SlotUse::Training);
        }
        lane.serve(slot, epoch_end(in, e), data_se(in, current, ue));
    }
    return lane.finish();
}

}  // namespace

SimReport tracking_sim(const SimConfig& cfg, const std::vector<std::string>& schemes,
                       const AccessClassifier* classifier, unsigned threads, const std::vector<Vec3>* replay) {
    const Scenario s = cfg.scenario();
    for (const auto& name : schemes)
        if (name != "genie" && name != "mobility_aware" && name != "conventional")
            throw InvalidArgument(fmt::format("unknown scheme '{}'", name));

    const OracleAccessClassifier oracle(s, cfg.link);
    const AccessClassifier* chooser = cfg.tracking.classifier == "oracle" ? &oracle : classifier;
    const bool needs_classifier = std::find(schemes.begin(), schemes.end(), "mobility_aware") != schemes.end();
    if (needs_classifier && chooser == nullptr) throw ConfigError("mobility_aware scheme requires a trained model");

    SimReport report;
    report.seed = cfg.seed;
    report.config_json = config_to_json(cfg);
    long total = tracking_total_slots(cfg);
    std::vector<Vec3> positions;
    if (replay) {
        for (const Vec3& p : *replay) {
            if (!cfg.area.contains(p)) {
                report.warnings.push_back(fmt::format("trajectory leaves the area at slot {}; run truncated",
                                                      static_cast<long>(positions.size()) * cfg.tracking.motion_step_slots));
                break;
            }
            positions.push_back(p);
        }
    } else {
        positions = trajectory_positions(cfg, total, report.warnings);
    }
    const long step = cfg.tracking.motion_step_slots;
    positions.resize(std::min<std::size_t>(positions.size(), static_cast<std::size_t>((total + step - 1) / step)));
    total = std::min<long>(total, static_cast<long>(positions.size()) * step);
    report.total_slots = total;

    std::vector<Vec3> reported = positions;
    if (cfg.tracking.position_noise_std > 0.0) {
        Rng rng(derive_seed(cfg.seed, SeedStream::Tracking));
        const double sigma = cfg.tracking.position_noise_std;
        for (Vec3& p : reported) {
            p.x += sigma * standard_normal(rng);
            p.y += sigma * standard_normal(rng);
        }
    }

    const TrackInputs in{s, cfg, positions, reported, total, cfg.tracking.motion_step_slots};
    report.schemes.resize(schemes.size());
    if (positions.empty()) {
        for (std::size_t i = 0; i < schemes.size(); ++i) report.schemes[i].scheme = schemes[i];
        return report;
    }
    parallel_for(schemes.size(), threads, [&](std::size_t i) {
        if (schemes[i] == "genie")
            report.schemes[i] = run_genie(in);
        else if (schemes[i] == "mobility_aware")
            report.schemes[i] = run_mobility_aware(in, *chooser);
        else
            report.schemes[i] = run_conventional(in);
    });
    return report;
}

std::vector<Vec3> replay_positions(const std::vector<TrajectoryPoint>& points, int step_slots) {
    std::vector<Vec3> out;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (points[i].slot != static_cast<long>(i) * step_slots)
            throw DatasetError(fmt::format("trajectory row {}: slot {} is not {}", i + 1, points[i].slot,
                                           static_cast<long>(i) * step_slots));
        out.push_back(points[i].position);
    }
    return out;
}

std::vector<TrajectoryPoint> trajectory_points(const std::vector<Vec3>& positions, int step_slots) {
    std::vector<TrajectoryPoint> out;
    for (std::size_t i = 0; i < positions.size(); ++i) out.push_back({static_cast<long>(i) * step_slots, positions[i]});
    return out;
}

const SchemeTrace* SimReport::find_scheme(const std::string& name) const {
    for (const auto& t : schemes)
        if (t.scheme == name) return &t;
    return nullptr;
}

}  // namespace irsbm
