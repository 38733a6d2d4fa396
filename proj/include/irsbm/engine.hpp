#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "irsbm/config.hpp"
#include "irsbm/protocols.hpp"

namespace irsbm {

/// Number of grid points served by each access point, Direct first, then
/// IRSs by id, then Outage last.
struct ZoneCensus {
    std::vector<std::pair<AccessPointId, long>> counts;

    long count(const AccessPointId& access) const;
    long total() const;
};

ZoneCensus zone_census(const Scenario& s, const LinkBudget& link, double resolution, unsigned threads = 1);

/// Throws ConfigError unless the direct zone and every IRS zone are nonempty.
void check_zone_structure(const ZoneCensus& census, const Scenario& s);

/// The default layout as a Scenario, after checking its five-zone structure.
Scenario build_study_case();

/// Seeded non-outage positions; user i depends only on (seed, i), so any
/// prefix of a longer draw equals the shorter draw.
std::vector<Vec3> sample_user_positions(const Scenario& s, const LinkBudget& link, std::uint64_t seed, int count,
                                        unsigned threads = 1);

struct OverheadRow {
    std::string protocol;
    int users = 0;
    long slots = 0;
    double total_seconds = 0.0;

    friend bool operator==(const OverheadRow&, const OverheadRow&) = default;
};

/// Per-slot record of one tracking scheme. Slots spent on beam training or
/// handover signalling carry SE 0; outage slots are data slots with SE 0.
struct SchemeTrace {
    std::string scheme;
    std::vector<double> se;
    long data_slots = 0;
    long training_slots = 0;
    long handover_slots = 0;
    long outage_slots = 0;
    /// Mean of `se` over every simulated slot.
    double effective_se = 0.0;
    std::vector<HandoverEvent> handovers;

    friend bool operator==(const SchemeTrace&, const SchemeTrace&) = default;
};

struct SimReport {
    std::uint64_t seed = 0;
    /// Canonical JSON of the configuration that produced the report.
    std::string config_json;
    std::vector<OverheadRow> overhead;
    long total_slots = 0;
    std::vector<SchemeTrace> schemes;
    std::vector<std::string> warnings;

    const SchemeTrace* find_scheme(const std::string& name) const;

    friend bool operator==(const SimReport&, const SimReport&) = default;
};

/// Initial-access overhead for every protocol and user count. `ml` is
/// required when the "ml" protocol is requested.
SimReport overhead_sweep(const SimConfig& cfg, const std::vector<std::string>& protocols,
                         const std::vector<int>& user_counts, const AccessClassifier* ml, unsigned threads = 1);

/// UE positions at every motion step of the configured trajectory, starting
/// at slot 0. Stops before the first position outside the area and reports
/// it through `warnings`.
std::vector<Vec3> trajectory_positions(const SimConfig& cfg, long total_slots, std::vector<std::string>& warnings);

long tracking_total_slots(const SimConfig& cfg);

/// Zone changes of the brute-force best server along the motion steps,
/// skipping over outage stretches.
std::vector<HandoverEvent> label_transitions(const Scenario& s, const LinkBudget& link,
                                             const std::vector<Vec3>& positions, int step_slots);

/// Slot-level tracking comparison on one shared trajectory. `classifier`
/// serves the mobility-aware scheme unless the configuration selects the
/// oracle classifier. `replay`, when given, replaces the configured
/// trajectory with recorded positions (one per motion step from slot 0).
SimReport tracking_sim(const SimConfig& cfg, const std::vector<std::string>& schemes,
                       const AccessClassifier* classifier, unsigned threads = 1,
                       const std::vector<Vec3>* replay = nullptr);

/// Positions of a recorded trajectory; throws DatasetError unless its slots
/// are 0, step, 2 * step, ...
std::vector<Vec3> replay_positions(const std::vector<TrajectoryPoint>& points, int step_slots);
std::vector<TrajectoryPoint> trajectory_points(const std::vector<Vec3>& positions, int step_slots);

}  // namespace irsbm
