#pragma once

#include <optional>
#include <span>
#include <vector>

#include "irsbm/channel.hpp"
#include "irsbm/scenario.hpp"

namespace irsbm {

/// Slot accounting constants of the training pipeline.
struct FrameConfig {
    double slot_us = 100.0;
    /// Beam reporting is folded into the sweep by default.
    int report_slots = 0;
    /// Position report, aligned probe, acknowledgment.
    int ml_access_slots = 3;
    /// Conventional tracking probes prev +- track_window.
    int track_window = 2;
    int confirm_slots = 1;

    void validate() const;
    double seconds(long slots) const { return static_cast<double>(slots) * slot_us * 1e-6; }
};

/// Outcome of one training or tracking procedure.
struct BMDecision {
    AccessPointId access = AccessPointId::outage();
    Beam bs_beam;
    /// Present iff access is an IRS.
    std::optional<PhaseConfig> irs_phases;
    /// Level-0 IRS codebook index of the reflection pattern (nearest grid
    /// direction for geometrically steered patterns); -1 when not an IRS.
    int irs_beam_index = -1;
    long slots_used = 0;
    double achieved_se = 0.0;
};

struct HandoverEvent {
    long time_slot = 0;
    AccessPointId from = AccessPointId::outage();
    AccessPointId to = AccessPointId::outage();

    friend bool operator==(const HandoverEvent&, const HandoverEvent&) = default;
};

/// One probe of the sweep. IRS probes carry either explicit phases or a wide
/// sector beam evaluated with the flat-sector model.
struct Probe {
    AccessPointId access = AccessPointId::outage();
    Beam bs_beam;
    std::optional<PhaseConfig> irs_phases;
    std::optional<Beam> irs_sector;
    int irs_beam_index = -1;
};

/// Maps a (reported or predicted) position to a serving choice.
class AccessClassifier {
public:
    virtual ~AccessClassifier() = default;
    virtual AccessPointId predict(const Vec3& position) const = 0;
};

/// Noiseless received SNR (dB) of each probe at the UE; -inf when blocked.
/// Each probe costs one slot, accounted by the caller.
std::vector<double> measure(const Scenario& s, const LinkBudget& link, const Vec3& ue, std::span<const Probe> probes);

/// Index of the strongest probe (first on ties), or nullopt if all are -inf.
std::optional<std::size_t> strongest(std::span<const double> powers);

/// SNR of a decision's configuration evaluated at `ue`; -inf for Outage or a blocked link.
double decision_snr_db(const Scenario& s, const LinkBudget& link, const BMDecision& d, const Vec3& ue);

/// Probe aimed exactly at `target` through `access` (BS beam and optimal phases).
Probe steer_probe(const Scenario& s, const LinkBudget& link, const AccessPointId& access, const Vec3& target);

/// The full exhaustive probe list in sweep order: every level-0 direct beam,
/// then every IRS codebook entry per IRS in ascending id order.
std::vector<Probe> exhaustive_probes(const Scenario& s, const LinkBudget& link);

long exhaustive_slot_count(const Scenario& s, const FrameConfig& fc);
long hierarchical_slot_count(const Scenario& s, const FrameConfig& fc, int fanout);

BMDecision exhaustive_initial_access(const Scenario& s, const LinkBudget& link, const FrameConfig& fc,
                                     const Vec3& ue);

/// Tree search with `fanout` children per probed level; throws InvalidArgument
/// unless fanout is a power of two >= 2 whose log divides every codebook depth.
BMDecision hierarchical_initial_access(const Scenario& s, const LinkBudget& link, const FrameConfig& fc,
                                       const Vec3& ue, int fanout);

/// Classifier-driven access from a reported position, confirmed with one
/// probe at the true position. Falls back to exhaustive search when the
/// confirmation probe finds no link.
BMDecision ml_initial_access(const Scenario& s, const LinkBudget& link, const FrameConfig& fc,
                             const AccessClassifier& classifier, const Vec3& reported_pos, const Vec3& true_pos);

inline BMDecision ml_initial_access(const Scenario& s, const LinkBudget& link, const FrameConfig& fc,
                                    const AccessClassifier& classifier, const Vec3& reported_pos) {
    return ml_initial_access(s, link, fc, classifier, reported_pos, reported_pos);
}

/// Local sweep of 2*track_window+1 beams around the previous index within the
/// same serving point. Returns Outage when every probe is blocked.
BMDecision conventional_track(const Scenario& s, const LinkBudget& link, const FrameConfig& fc,
                              const BMDecision& prev, const Vec3& ue_now);

struct TrackOutcome {
    BMDecision decision;
    std::optional<HandoverEvent> handover;
};

/// Proactive switching: the serving point is the classifier's choice for the
/// predicted position and the beams are steered there. A change of serving
/// point emits a HandoverEvent stamped with `slot`.
TrackOutcome mobility_aware_track(const Scenario& s, const LinkBudget& link, const FrameConfig& fc,
                                  const AccessClassifier& classifier, const Vec3& predicted_pos,
                                  const BMDecision& current, const Vec3& ue_now, long slot);

}  // namespace irsbm
