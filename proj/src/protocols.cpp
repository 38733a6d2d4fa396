#include "irsbm/protocols.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include <fmt/format.h>

#include "irsbm/error.hpp"

namespace irsbm {

void FrameConfig::validate() const {
    if (!(slot_us > 0.0) || !std::isfinite(slot_us)) throw ConfigError("frame.slot_us: must be positive");
    if (report_slots < 0 || ml_access_slots < 0 || track_window < 0 || confirm_slots < 0)
        throw ConfigError("frame: slot counts must be nonnegative");
}

std::vector<double> measure(const Scenario& s, const LinkBudget& link, const Vec3& ue, std::span<const Probe> probes) {
    std::vector<double> powers;
    powers.reserve(probes.size());
    for (const Probe& p : probes) {
        if (!reachable(s, p.access, ue)) {
            powers.push_back(kNegInfDb);
        } else if (p.access.is_direct()) {
            powers.push_back(direct_snr_db(s, link, p.bs_beam, ue));
        } else {
            const IrsSpec& irs = s.irs(p.access.irs_id());
            if (p.irs_phases)
                powers.push_back(cascaded_snr_db(s, link, irs, *p.irs_phases, p.bs_beam, ue));
            else if (p.irs_sector)
                powers.push_back(cascaded_sector_snr_db(s, link, irs, *p.irs_sector, p.bs_beam, ue));
            else
                throw InvalidArgument(fmt::format("probe through irs{} carries no reflection setting", irs.id));
        }
    }
    return powers;
}

std::optional<std::size_t> strongest(std::span<const double> powers) {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < powers.size(); ++i) {
        if (powers[i] == kNegInfDb || std::isnan(powers[i])) continue;
        if (!best || powers[i] > powers[*best]) best = i;
    }
    return best;
}

double decision_snr_db(const Scenario& s, const LinkBudget& link, const BMDecision& d, const Vec3& ue) {
    if (d.access.is_outage() || !reachable(s, d.access, ue)) return kNegInfDb;
    if (d.access.is_direct()) return direct_snr_db(s, link, d.bs_beam, ue);
    return cascaded_snr_db(s, link, s.irs(d.access.irs_id()), d.irs_phases.value(), d.bs_beam, ue);
}

namespace {

BMDecision decision_from(const Scenario& s, const LinkBudget& link, const Probe& p, const Vec3& ue, long slots) {
    BMDecision d;
    d.access = p.access;
    d.bs_beam = p.bs_beam;
    d.irs_phases = p.irs_phases;
    d.irs_beam_index = p.irs_beam_index;
    d.slots_used = slots;
    d.achieved_se = se_bits(decision_snr_db(s, link, d, ue));
    return d;
}

BMDecision outage_decision(long slots) {
    BMDecision d;
    d.slots_used = slots;
    return d;
}

Probe irs_codebook_probe(const Scenario& s, const LinkBudget& link, const IrsSpec& irs, int index) {
    const Beam grid = dft_codebook(irs.elements, 0)[static_cast<std::size_t>(index)];
    Probe p;
    p.access = AccessPointId::irs(irs.id);
    p.bs_beam = bs_beam_toward(s.bs(), irs.position);
    p.irs_phases = irs_directional_phases(s.bs().position, irs, grid.sin_azimuth, link.carrier_ghz);
    p.irs_beam_index = index;
    return p;
}

int validated_depth(int elements, int fanout_bits, const char* what) {
    const int levels = codebook_levels(elements);
    if (levels % fanout_bits != 0)
        throw InvalidArgument(fmt::format("fanout 2^{} does not divide the {}-level {} codebook", fanout_bits,
                                          levels, what));
    return levels / fanout_bits;
}

int fanout_bits_of(int fanout) {
    if (fanout < 2 || !is_power_of_two(fanout))
        throw InvalidArgument(fmt::format("fanout {} must be a power of two >= 2", fanout));
    return std::countr_zero(static_cast<unsigned>(fanout));
}

struct StageResult {
    Probe probe;
    double power = kNegInfDb;
    long slots = 0;
};

// Descends one codebook tree. make_probe(level, index) builds the probe for a
// node; the search keeps the strongest child at every level.
template <typename MakeProbe>
StageResult descend(const Scenario& s, const LinkBudget& link, const Vec3& ue, int elements, int fanout,
                    MakeProbe&& make_probe) {
    const int bits = fanout_bits_of(fanout);
    const int top = codebook_levels(elements);
    StageResult result;
    int parent = 0;
    for (int level = top - bits; level >= 0; level -= bits) {
        std::vector<Probe> probes;
        for (int c = 0; c < fanout; ++c) probes.push_back(make_probe(level, parent * fanout + c));
        const auto powers = measure(s, link, ue, probes);
        result.slots += fanout;
        const std::size_t pick = strongest(powers).value_or(0);
        parent = parent * fanout + static_cast<int>(pick);
        result.probe = probes[pick];
        result.power = powers[pick];
    }
    return result;
}

}  // namespace

Probe steer_probe(const Scenario& s, const LinkBudget& link, const AccessPointId& access, const Vec3& target) {
    Probe p;
    p.access = access;
    if (access.is_direct()) {
        p.bs_beam = bs_beam_toward(s.bs(), target);
    } else if (access.is_irs()) {
        const IrsSpec& irs = s.irs(access.irs_id());
        p.bs_beam = bs_beam_toward(s.bs(), irs.position);
        p.irs_phases = irs_optimal_phases(s.bs().position, irs, target, link.carrier_ghz);
        p.irs_beam_index = nearest_codebook_index(irs.elements, irs_sin_departure(irs, target));
    }
    return p;
}

std::vector<Probe> exhaustive_probes(const Scenario& s, const LinkBudget& link) {
    std::vector<Probe> probes;
    for (const Beam& b : dft_codebook(s.bs().array_elements, 0)) probes.push_back({AccessPointId::direct(), b, {}, {}, -1});
    for (const IrsSpec& irs : s.irss()) {
        const Beam to_irs = bs_beam_toward(s.bs(), irs.position);
        const auto book = irs_codebook(s.bs().position, irs, link.carrier_ghz);
        for (std::size_t k = 0; k < book.size(); ++k)
            probes.push_back({AccessPointId::irs(irs.id), to_irs, book[k], {}, static_cast<int>(k)});
    }
    return probes;
}

long exhaustive_slot_count(const Scenario& s, const FrameConfig& fc) {
    long slots = s.bs().array_elements + fc.report_slots;
    for (const IrsSpec& irs : s.irss()) slots += irs.elements;
    return slots;
}

long hierarchical_slot_count(const Scenario& s, const FrameConfig& fc, int fanout) {
    const int bits = fanout_bits_of(fanout);
    long slots = static_cast<long>(fanout) * validated_depth(s.bs().array_elements, bits, "BS") + fc.report_slots;
    for (const IrsSpec& irs : s.irss())
        slots += static_cast<long>(fanout) * validated_depth(irs.elements, bits, "IRS");
    return slots;
}

BMDecision exhaustive_initial_access(const Scenario& s, const LinkBudget& link, const FrameConfig& fc,
                                     const Vec3& ue) {
    const auto probes = exhaustive_probes(s, link);
    const auto powers = measure(s, link, ue, probes);
    const long slots = static_cast<long>(probes.size()) + fc.report_slots;
    const auto best = strongest(powers);
    if (!best) return outage_decision(slots);
    return decision_from(s, link, probes[*best], ue, slots);
}

BMDecision hierarchical_initial_access(const Scenario& s, const LinkBudget& link, const FrameConfig& fc,
                                       const Vec3& ue, int fanout) {
    // Validates the fanout against every codebook before any probing.
    const long total_slots = hierarchical_slot_count(s, fc, fanout);

    std::vector<StageResult> stages;
    const int n_bs = s.bs().array_elements;
    stages.push_back(descend(s, link, ue, n_bs, fanout, [&](int level, int index) {
        Probe p;
        p.access = AccessPointId::direct();
        p.bs_beam = dft_codebook(n_bs, level)[static_cast<std::size_t>(index)];
        return p;
    }));
    for (const IrsSpec& irs : s.irss()) {
        const Beam to_irs = bs_beam_toward(s.bs(), irs.position);
        stages.push_back(descend(s, link, ue, irs.elements, fanout, [&](int level, int index) {
            if (level == 0) return irs_codebook_probe(s, link, irs, index);
            Probe p;
            p.access = AccessPointId::irs(irs.id);
            p.bs_beam = to_irs;
            p.irs_sector = dft_codebook(irs.elements, level)[static_cast<std::size_t>(index)];
            return p;
        }));
    }

    std::vector<double> finals;
    for (const auto& st : stages) finals.push_back(st.power);
    const auto best = strongest(finals);
    if (!best) return outage_decision(total_slots);
    return decision_from(s, link, stages[*best].probe, ue, total_slots);
}

BMDecision ml_initial_access(const Scenario& s, const LinkBudget& link, const FrameConfig& fc,
                             const AccessClassifier& classifier, const Vec3& reported_pos, const Vec3& true_pos) {
    const AccessPointId predicted = classifier.predict(reported_pos);
    if (!predicted.is_outage()) {
        const Probe probe = steer_probe(s, link, predicted, reported_pos);
        const double power = measure(s, link, true_pos, std::span<const Probe>(&probe, 1)).front();
        if (power != kNegInfDb) return decision_from(s, link, probe, true_pos, fc.ml_access_slots);
    }
    BMDecision fallback = exhaustive_initial_access(s, link, fc, true_pos);
    fallback.slots_used += fc.ml_access_slots;
    return fallback;
}

BMDecision conventional_track(const Scenario& s, const LinkBudget& link, const FrameConfig& fc,
                              const BMDecision& prev, const Vec3& ue_now) {
    if (prev.access.is_outage()) throw InvalidArgument("conventional_track: previous decision is an outage");

    const bool direct = prev.access.is_direct();
    const IrsSpec* irs = direct ? nullptr : &s.irs(prev.access.irs_id());
    const int n = direct ? s.bs().array_elements : irs->elements;
    const int centre = direct ? prev.bs_beam.codebook_index : prev.irs_beam_index;
    const int count = std::min(n, 2 * fc.track_window + 1);
    const int first = std::clamp(centre - fc.track_window, 0, n - count);

    std::vector<Probe> probes;
    const auto grid = dft_codebook(direct ? s.bs().array_elements : irs->elements, 0);
    for (int k = first; k < first + count; ++k) {
        if (direct)
            probes.push_back({AccessPointId::direct(), grid[static_cast<std::size_t>(k)], {}, {}, -1});
        else
            probes.push_back(irs_codebook_probe(s, link, *irs, k));
    }
    const auto powers = measure(s, link, ue_now, probes);
    const auto best = strongest(powers);
    if (!best) return outage_decision(count);
    return decision_from(s, link, probes[*best], ue_now, count);
}

TrackOutcome mobility_aware_track(const Scenario& s, const LinkBudget& link, const FrameConfig& fc,
                                  const AccessClassifier& classifier, const Vec3& predicted_pos,
                                  const BMDecision& current, const Vec3& ue_now, long slot) {
    TrackOutcome out;
    const AccessPointId predicted = classifier.predict(predicted_pos);
    if (!current.access.is_outage() && !predicted.is_outage() && predicted != current.access)
        out.handover = HandoverEvent{slot, current.access, predicted};

    if (!predicted.is_outage()) {
        const Probe probe = steer_probe(s, link, predicted, predicted_pos);
        const double power = measure(s, link, ue_now, std::span<const Probe>(&probe, 1)).front();
        if (power != kNegInfDb) {
            out.decision = decision_from(s, link, probe, ue_now, fc.confirm_slots);
            return out;
        }
    }
    out.decision = exhaustive_initial_access(s, link, fc, ue_now);
    out.decision.slots_used += fc.confirm_slots;
    return out;
}

}  // namespace irsbm
