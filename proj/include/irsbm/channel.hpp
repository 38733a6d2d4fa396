#pragma once

#include <complex>
#include <limits>
#include <vector>

#include "irsbm/scenario.hpp"

namespace irsbm {

/// Link-level constants shared by every SNR evaluation.
struct LinkBudget {
    double tx_power_dbm = 30.0;
    double noise_power_dbm = -84.0;
    double carrier_ghz = 28.0;
    /// Per-element reflection efficiency of the IRS (amplitude 10^(g/20)).
    double irs_element_gain_db = 0.0;

    double wavelength_m() const;
    /// Throws ConfigError unless tx > noise and the carrier is in [24, 100] GHz.
    void validate() const;
};

/// A codebook beam. `sin_azimuth` is the direction cosine along the array
/// axis (sine of the angle off boresight). Geometrically steered beams carry
/// an exact direction and the index of the nearest level-0 codebook entry.
struct Beam {
    int codebook_index = 0;
    double sin_azimuth = 0.0;
    int level = 0;
};

/// Per-element reflection phases in [0, 2pi); amplitudes are fixed at one.
struct PhaseConfig {
    std::vector<double> phases;
};

using ComplexVector = std::vector<std::complex<double>>;

inline constexpr double kNegInfDb = -std::numeric_limits<double>::infinity();

// --- array processing ----------------------------------------------------

/// Entry k = exp(i*pi*k*sin_az) / sqrt(n).
ComplexVector steering_vector(int n, double sin_az);

/// Level L holds n/2^L beams at sin = -1 + (2k+1)*2^L/n.
std::vector<Beam> dft_codebook(int n, int level);

int codebook_levels(int n);

/// Linear power gain of beam toward true_sin_az. Level 0 uses the exact
/// Dirichlet pattern; wider levels use the flat-sector model n/2^L.
double array_gain(int n, const Beam& beam, double true_sin_az);

/// Sector [lo, hi) of a level-L beam in sine space; the last sector is closed at +1.
bool in_beam_sector(int n, const Beam& beam, double true_sin_az);

/// Level-0 beam pointing exactly at sin_az, tagged with the nearest codebook index.
Beam steered_beam(int n, double sin_az);

int nearest_codebook_index(int n, double sin_az);

// --- geometry ------------------------------------------------------------

/// Direction cosine of `target` along the BS array axis.
double bs_sin_azimuth(const BsSpec& bs, const Vec3& target);

/// Direction cosine of `target` along the IRS aperture.
double irs_sin_departure(const IrsSpec& irs, const Vec3& target);

std::vector<Vec3> irs_element_positions(const IrsSpec& irs, double wavelength_m);

/// Free-space path loss 32.4 + 20log10(f_GHz) + 20log10(d_m).
double fspl_db(double d_m, double f_ghz);

// --- IRS phase control ---------------------------------------------------

/// Phases that make every element's two-hop contribution add coherently at ue.
PhaseConfig irs_optimal_phases(const Vec3& bs_pos, const IrsSpec& irs, const Vec3& ue_pos, double f_ghz);

/// Far-field reflection pattern toward departure cosine sin_departure,
/// compensating the exact BS-to-element distances.
PhaseConfig irs_directional_phases(const Vec3& bs_pos, const IrsSpec& irs, double sin_departure,
                                   double f_ghz);

/// One directional configuration per level-0 grid direction of the IRS.
std::vector<PhaseConfig> irs_codebook(const Vec3& bs_pos, const IrsSpec& irs, double f_ghz);

/// |sum_m exp(i(phi_m + psi_m))| where psi_m is the geometric two-hop phase.
double irs_array_factor(const Vec3& bs_pos, const IrsSpec& irs, const PhaseConfig& phases,
                        const Vec3& ue_pos, double f_ghz);

// --- SNR -----------------------------------------------------------------

/// Two-hop BS -> IRS -> UE SNR. Throws BlockedLinkError if a hop is obstructed.
double cascaded_snr_db(const Scenario& s, const LinkBudget& link, const IrsSpec& irs, const PhaseConfig& phases,
                       const Beam& bs_beam, const Vec3& ue);

/// Cascaded SNR under the flat-sector model for a wide IRS beam (level > 0).
double cascaded_sector_snr_db(const Scenario& s, const LinkBudget& link, const IrsSpec& irs,
                              const Beam& irs_beam, const Beam& bs_beam, const Vec3& ue);

/// One-hop BS -> UE SNR. Throws BlockedLinkError if obstructed.
double direct_snr_db(const Scenario& s, const LinkBudget& link, const Beam& bs_beam, const Vec3& ue);

/// log2(1 + 10^(snr/10)); -inf maps to 0.
double se_bits(double snr_db);

/// BS beam aimed exactly at an IRS (the deployment geometry is known).
Beam bs_beam_toward(const BsSpec& bs, const Vec3& target);

/// SNR with perfect alignment (exact beams, optimal phases) for one serving
/// choice; -inf when unreachable.
double aligned_snr_db(const Scenario& s, const LinkBudget& link, const AccessPointId& access, const Vec3& ue);

}  // namespace irsbm
