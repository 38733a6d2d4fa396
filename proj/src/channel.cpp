#include "irsbm/channel.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "irsbm/error.hpp"

namespace irsbm {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kSpeedOfLight = 299792458.0;

double wrap_phase(double phase) {
    double w = std::fmod(phase, kTwoPi);
    if (w < 0.0) w += kTwoPi;
    if (w >= kTwoPi) w = 0.0;
    return w;
}

Vec3 array_axis(double facing_azimuth) {
    return {-std::sin(facing_azimuth), std::cos(facing_azimuth), 0.0};
}

double direction_cosine(const Vec3& origin, double facing_azimuth, const Vec3& target) {
    const Vec3 d = target - origin;
    const double len = d.norm();
    if (len == 0.0) return 0.0;
    return std::clamp(array_axis(facing_azimuth).dot(d) / len, -1.0, 1.0);
}

double wavenumber(double f_ghz) { return kTwoPi * f_ghz * 1e9 / kSpeedOfLight; }

double to_db(double linear) { return linear > 0.0 ? 10.0 * std::log10(linear) : kNegInfDb; }

void require_two_hops(const Scenario& s, const IrsSpec& irs, const Vec3& ue) {
    if (!reachable(s, AccessPointId::irs(irs.id), ue))
        throw BlockedLinkError(fmt::format("irs{}: cascaded link to ({}, {}, {}) is obstructed", irs.id, ue.x,
                                           ue.y, ue.z));
}

double cascaded_common_db(const Scenario& s, const LinkBudget& link, const IrsSpec& irs, const Beam& bs_beam) {
    const int n_bs = s.bs().array_elements;
    const double bs_gain = array_gain(n_bs, bs_beam, bs_sin_azimuth(s.bs(), irs.position));
    return link.tx_power_dbm - fspl_db(distance(s.bs().position, irs.position), link.carrier_ghz) +
           to_db(bs_gain) + link.irs_element_gain_db - link.noise_power_dbm;
}

}  // namespace

double LinkBudget::wavelength_m() const { return kSpeedOfLight / (carrier_ghz * 1e9); }

void LinkBudget::validate() const {
    if (!(std::isfinite(tx_power_dbm) && std::isfinite(noise_power_dbm) && std::isfinite(irs_element_gain_db)))
        throw ConfigError("link: non-finite value");
    if (!(tx_power_dbm > noise_power_dbm)) throw ConfigError("link.tx_power_dbm: must exceed noise_power_dbm");
    if (!(carrier_ghz >= 24.0 && carrier_ghz <= 100.0))
        throw ConfigError("link.carrier_ghz: must lie in [24, 100]");
}

ComplexVector steering_vector(int n, double sin_az) {
    if (n < 1) throw InvalidArgument("steering_vector: n must be positive");
    if (!(std::abs(sin_az) <= 1.0)) throw InvalidArgument("steering_vector: |sin_az| must not exceed 1");
    ComplexVector a(static_cast<std::size_t>(n));
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (int k = 0; k < n; ++k) a[k] = std::polar(scale, kPi * k * sin_az);
    return a;
}

int codebook_levels(int n) {
    if (!is_power_of_two(n)) throw InvalidArgument(fmt::format("codebook size {} is not a power of two", n));
    return std::countr_zero(static_cast<unsigned>(n));
}

std::vector<Beam> dft_codebook(int n, int level) {
    const int levels = codebook_levels(n);
    if (level < 0 || level > levels)
        throw InvalidArgument(fmt::format("dft_codebook: level {} outside [0, {}]", level, levels));
    const int span = 1 << level;
    const int count = n / span;
    std::vector<Beam> beams;
    beams.reserve(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k)
        beams.push_back({k, -1.0 + static_cast<double>((2 * k + 1) * span) / n, level});
    return beams;
}

bool in_beam_sector(int n, const Beam& beam, double true_sin_az) {
    const double width = 2.0 * static_cast<double>(1 << beam.level) / n;
    const double lo = -1.0 + beam.codebook_index * width;
    const double hi = lo + width;
    const bool last = (beam.codebook_index + 1) * (1 << beam.level) >= n;
    return true_sin_az >= lo && (true_sin_az < hi || (last && true_sin_az <= 1.0));
}

double array_gain(int n, const Beam& beam, double true_sin_az) {
    if (beam.level > 0)
        return in_beam_sector(n, beam, true_sin_az) ? static_cast<double>(n) / (1 << beam.level) : 0.0;
    const double delta = beam.sin_azimuth - true_sin_az;
    // Exact nulls of the pattern (another grid direction) are zero, not rounding noise.
    const double bins = n * delta / 2.0;
    const double nearest = std::round(bins);
    if (std::abs(bins - nearest) < 1e-9 && std::fmod(nearest, n) != 0.0) return 0.0;
    std::complex<double> sum{0.0, 0.0};
    for (int k = 0; k < n; ++k) sum += std::polar(1.0, kPi * k * delta);
    return std::norm(sum) / n;
}

int nearest_codebook_index(int n, double sin_az) {
    const int k = static_cast<int>(std::floor((sin_az + 1.0) * n / 2.0));
    return std::clamp(k, 0, n - 1);
}

Beam steered_beam(int n, double sin_az) { return {nearest_codebook_index(n, sin_az), sin_az, 0}; }

double bs_sin_azimuth(const BsSpec& bs, const Vec3& target) {
    return direction_cosine(bs.position, bs.boresight_azimuth, target);
}

double irs_sin_departure(const IrsSpec& irs, const Vec3& target) {
    return direction_cosine(irs.position, irs.normal_azimuth, target);
}

std::vector<Vec3> irs_element_positions(const IrsSpec& irs, double wavelength_m) {
    const Vec3 axis = array_axis(irs.normal_azimuth);
    const double centre = (irs.elements - 1) / 2.0;
    std::vector<Vec3> out;
    out.reserve(static_cast<std::size_t>(irs.elements));
    for (int m = 0; m < irs.elements; ++m) out.push_back(irs.position + ((m - centre) * wavelength_m / 2.0) * axis);
    return out;
}

double fspl_db(double d_m, double f_ghz) {
    if (!(d_m > 0.0)) throw InvalidArgument("fspl_db: distance must be positive");
    return 32.4 + 20.0 * std::log10(f_ghz) + 20.0 * std::log10(d_m);
}

PhaseConfig irs_optimal_phases(const Vec3& bs_pos, const IrsSpec& irs, const Vec3& ue_pos, double f_ghz) {
    const double k = wavenumber(f_ghz);
    PhaseConfig config;
    config.phases.reserve(static_cast<std::size_t>(irs.elements));
    for (const Vec3& e : irs_element_positions(irs, kSpeedOfLight / (f_ghz * 1e9)))
        config.phases.push_back(wrap_phase(-k * (distance(bs_pos, e) + distance(e, ue_pos))));
    return config;
}

PhaseConfig irs_directional_phases(const Vec3& bs_pos, const IrsSpec& irs, double sin_departure, double f_ghz) {
    const double k = wavenumber(f_ghz);
    const double centre = (irs.elements - 1) / 2.0;
    const auto elements = irs_element_positions(irs, kSpeedOfLight / (f_ghz * 1e9));
    PhaseConfig config;
    config.phases.reserve(elements.size());
    for (std::size_t m = 0; m < elements.size(); ++m)
        config.phases.push_back(
            wrap_phase(-k * distance(bs_pos, elements[m]) + kPi * (static_cast<double>(m) - centre) * sin_departure));
    return config;
}

std::vector<PhaseConfig> irs_codebook(const Vec3& bs_pos, const IrsSpec& irs, double f_ghz) {
    std::vector<PhaseConfig> book;
    for (const Beam& b : dft_codebook(irs.elements, 0))
        book.push_back(irs_directional_phases(bs_pos, irs, b.sin_azimuth, f_ghz));
    return book;
}

double irs_array_factor(const Vec3& bs_pos, const IrsSpec& irs, const PhaseConfig& phases, const Vec3& ue_pos,
                        double f_ghz) {
    if (phases.phases.size() != static_cast<std::size_t>(irs.elements))
        throw InvalidArgument(fmt::format("irs{}: phase config has {} entries, expected {}", irs.id,
                                          phases.phases.size(), irs.elements));
    const double k = wavenumber(f_ghz);
    const auto elements = irs_element_positions(irs, kSpeedOfLight / (f_ghz * 1e9));
    std::complex<double> sum{0.0, 0.0};
    for (std::size_t m = 0; m < elements.size(); ++m) {
        const double psi = k * (distance(bs_pos, elements[m]) + distance(elements[m], ue_pos));
        sum += std::polar(1.0, phases.phases[m] + psi);
    }
    return std::abs(sum);
}

double cascaded_snr_db(const Scenario& s, const LinkBudget& link, const IrsSpec& irs, const PhaseConfig& phases,
                       const Beam& bs_beam, const Vec3& ue) {
    require_two_hops(s, irs, ue);
    const double af = irs_array_factor(s.bs().position, irs, phases, ue, link.carrier_ghz);
    return cascaded_common_db(s, link, irs, bs_beam) - fspl_db(distance(irs.position, ue), link.carrier_ghz) +
           to_db(af * af);
}

double cascaded_sector_snr_db(const Scenario& s, const LinkBudget& link, const IrsSpec& irs, const Beam& irs_beam,
                              const Beam& bs_beam, const Vec3& ue) {
    require_two_hops(s, irs, ue);
    const double n = irs.elements;
    const double power = in_beam_sector(irs.elements, irs_beam, irs_sin_departure(irs, ue))
                             ? n * n / static_cast<double>(1 << irs_beam.level)
                             : 0.0;
    return cascaded_common_db(s, link, irs, bs_beam) - fspl_db(distance(irs.position, ue), link.carrier_ghz) +
           to_db(power);
}

double direct_snr_db(const Scenario& s, const LinkBudget& link, const Beam& bs_beam, const Vec3& ue) {
    if (los_blocked(s.bs().position, ue, s.obstacles()))
        throw BlockedLinkError(fmt::format("direct link to ({}, {}, {}) is obstructed", ue.x, ue.y, ue.z));
    const double gain = array_gain(s.bs().array_elements, bs_beam, bs_sin_azimuth(s.bs(), ue));
    return link.tx_power_dbm - fspl_db(distance(s.bs().position, ue), link.carrier_ghz) + to_db(gain) -
           link.noise_power_dbm;
}

double se_bits(double snr_db) {
    if (std::isnan(snr_db) || snr_db == kNegInfDb) return 0.0;
    return std::log1p(std::pow(10.0, snr_db / 10.0)) / std::numbers::ln2;
}

Beam bs_beam_toward(const BsSpec& bs, const Vec3& target) {
    return steered_beam(bs.array_elements, bs_sin_azimuth(bs, target));
}

double aligned_snr_db(const Scenario& s, const LinkBudget& link, const AccessPointId& access, const Vec3& ue) {
    if (!reachable(s, access, ue)) return kNegInfDb;
    if (access.is_direct()) return direct_snr_db(s, link, bs_beam_toward(s.bs(), ue), ue);
    const IrsSpec& irs = s.irs(access.irs_id());
    return cascaded_snr_db(s, link, irs, irs_optimal_phases(s.bs().position, irs, ue, link.carrier_ghz),
                           bs_beam_toward(s.bs(), irs.position), ue);
}

}  // namespace irsbm
