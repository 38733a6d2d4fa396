#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace irsbm {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend Vec3 operator*(double s, const Vec3& v) { return {s * v.x, s * v.y, s * v.z}; }
    friend Vec3 operator*(const Vec3& v, double s) { return s * v; }
    friend bool operator==(const Vec3&, const Vec3&) = default;

    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    double norm() const;
    bool finite() const;
};

double distance(const Vec3& a, const Vec3& b);

/// Horizontal unit vector at the given azimuth (radians from +x toward +y).
Vec3 horizontal_direction(double azimuth);

/// Axis-aligned box. Positive volume is enforced when a Scenario is built.
struct Obstacle {
    Vec3 min_corner;
    Vec3 max_corner;

    bool contains(const Vec3& p) const;
};

/// Base station with a horizontal half-wavelength ULA. The array axis is
/// perpendicular to the boresight in the horizontal plane.
struct BsSpec {
    Vec3 position;
    int array_elements = 64;
    double boresight_azimuth = 0.0;
};

/// Passive reflecting surface modelled as a horizontal half-wavelength linear
/// aperture centred at `position`, lying perpendicular to its surface normal.
struct IrsSpec {
    int id = 0;
    Vec3 position;
    double normal_azimuth = 0.0;
    int elements = 64;
};

struct Area {
    double x_min = 0.0;
    double x_max = 0.0;
    double y_min = 0.0;
    double y_max = 0.0;

    bool contains(const Vec3& p) const {
        return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
    }
};

/// Serving choice for a UE: the BS directly, a specific IRS, or nothing.
class AccessPointId {
public:
    enum class Kind { Direct, Irs, Outage };

    static AccessPointId direct() { return AccessPointId(Kind::Direct, -1); }
    static AccessPointId irs(int id) { return AccessPointId(Kind::Irs, id); }
    static AccessPointId outage() { return AccessPointId(Kind::Outage, -1); }

    Kind kind() const { return kind_; }
    bool is_direct() const { return kind_ == Kind::Direct; }
    bool is_irs() const { return kind_ == Kind::Irs; }
    bool is_outage() const { return kind_ == Kind::Outage; }
    /// Only meaningful when is_irs().
    int irs_id() const { return irs_id_; }

    /// "direct", "irs<id>" or "outage".
    std::string to_string() const;
    /// Inverse of to_string(); throws InvalidArgument on anything else.
    static AccessPointId parse(const std::string& text);

    friend auto operator<=>(const AccessPointId&, const AccessPointId&) = default;

private:
    AccessPointId(Kind kind, int id) : kind_(kind), irs_id_(id) {}

    Kind kind_;
    int irs_id_;
};

/// Immutable world description. The constructor validates every invariant
/// (finite coordinates, power-of-two arrays, distinct IRS ids, positive-volume
/// obstacles, unobstructed BS-IRS links) and throws ConfigError otherwise.
class Scenario {
public:
    Scenario(BsSpec bs, std::vector<IrsSpec> irss, std::vector<Obstacle> obstacles, Area area,
             double ue_height);

    const BsSpec& bs() const { return bs_; }
    /// Sorted by ascending id.
    const std::vector<IrsSpec>& irss() const { return irss_; }
    const std::vector<Obstacle>& obstacles() const { return obstacles_; }
    const Area& area() const { return area_; }
    double ue_height() const { return ue_height_; }

    const IrsSpec* find_irs(int id) const;
    const IrsSpec& irs(int id) const;

    /// Every serving choice of this scenario: Direct, then IRSs by ascending id.
    std::vector<AccessPointId> serving_points() const;

private:
    BsSpec bs_;
    std::vector<IrsSpec> irss_;
    std::vector<Obstacle> obstacles_;
    Area area_;
    double ue_height_;
};

struct GridSpec {
    double resolution = 1.0;
    double holdout_fraction = 0.2;
    std::uint64_t seed = 1;
};

/// True iff the segment between a and b touches any obstacle (interior or
/// boundary). Evaluated in a canonical endpoint order, so the result is
/// exactly symmetric in (a, b).
bool los_blocked(const Vec3& a, const Vec3& b, std::span<const Obstacle> obstacles);

/// True iff `p` lies strictly in front of the IRS surface.
bool in_front_of(const IrsSpec& irs, const Vec3& p);

struct AccessCandidate {
    AccessPointId access;
    bool reachable = false;
};

/// Direct first, then every IRS by ascending id.
std::vector<AccessCandidate> access_candidates(const Scenario& s, const Vec3& ue);

/// Reachability of a single serving choice; Outage is never reachable.
bool reachable(const Scenario& s, const AccessPointId& access, const Vec3& ue);

bool is_power_of_two(long n);

}  // namespace irsbm
