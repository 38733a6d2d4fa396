#include "irsbm/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

#include <fmt/format.h>

#include "irsbm/error.hpp"

namespace irsbm {

double Vec3::norm() const { return std::sqrt(dot(*this)); }

bool Vec3::finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }

double distance(const Vec3& a, const Vec3& b) { return (a - b).norm(); }

Vec3 horizontal_direction(double azimuth) { return {std::cos(azimuth), std::sin(azimuth), 0.0}; }

bool Obstacle::contains(const Vec3& p) const {
    return p.x >= min_corner.x && p.x <= max_corner.x && p.y >= min_corner.y && p.y <= max_corner.y &&
           p.z >= min_corner.z && p.z <= max_corner.z;
}

std::string AccessPointId::to_string() const {
    switch (kind_) {
        case Kind::Direct: return "direct";
        case Kind::Irs: return fmt::format("irs{}", irs_id_);
        case Kind::Outage: return "outage";
    }
    return "outage";
}

AccessPointId AccessPointId::parse(const std::string& text) {
    if (text == "direct") return direct();
    if (text == "outage") return outage();
    if (text.size() > 3 && text.compare(0, 3, "irs") == 0) {
        const std::string digits = text.substr(3);
        if (std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; }) &&
            digits.size() < 9)
            return irs(std::stoi(digits));
    }
    throw InvalidArgument(fmt::format("unknown access point label '{}'", text));
}

bool is_power_of_two(long n) { return n > 0 && (n & (n - 1)) == 0; }

namespace {

double component(const Vec3& v, int axis) { return axis == 0 ? v.x : axis == 1 ? v.y : v.z; }

bool segment_hits_box(const Vec3& a, const Vec3& b, const Obstacle& box) {
    const Vec3 d = b - a;
    double t0 = 0.0;
    double t1 = 1.0;
    for (int axis = 0; axis < 3; ++axis) {
        const double origin = component(a, axis);
        const double dir = component(d, axis);
        const double lo = component(box.min_corner, axis);
        const double hi = component(box.max_corner, axis);
        if (dir == 0.0) {
            if (origin < lo || origin > hi) return false;
            continue;
        }
        double ta = (lo - origin) / dir;
        double tb = (hi - origin) / dir;
        if (ta > tb) std::swap(ta, tb);
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
        if (t0 > t1) return false;
    }
    return true;
}

void require(bool ok, const std::string& message) {
    if (!ok) throw ConfigError(message);
}

}  // namespace

bool los_blocked(const Vec3& a, const Vec3& b, std::span<const Obstacle> obstacles) {
    const bool swap = std::tie(b.x, b.y, b.z) < std::tie(a.x, a.y, a.z);
    const Vec3& from = swap ? b : a;
    const Vec3& to = swap ? a : b;
    return std::any_of(obstacles.begin(), obstacles.end(),
                       [&](const Obstacle& box) { return segment_hits_box(from, to, box); });
}

bool in_front_of(const IrsSpec& irs, const Vec3& p) {
    return (p - irs.position).dot(horizontal_direction(irs.normal_azimuth)) > 0.0;
}

Scenario::Scenario(BsSpec bs, std::vector<IrsSpec> irss, std::vector<Obstacle> obstacles, Area area,
                   double ue_height)
    : bs_(bs), irss_(std::move(irss)), obstacles_(std::move(obstacles)), area_(area), ue_height_(ue_height) {
    require(bs_.position.finite() && std::isfinite(bs_.boresight_azimuth), "bs.position: non-finite value");
    require(is_power_of_two(bs_.array_elements), "bs.elements: must be a power of two");
    require(std::isfinite(area_.x_min) && std::isfinite(area_.x_max) && std::isfinite(area_.y_min) &&
                std::isfinite(area_.y_max) && area_.x_min < area_.x_max && area_.y_min < area_.y_max,
            "area: must be finite and nonempty");
    require(std::isfinite(ue_height_), "ue_height: non-finite value");

    for (std::size_t j = 0; j < obstacles_.size(); ++j) {
        const auto& o = obstacles_[j];
        require(o.min_corner.finite() && o.max_corner.finite(),
                fmt::format("obstacles[{}]: non-finite corner", j));
        require(o.min_corner.x < o.max_corner.x && o.min_corner.y < o.max_corner.y &&
                    o.min_corner.z < o.max_corner.z,
                fmt::format("obstacles[{}]: min must be below max on every axis", j));
    }

    std::sort(irss_.begin(), irss_.end(), [](const IrsSpec& l, const IrsSpec& r) { return l.id < r.id; });
    std::set<int> ids;
    for (const auto& irs : irss_) {
        require(irs.id >= 0, fmt::format("irs id {}: must be nonnegative", irs.id));
        require(ids.insert(irs.id).second, fmt::format("irs id {}: duplicated", irs.id));
        require(irs.position.finite() && std::isfinite(irs.normal_azimuth),
                fmt::format("irs{}.position: non-finite value", irs.id));
        require(is_power_of_two(irs.elements), fmt::format("irs{}.elements: must be a power of two", irs.id));
        require(!los_blocked(bs_.position, irs.position, obstacles_),
                fmt::format("irs{}: BS-IRS link is obstructed", irs.id));
    }
}

const IrsSpec* Scenario::find_irs(int id) const {
    const auto it = std::find_if(irss_.begin(), irss_.end(), [id](const IrsSpec& s) { return s.id == id; });
    return it == irss_.end() ? nullptr : &*it;
}

const IrsSpec& Scenario::irs(int id) const {
    const IrsSpec* spec = find_irs(id);
    if (spec == nullptr) throw InvalidArgument(fmt::format("scenario has no irs{}", id));
    return *spec;
}

std::vector<AccessPointId> Scenario::serving_points() const {
    std::vector<AccessPointId> points{AccessPointId::direct()};
    for (const auto& irs : irss_) points.push_back(AccessPointId::irs(irs.id));
    return points;
}

bool reachable(const Scenario& s, const AccessPointId& access, const Vec3& ue) {
    switch (access.kind()) {
        case AccessPointId::Kind::Direct: return !los_blocked(s.bs().position, ue, s.obstacles());
        case AccessPointId::Kind::Irs: {
            const IrsSpec* irs = s.find_irs(access.irs_id());
            if (irs == nullptr || !in_front_of(*irs, ue)) return false;
            return !los_blocked(s.bs().position, irs->position, s.obstacles()) &&
                   !los_blocked(irs->position, ue, s.obstacles());
        }
        case AccessPointId::Kind::Outage: return false;
    }
    return false;
}

std::vector<AccessCandidate> access_candidates(const Scenario& s, const Vec3& ue) {
    std::vector<AccessCandidate> out;
    for (const auto& ap : s.serving_points()) out.push_back({ap, reachable(s, ap, ue)});
    return out;
}

}  // namespace irsbm
