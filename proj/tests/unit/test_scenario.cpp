#include <doctest.h>

#include <algorithm>

#include "irsbm/error.hpp"
#include "irsbm/fingerprint.hpp"
#include "irsbm/random.hpp"
#include "test_support.hpp"

using namespace irsbm;
using namespace irsbm::test;

namespace {

// Dense sampling of the segment; used as an independent blockage check.
bool sampled_blocked(const Vec3& a, const Vec3& b, const std::vector<Obstacle>& obstacles) {
    constexpr int kSamples = 10000;
    for (int i = 0; i <= kSamples; ++i) {
        const double t = static_cast<double>(i) / kSamples;
        const Vec3 p = a + t * (b - a);
        for (const auto& o : obstacles)
            if (o.contains(p)) return true;
    }
    return false;
}

Obstacle random_box(Rng& rng) {
    const Vec3 lo{uniform(rng, -40, 40), uniform(rng, -40, 40), uniform(rng, 0, 5)};
    return box(lo, lo + Vec3{uniform(rng, 0.5, 15), uniform(rng, 0.5, 15), uniform(rng, 0.5, 15)});
}

Vec3 random_point(Rng& rng) { return {uniform(rng, -50, 50), uniform(rng, -50, 50), uniform(rng, 0, 12)}; }

}  // namespace

TEST_CASE("los_blocked examples") {
    const Vec3 a{0, 0, 10}, b{50, 0, 1.5};
    CHECK_FALSE(los_blocked(a, b, {}));
    const std::vector<Obstacle> one{box({20, -5, 0}, {30, 5, 20})};
    CHECK(los_blocked(a, b, one));
    CHECK(sampled_blocked(a, b, one));
    const std::vector<Obstacle> around_a{box({-1, -1, 9}, {1, 1, 11})};
    CHECK(los_blocked(a, {0, 80, 80}, around_a));
    CHECK(los_blocked({0, 80, 80}, a, around_a));
}

TEST_CASE("los_blocked agrees with dense sampling away from grazing contacts") {
    Rng rng(11);
    int disagreements = 0;
    for (int trial = 0; trial < 300; ++trial) {
        const std::vector<Obstacle> obstacles{random_box(rng), random_box(rng)};
        const Vec3 a = random_point(rng), b = random_point(rng);
        // Sampling can only miss very short chords, never invent a hit.
        const bool exact = los_blocked(a, b, obstacles);
        const bool sampled = sampled_blocked(a, b, obstacles);
        if (sampled) CHECK(exact);
        if (exact != sampled) ++disagreements;
    }
    CHECK(disagreements <= 3);
}

TEST_CASE("los_blocked is symmetric and monotone in the obstacle set") {
    Rng rng(5);
    for (int trial = 0; trial < 2000; ++trial) {
        std::vector<Obstacle> obstacles{random_box(rng), random_box(rng)};
        const Vec3 a = random_point(rng), b = random_point(rng);
        const bool before = los_blocked(a, b, obstacles);
        REQUIRE(before == los_blocked(b, a, obstacles));
        obstacles.push_back(random_box(rng));
        if (before) REQUIRE(los_blocked(a, b, obstacles));
    }
}

TEST_CASE("access_candidates in an open field lists every serving point") {
    // Four surfaces around the UE, all facing it.
    const Scenario s = open_field({IrsSpec{0, {40, 30, 5}, -kPi / 2, 64}, IrsSpec{1, {40, -30, 5}, kPi / 2, 64},
                                   IrsSpec{2, {70, 0, 5}, kPi, 64}, IrsSpec{3, {10, 20, 5}, -kPi / 4, 64}});
    const auto c = access_candidates(s, {40, 0, 1.5});
    REQUIRE(c.size() == 5);
    CHECK(c[0].access == AccessPointId::direct());
    for (int i = 0; i < 4; ++i) CHECK(c[static_cast<std::size_t>(i) + 1].access == AccessPointId::irs(i));
    CHECK(std::all_of(c.begin(), c.end(), [](const AccessCandidate& x) { return x.reachable; }));
}

TEST_CASE("access_candidates for an enclosed UE are all unreachable") {
    const Scenario s = open_field({IrsSpec{0, {40, 30, 5}, -kPi / 2, 64}}, {box({35, -5, 0}, {45, 5, 4})});
    for (const auto& c : access_candidates(s, {40, 0, 1.5})) CHECK_FALSE(c.reachable);
}

TEST_CASE("blocked direct path with a clear side view of one surface") {
    const std::vector<Obstacle> wall{box({20, -3, 0}, {22, 3, 20})};
    const Scenario s =
        open_field({IrsSpec{0, {40, -40, 5}, kPi / 2, 64}, IrsSpec{2, {40, 30, 5}, -kPi / 2, 64}}, wall);
    const Vec3 ue{40, 0, 1.5};
    REQUIRE(los_blocked(s.bs().position, ue, wall));
    REQUIRE_FALSE(los_blocked(s.irs(2).position, ue, wall));
    CHECK_FALSE(reachable(s, AccessPointId::direct(), ue));
    CHECK(reachable(s, AccessPointId::irs(2), ue));
    CHECK_FALSE(reachable(s, AccessPointId::outage(), ue));
}

TEST_CASE("surfaces cannot serve points behind them") {
    const Scenario s = open_field({IrsSpec{0, {40, 0, 5}, 0.0, 64}});
    CHECK(in_front_of(s.irs(0), {50, 0, 1.5}));
    CHECK_FALSE(in_front_of(s.irs(0), {30, 0, 1.5}));
    CHECK_FALSE(in_front_of(s.irs(0), {40, 10, 1.5}));
    CHECK_FALSE(reachable(s, AccessPointId::irs(0), {30, 0, 1.5}));
}

TEST_CASE("label_position edge cases") {
    const LinkBudget link;
    SUBCASE("single reachable surface") {
        const std::vector<Obstacle> wall{box({20, -3, 0}, {22, 3, 20})};
        const Scenario s = open_field({IrsSpec{2, {40, 30, 5}, -kPi / 2, 64}}, wall);
        const auto r = label_position(s, link, {40, 0, 1.5});
        CHECK(r.label == AccessPointId::irs(2));
        CHECK(r.se_bits_per_hz > 0.0);
    }
    SUBCASE("nothing reachable") {
        const Scenario s = open_field({IrsSpec{0, {40, 30, 5}, -kPi / 2, 64}}, {box({35, -5, 0}, {45, 5, 4})});
        const auto r = label_position(s, link, {40, 0, 1.5});
        CHECK(r.label.is_outage());
        CHECK(r.se_bits_per_hz == 0.0);
    }
    SUBCASE("a 30 m direct link beats a 20 m + 25 m two-hop path") {
        // BS at height 10; UE 30 m away in 3D; surface 20 m from the BS and 25 m from the UE.
        const double h = 10.0 - 1.5;
        const double ground = std::sqrt(30.0 * 30.0 - h * h);
        const Vec3 ue{ground, 0.0, 1.5};
        const Vec3 bs{0.0, 0.0, 10.0};
        // Place the surface on the circle intersection in the horizontal plane at z = 10.
        const double d1 = 20.0;
        const double dz = 10.0 - 1.5;
        const double d2h = std::sqrt(25.0 * 25.0 - dz * dz);
        const double x = (d1 * d1 - d2h * d2h + ground * ground) / (2 * ground);
        const Vec3 irs_pos{x, -std::sqrt(d1 * d1 - x * x), 10.0};
        REQUIRE(distance(bs, irs_pos) == doctest::Approx(20.0));
        REQUIRE(distance(irs_pos, ue) == doctest::Approx(25.0));
        REQUIRE(distance(bs, ue) == doctest::Approx(30.0));
        const Scenario s = open_field({IrsSpec{0, irs_pos, kPi / 2, 64}});
        REQUIRE(reachable(s, AccessPointId::irs(0), ue));
        CHECK(label_position(s, link, ue).label == AccessPointId::direct());
    }
}

TEST_CASE("label_position ignores obstacle order") {
    std::vector<Obstacle> obstacles{box({20, -3, 0}, {22, 3, 20}), box({50, 20, 0}, {55, 25, 8}),
                                    box({-30, -30, 0}, {-20, -10, 12})};
    const std::vector<IrsSpec> irss{IrsSpec{0, {40, 30, 5}, -kPi / 2, 64}, IrsSpec{1, {40, -30, 5}, kPi / 2, 64}};
    const Scenario a = open_field(irss, obstacles);
    std::reverse(obstacles.begin(), obstacles.end());
    const Scenario b = open_field(irss, obstacles);
    const LinkBudget link;
    Rng rng(3);
    for (int i = 0; i < 500; ++i) {
        const Vec3 ue{uniform(rng, -90, 90), uniform(rng, -90, 90), 1.5};
        const auto ra = label_position(a, link, ue), rb = label_position(b, link, ue);
        REQUIRE(ra.label == rb.label);
        REQUIRE(ra.se_bits_per_hz == rb.se_bits_per_hz);
    }
}

TEST_CASE("Scenario construction rejects invalid worlds") {
    const BsSpec bs{{0, 0, 10}, 64, 0.0};
    const Area area{0, 100, 0, 100};
    CHECK_THROWS_AS(Scenario(BsSpec{{0, 0, 10}, 48, 0.0}, {}, {}, area, 1.5), ConfigError);
    CHECK_THROWS_AS(Scenario(bs, {IrsSpec{1, {50, 50, 5}, 0, 64}, IrsSpec{1, {60, 50, 5}, 0, 64}}, {}, area, 1.5),
                    ConfigError);
    CHECK_THROWS_AS(Scenario(bs, {IrsSpec{0, {50, 50, 5}, 0, 63}}, {}, area, 1.5), ConfigError);
    CHECK_THROWS_AS(Scenario(bs, {IrsSpec{0, {50, 0, 5}, 0, 64}}, {box({20, -5, 0}, {30, 5, 20})}, area, 1.5),
                    ConfigError);
    CHECK_THROWS_AS(Scenario(bs, {}, {box({20, -5, 0}, {20, 5, 20})}, area, 1.5), ConfigError);
    CHECK_THROWS_AS(Scenario(bs, {}, {}, Area{0, 0, 0, 100}, 1.5), ConfigError);
    CHECK_THROWS_AS(Scenario(BsSpec{{0, NAN, 10}, 64, 0.0}, {}, {}, area, 1.5), ConfigError);
}

TEST_CASE("Scenario keeps surfaces sorted by id") {
    const Scenario s = open_field({IrsSpec{3, {40, 30, 5}, 0, 64}, IrsSpec{1, {40, -30, 5}, 0, 64}});
    REQUIRE(s.irss().size() == 2);
    CHECK(s.irss()[0].id == 1);
    CHECK(s.irss()[1].id == 3);
    CHECK(s.serving_points() ==
          std::vector<AccessPointId>{AccessPointId::direct(), AccessPointId::irs(1), AccessPointId::irs(3)});
    CHECK_THROWS_AS(s.irs(2), InvalidArgument);
}

TEST_CASE("AccessPointId text form round-trips") {
    for (const auto& a : {AccessPointId::direct(), AccessPointId::irs(0), AccessPointId::irs(12),
                          AccessPointId::outage()})
        CHECK(AccessPointId::parse(a.to_string()) == a);
    CHECK(AccessPointId::irs(3).to_string() == "irs3");
    for (const char* bad : {"", "irs", "irs-1", "irs1x", "Direct", "bs"})
        CHECK_THROWS_AS(AccessPointId::parse(bad), InvalidArgument);
}

TEST_CASE("grid points sit at cell centres") {
    const Scenario s = open_field({}, {}, Area{0, 100, 0, 100});
    const auto pts = grid_points(s, 1.0);
    REQUIRE(pts.size() == 10000);
    CHECK(pts.front() == Vec3{0.5, 0.5, 1.5});
    CHECK(pts[1] == Vec3{1.5, 0.5, 1.5});
    CHECK(pts.back() == Vec3{99.5, 99.5, 1.5});
    CHECK(grid_points(s, 2.5).size() == 1600);
}
