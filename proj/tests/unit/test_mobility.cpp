#include <doctest.h>

#include <fstream>

#include "irsbm/error.hpp"
#include "irsbm/mobility.hpp"
#include "irsbm/random.hpp"
#include "test_support.hpp"

using namespace irsbm;
using namespace irsbm::test;

namespace {

const std::vector<Vec3> kPolyline{{0, 0, 0}, {3, 0, 0}, {3, 4, 0}, {0, 4, 0}};

// Distance travelled along kPolyline to reach p (p assumed on the path).
double arc_length(const Vec3& p) {
    double before = 0.0;
    for (std::size_t i = 1; i < kPolyline.size(); ++i) {
        const Vec3 a = kPolyline[i - 1], b = kPolyline[i];
        const double seg = distance(a, b);
        if (std::abs(distance(a, p) + distance(p, b) - seg) < 1e-9) return before + distance(a, p);
        before += seg;
    }
    FAIL("point is not on the polyline");
    return 0.0;
}

TraceBuffer line_trace(Vec3 start, Vec3 step, int n, long step_slots = 100, std::size_t capacity = 10) {
    TraceBuffer t(capacity);
    for (int i = 0; i < n; ++i) t.push({start + static_cast<double>(i) * step, {}, i * step_slots});
    return t;
}

void check_vec(const Vec3& a, const Vec3& b, double tol) {
    CHECK(std::abs(a.x - b.x) <= tol);
    CHECK(std::abs(a.y - b.y) <= tol);
    CHECK(std::abs(a.z - b.z) <= tol);
}

OnlineRegressorSpec regressor_spec() { return OnlineRegressorSpec{}; }

}  // namespace

TEST_CASE("constant velocity") {
    MobilityModel m(ConstantVelocity{{1, 0, 0}});
    MotionState s{{2.5, 3, 1.5}, {}, 7};
    for (int i = 0; i < 5; ++i) {
        const auto next = m.advance(s, 1.0);
        CHECK(next.position.x - s.position.x == 1.0);
        CHECK(next.position.y == s.position.y);
        CHECK(next.slot_index == 7);
        s = next;
    }
    CHECK_THROWS_AS(m.advance(s, 0.0), InvalidArgument);
}

TEST_CASE("waypoint motion against the sub-stepped reference") {
    const Vec3 expected[] = {{1.7, 0, 0}, {3, 0.4, 0}, {3, 2.1, 0}, {3, 3.8, 0}, {1.5, 4, 0}, {0, 4, 0}, {0, 4, 0}};
    MobilityModel m(Waypoint{kPolyline, 1.7});
    MotionState s{kPolyline[0], {}, 0};
    for (const Vec3& e : expected) {
        s = advance(m, s, 1.0);
        check_vec(s.position, e, 1e-4);
    }
    CHECK(s.velocity == Vec3{});
}

TEST_CASE("waypoint motion conserves path length") {
    MobilityModel m(Waypoint{kPolyline, 1.3});
    MotionState s{kPolyline[0], {}, 0};
    double travelled = 0.0;
    for (int i = 0; i < 7; ++i) {
        const auto next = m.advance(s, 0.7);
        travelled = std::min(travelled + 1.3 * 0.7, 10.0);
        CHECK(arc_length(next.position) == doctest::Approx(travelled).epsilon(1e-12));
        // Straight-line spacing only shrinks when a corner is cut.
        CHECK(distance(next.position, s.position) <= 1.3 * 0.7 + 1e-12);
        s = next;
    }
    const auto parked = m.advance(s, 5.0);
    CHECK(parked.position == kPolyline.back());
    CHECK(m.advance(parked, 1.0).position == kPolyline.back());
}

TEST_CASE("random walk") {
    MobilityModel a(RandomWalk{0.5, 3}), b(RandomWalk{0.5, 3});
    MotionState sa{{50, 50, 1.5}, {}, 0}, sb = sa;
    double sum_sq = 0.0;
    const int n = 4000;
    for (int i = 0; i < n; ++i) {
        const auto na = a.advance(sa, 0.25), nb = b.advance(sb, 0.25);
        REQUIRE(na.position == nb.position);
        REQUIRE(na.position.z == 1.5);
        sum_sq += std::pow(na.position.x - sa.position.x, 2) + std::pow(na.position.y - sa.position.y, 2);
        sa = na;
        sb = nb;
    }
    // Per-axis variance is step_std^2 * dt.
    CHECK(sum_sq / (2 * n) == doctest::Approx(0.25 * 0.25).epsilon(0.08));
}

TEST_CASE("mobility spec validation") {
    const Area area{0, 100, 0, 100};
    CHECK_NOTHROW(validate_mobility(Waypoint{{{1, 1, 1.5}, {90, 90, 1.5}}, 2.0}, area));
    CHECK_THROWS_AS(validate_mobility(Waypoint{{{1, 1, 1.5}}, 2.0}, area), ConfigError);
    CHECK_THROWS_AS(validate_mobility(Waypoint{{{1, 1, 1.5}, {90, 90, 1.5}}, 0.0}, area), ConfigError);
    CHECK_THROWS_AS(validate_mobility(Waypoint{{{1, 1, 1.5}, {190, 90, 1.5}}, 1.0}, area), ConfigError);
    CHECK_THROWS_AS(validate_mobility(RandomWalk{-1.0, 1}, area), ConfigError);
    CHECK_THROWS_AS(validate_mobility(ConstantVelocity{{NAN, 0, 0}}, area), ConfigError);
}

TEST_CASE("trace buffer") {
    TraceBuffer t(3);
    CHECK(t.empty());
    for (long slot : {0L, 5L, 9L, 20L, 21L}) {
        t.push({{double(slot), 0, 0}, {}, slot});
        REQUIRE(t.size() <= 3);
    }
    CHECK(t.full());
    CHECK(t.entries().front().slot_index == 9);
    CHECK(t.back().slot_index == 21);
    CHECK_THROWS_AS(t.push({{}, {}, 21}), InvalidArgument);
    CHECK_THROWS_AS(t.push({{}, {}, 3}), InvalidArgument);
    CHECK(t.back().slot_index == 21);
    CHECK_THROWS_AS(TraceBuffer(0), InvalidArgument);

    Rng rng(8);
    TraceBuffer r(10);
    long slot = 0;
    for (int i = 0; i < 500; ++i) {
        slot += 1 + static_cast<long>(uniform_index(rng, 4));
        r.push({{}, {}, slot});
        REQUIRE(r.size() <= r.capacity());
        for (std::size_t k = 1; k < r.size(); ++k)
            REQUIRE(r.entries()[k - 1].slot_index < r.entries()[k].slot_index);
    }
}

TEST_CASE("linear extrapolation") {
    const Vec3 start{10, 20, 1.5}, step{0.1, -0.05, 0};
    const auto t = line_trace(start, step, 10);
    const auto p = predict_linear(t, 5, 100);
    REQUIRE(p.size() == 5);
    for (int j = 1; j <= 5; ++j) check_vec(p[static_cast<std::size_t>(j - 1)], start + (9.0 + j) * step, 1e-12);

    const auto still = predict_linear(line_trace(start, {}, 6), 3, 100);
    for (const auto& q : still) check_vec(q, start, 1e-12);

    CHECK(predict_linear(t, 0, 100).empty());
    CHECK_THROWS_AS(predict_linear(line_trace(start, step, 1), 1, 100), InvalidArgument);

    SUBCASE("two entries are enough") {
        const auto two = predict_linear(line_trace(start, step, 2), 2, 100);
        check_vec(two[1], start + 3.0 * step, 1e-12);
    }
    SUBCASE("step size other than the trace spacing") {
        const auto half = predict_linear(t, 2, 50);
        check_vec(half[1], start + 10.0 * step, 1e-12);
    }
    SUBCASE("translation equivariance") {
        Rng rng(6);
        for (int trial = 0; trial < 50; ++trial) {
            TraceBuffer a(10), b(10);
            const Vec3 shift{uniform(rng, -50, 50), uniform(rng, -50, 50), uniform(rng, -2, 2)};
            for (int i = 0; i < 10; ++i) {
                const Vec3 q{uniform(rng, 0, 10), uniform(rng, 0, 10), uniform(rng, 0, 3)};
                a.push({q, {}, 100L * i});
                b.push({q + shift, {}, 100L * i});
            }
            const auto pa = predict_linear(a, 4, 100), pb = predict_linear(b, 4, 100);
            for (std::size_t j = 0; j < pa.size(); ++j) check_vec(pb[j], pa[j] + shift, 1e-9);
        }
    }
}

TEST_CASE("linear extrapolation under position noise") {
    // Reference: per-axis sd 0.068313 and mean 3-D error 0.109012 (tests/oracles/mobility_oracle.py).
    Rng rng(2024);
    const Vec3 start{10, 20, 1.5}, step{1, 0.5, 0};
    double total = 0.0;
    const int trials = 1000;
    for (int trial = 0; trial < trials; ++trial) {
        TraceBuffer t(10);
        for (int i = 0; i < 10; ++i) {
            const Vec3 noise{0.1 * standard_normal(rng), 0.1 * standard_normal(rng), 0.1 * standard_normal(rng)};
            t.push({start + double(i) * step + noise, {}, 100L * i});
        }
        total += distance(predict_linear(t, 1, 100)[0], start + 10.0 * step);
    }
    const double mean = total / trials;
    CHECK(mean < 0.2);
    CHECK(mean == doctest::Approx(0.109011784).epsilon(0.06));
}

TEST_CASE("online regressor") {
    const Vec3 start{40, 10, 1.5}, step{0.1, 0.05, 0};
    const auto trace = line_trace(start, step, 10);

    SUBCASE("learns a constant delta") {
        OnlineRegressor r(regressor_spec());
        CHECK_FALSE(r.trained());
        CHECK(r.online_update(trace, 0));
        REQUIRE(r.trained());
        const auto p = r.predict(trace, 3);
        REQUIRE(p.size() == 3);
        check_vec(p[0] - trace.back().position, step, 1e-3);
        for (int j = 1; j <= 3; ++j)
            CHECK(distance(p[static_cast<std::size_t>(j - 1)], trace.back().position + double(j) * step) < 1e-2);
        CHECK(r.predict(trace, 0).empty());
    }
    SUBCASE("retraining is gated by the period") {
        OnlineRegressor r(regressor_spec());
        CHECK_FALSE(r.online_update(line_trace(start, step, 9), 0));
        CHECK_FALSE(r.trained());
        REQUIRE(r.online_update(trace, 3));
        const MLPModel first = r.model();
        const auto moved = line_trace(start, 2.0 * step, 10);
        CHECK_FALSE(r.online_update(moved, 10));
        CHECK_FALSE(r.online_update(moved, 52));
        CHECK(r.model() == first);
        CHECK(r.online_update(moved, 53));
        CHECK_FALSE(r.model() == first);
    }
    SUBCASE("identical traces give identical regressors") {
        OnlineRegressor a(regressor_spec()), b(regressor_spec());
        a.retrain(trace);
        b.retrain(trace);
        CHECK(a.model() == b.model());
    }
    SUBCASE("spec validation") {
        auto spec = regressor_spec();
        spec.input_deltas = 9;
        CHECK_THROWS_AS(spec.validate(), ConfigError);
        spec = regressor_spec();
        spec.retrain_every = 0;
        CHECK_THROWS_AS(spec.validate(), ConfigError);
    }
}

TEST_CASE("predictor dispatch") {
    const Vec3 start{40, 10, 1.5}, step{0.1, 0.05, 0};
    const auto trace = line_trace(start, step, 10);

    Predictor linear(LinearExtrapolation{5});
    const auto lp = linear.predict(trace, 5, 100);
    for (int j = 1; j <= 5; ++j) check_vec(lp[static_cast<std::size_t>(j - 1)], start + (9.0 + j) * step, 1e-12);
    CHECK(linear.predict(trace, 0, 100).empty());
    CHECK(linear.regressor() == nullptr);

    Predictor learned(regressor_spec());
    REQUIRE(learned.regressor() != nullptr);
    // Before its first training the regressor defers to the line fit.
    const auto early = learned.predict(line_trace(start, step, 4), 2, 100);
    const auto fit = predict_linear(line_trace(start, step, 4), 2, 100);
    check_vec(early[1], fit[1], 0.0);
    learned.observe(trace, 0);
    CHECK(learned.regressor()->trained());
    CHECK(distance(learned.predict(trace, 3, 100)[2], start + 12.0 * step) < 1e-2);

    CHECK_THROWS_AS(learned.predict(line_trace(start, step, 1), 1, 100), InvalidArgument);
    CHECK(predictor_horizon(LinearExtrapolation{7}) == 7);
}

TEST_CASE("trajectory CSV") {
    const auto dir = temp_dir("trajectory_csv");
    const std::vector<TrajectoryPoint> pts{{0, {85, 5, 1.5}}, {100, {85, 5.1, 1.5}}, {200, {85, 1.0 / 3.0, 1.5}}};
    write_trajectory_csv(dir / "t.csv", pts);
    const auto back = read_trajectory_csv(dir / "t.csv");
    REQUIRE(back.size() == pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        CHECK(back[i].slot == pts[i].slot);
        CHECK(back[i].position == pts[i].position);
    }
    std::ofstream(dir / "bad.csv") << "slot,x,y,z\n0,1,2\n";
    CHECK_THROWS_AS(read_trajectory_csv(dir / "bad.csv"), DatasetError);
    std::ofstream(dir / "nohdr.csv") << "0,1,2,3\n";
    CHECK_THROWS_AS(read_trajectory_csv(dir / "nohdr.csv"), DatasetError);
}
