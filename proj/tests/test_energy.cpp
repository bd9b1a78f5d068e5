#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "support.hpp"

using namespace uavpower;
using testing_support::rel_diff;

namespace {

Trajectory2D uniform_circle(double speed, double radius, double duration, double rate) {
    std::vector<TrajectorySample> s;
    const auto n = static_cast<int>(std::llround(duration * rate));
    for (int k = 0; k <= n; ++k) {
        const double t = k / rate;
        const double theta = speed * t / radius;
        const Vec2 radial{std::cos(theta), std::sin(theta)};
        s.push_back({t, {-speed * radial.y, speed * radial.x}, (-speed * speed / radius) * radial});
    }
    return Trajectory2D(std::move(s));
}

Trajectory2D straight(double speed, double duration, double rate, double heading = 0.3) {
    std::vector<TrajectorySample> s;
    const auto n = static_cast<int>(std::llround(duration * rate));
    for (int k = 0; k <= n; ++k) {
        s.push_back({k / rate, {speed * std::cos(heading), speed * std::sin(heading)}, {0.0, 0.0}});
    }
    return Trajectory2D(std::move(s));
}

}  // namespace

TEST(KineticDelta, Examples) {
    EXPECT_EQ(kinetic_delta(3.0, 5.0, 5.0), 0.0);
    EXPECT_EQ(kinetic_delta(2.0, 0.0, 3.0), 9.0);
    EXPECT_EQ(kinetic_delta(3.0, 0.0, 14.0), 294.0);
    EXPECT_EQ(kinetic_delta(3.0, 14.0, 0.0), -294.0);
    EXPECT_THROW(kinetic_delta(0.0, 1.0, 2.0), InputError);
    EXPECT_THROW(kinetic_delta(1.0, -1.0, 2.0), InputError);
}

TEST(Trajectory2D, Validation) {
    using Samples = std::vector<TrajectorySample>;
    EXPECT_THROW(Trajectory2D(Samples{{0.0, {}, {}}}), InputError);
    EXPECT_THROW(Trajectory2D(Samples{{0.0, {}, {}}, {0.0, {}, {}}}), InputError);
    EXPECT_THROW(Trajectory2D(Samples{{1.0, {}, {}}, {0.5, {}, {}}}), InputError);
    const Trajectory2D ok(Samples{{0.0, {}, {}}, {0.5, {}, {}}});
    EXPECT_EQ(ok.duration(), 0.5);
}

TEST(TrajectoryEnergy, Hover) {
    const auto p = reference_params();
    const auto e = trajectory_energy(straight(0.0, 100.0, 5.0), p);
    EXPECT_NEAR(e.total, (p.c1 + p.c3) * 100.0, 1e-9);
    EXPECT_EQ(e.kinetic_delta, 0.0);
    EXPECT_EQ(e.parasite, 0.0);
    EXPECT_NEAR(e.mean_power(), p.c1 + p.c3, 1e-12);
}

TEST(TrajectoryEnergy, UniformStraightFlight) {
    const auto p = reference_params();
    for (double v : {0.5, 4.0, 10.0, 14.0}) {
        const auto e = trajectory_energy(straight(v, 37.4, 5.0), p);
        EXPECT_LT(rel_diff(e.total, power_level_flight(v, p).total * 37.4), 1e-12) << v;
        EXPECT_EQ(e.kinetic_delta, 0.0);
    }
}

TEST(TrajectoryEnergy, UniformCircle) {
    const auto p = reference_params();
    const auto e = trajectory_energy(uniform_circle(5.0, 10.0, 60.0, 5.0), p);
    EXPECT_LT(rel_diff(e.total, power_circular(5.0, 10.0, p).total * 60.0), 1e-6);
    EXPECT_NEAR(e.kinetic_delta, 0.0, 1e-9);
}

TEST(TrajectoryEnergy, ComponentsAddUp) {
    const auto p = reference_params();
    const auto e = trajectory_energy(uniform_circle(3.0, 7.0, 20.0, 5.0), p);
    EXPECT_NEAR(e.total, e.blade_profile + e.induced + e.parasite + e.kinetic_delta, 1e-9 * e.total);
    EXPECT_DOUBLE_EQ(e.duration, 20.0);
}

TEST(TrajectoryEnergy, AcceleratingRunCarriesKineticDelta) {
    const auto p = reference_params();
    std::vector<TrajectorySample> s;
    for (int k = 0; k <= 25; ++k) {
        const double t = k * 0.2;
        s.push_back({t, {2.0 * t, 0.0}, {2.0, 0.0}});
    }
    const auto e = trajectory_energy(Trajectory2D(s), p);
    EXPECT_DOUBLE_EQ(e.kinetic_delta, 0.5 * p.mass * 100.0);
}

TEST(TrajectoryEnergy, AdditiveUnderSplitting) {
    const auto p = reference_params();
    Rng rng(31);
    std::vector<TrajectorySample> s;
    double t = 0.0;
    for (int k = 0; k < 300; ++k) {
        s.push_back({t, {rng.uniform(-8, 8), rng.uniform(-8, 8)}, {rng.uniform(-3, 3), rng.uniform(-3, 3)}});
        t += rng.uniform(0.05, 0.4);
    }
    const Trajectory2D traj(s);
    const auto whole = trajectory_energy(traj, p);
    for (std::size_t cut : {1ul, 57ul, 150ul, 298ul}) {
        const auto a = trajectory_energy(traj.slice(0, cut), p);
        const auto b = trajectory_energy(traj.slice(cut, traj.size() - 1), p);
        EXPECT_NEAR(a.total + b.total, whole.total, 1e-9 * std::abs(whole.total));
        EXPECT_NEAR(a.kinetic_delta + b.kinetic_delta, whole.kinetic_delta, 1e-9 * (1 + std::abs(whole.kinetic_delta)));
    }
}

TEST(TrajectoryEnergy, TangentialAccelerationOnlyEntersThroughKineticDelta) {
    // Same speeds, one with purely tangential acceleration recorded, one
    // without: the integrand is identical.
    const auto p = reference_params();
    std::vector<TrajectorySample> with, without;
    for (int k = 0; k <= 10; ++k) {
        const double t = k * 0.2;
        with.push_back({t, {1.0 + t, 0.0}, {1.0, 0.0}});
        without.push_back({t, {1.0 + t, 0.0}, {0.0, 0.0}});
    }
    EXPECT_EQ(trajectory_energy(Trajectory2D(with), p).total, trajectory_energy(Trajectory2D(without), p).total);
}

TEST(TrajectoryFile, RoundTrip) {
    const auto traj = uniform_circle(5.0, 10.0, 4.0, 5.0);
    std::ostringstream out;
    write_trajectory(out, traj);
    std::istringstream in("# comment\n" + out.str());
    const auto back = parse_trajectory(in);
    EXPECT_EQ(back.samples(), traj.samples());
}

TEST(TrajectoryFile, Errors) {
    auto parse = [](const std::string& s) {
        std::istringstream in(s);
        return parse_trajectory(in);
    };
    EXPECT_THROW(parse(""), ParseError);
    EXPECT_THROW(parse("t,vx,vy\n0,1,2\n"), ParseError);
    EXPECT_THROW(parse("t,vx,vy,ax,ay\n0,1,0,0,0\n"), ParseError);
    EXPECT_THROW(parse("t,vx,vy,ax,ay\n0,1,0,0,0\n0.2,1,0,0\n"), ParseError);
    EXPECT_THROW(parse("t,vx,vy,ax,ay\n0,1,0,0,0\n0.2,1,x,0,0\n"), ParseError);
    try {
        parse("t,vx,vy,ax,ay\n0,1,0,0,0\n0.2,1,0,0,0\n0.1,1,0,0,0\n");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.row(), 3u);
    }
}
