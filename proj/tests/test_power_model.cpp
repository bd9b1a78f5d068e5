#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"

using namespace uavpower;
using testing_support::random_params;
using testing_support::reference_power;
using testing_support::rel_diff;

TEST(ReferenceParams, FixtureFileMatchesBuiltIn) { EXPECT_EQ(testing_support::fixture_params(), reference_params()); }

TEST(ReferenceParams, LevelFlightEnvelope) {
    const auto p = reference_params();
    for (int i = 0; i <= 1400; ++i) {
        const double total = power_level_flight(i * 0.01, p).total;
        EXPECT_GE(total, 150.0);
        EXPECT_LE(total, 600.0);
    }
}

TEST(PowerLevelFlight, HoverIsC1PlusC3) {
    const ModelParams p{80.0, 0.01, 88.0, 10.0, 0.1};
    const auto b = power_level_flight(0.0, p);
    EXPECT_EQ(b.blade_profile, 80.0);
    EXPECT_EQ(b.induced, 88.0);
    EXPECT_EQ(b.parasite, 0.0);
    EXPECT_EQ(b.total, 168.0);
}

TEST(PowerLevelFlight, PureParasiteLimit) {
    // c1 = c3 = 0 is outside the valid domain; vanishingly small values give
    // the same arithmetic.
    const ModelParams p{1e-300, 0.7, 1e-300, 3.0, 1.0};
    EXPECT_DOUBLE_EQ(power_level_flight(2.0, p).total, 8.0);
}

TEST(PowerLevelFlight, MatchesExtendedPrecisionOracle) {
    const auto p = reference_params();
    for (double v : {0.0, 0.5, 3.0, 10.0, 14.0, 30.0}) {
        const auto b = power_level_flight(v, p);
        const auto ref = reference_power(v, 0.0, p);
        EXPECT_LT(rel_diff(b.total, ref.total.convert_to<double>()), 1e-14) << v;
        EXPECT_LT(rel_diff(b.induced, ref.induced.convert_to<double>()), 1e-13) << v;
        EXPECT_LT(rel_diff(b.blade_profile, ref.blade_profile.convert_to<double>()), 1e-15) << v;
    }
}

TEST(PowerLevelFlight, StableAtHighSpeed) {
    // The naive sqrt(1 + x^2) - x loses every digit here.
    const ModelParams p{88.0, 0.02, 97.0, 0.01, 0.05};
    const auto b = power_level_flight(200.0, p);
    const auto ref = reference_power(200.0, 0.0, p);
    EXPECT_LT(rel_diff(b.induced, ref.induced.convert_to<double>()), 1e-12);
}

TEST(PowerLevelFlight, RejectsBadInput) {
    const auto p = reference_params();
    EXPECT_THROW(power_level_flight(-1.0, p), InputError);
    EXPECT_THROW(power_level_flight(std::nan(""), p), InputError);
    ModelParams bad = p;
    bad.c4 = 0.0;
    EXPECT_THROW(power_level_flight(1.0, bad), InputError);
    bad = p;
    bad.mass = -1.0;
    EXPECT_THROW(power_level_flight(1.0, bad), InputError);
}

TEST(PowerLevelFlight, ComponentsSumAndNonNegative) {
    Rng rng(11);
    for (int n = 0; n < 50; ++n) {
        const auto p = random_params(rng);
        for (int i = 0; i <= 300; ++i) {
            const auto b = power_level_flight(i * 0.1, p);
            EXPECT_GE(b.blade_profile, 0.0);
            EXPECT_GT(b.induced, 0.0);
            EXPECT_GE(b.parasite, 0.0);
            EXPECT_NEAR(b.total, b.blade_profile + b.induced + b.parasite, 1e-12 * b.total);
        }
    }
}

TEST(PowerLevelFlight, ComponentMonotonicity) {
    Rng rng(12);
    for (int n = 0; n < 50; ++n) {
        const auto p = random_params(rng);
        auto prev = power_level_flight(0.0, p);
        EXPECT_EQ(prev.parasite, 0.0);
        for (int i = 1; i <= 3000; ++i) {
            const auto cur = power_level_flight(i * 0.01, p);
            EXPECT_LT(cur.induced, prev.induced);
            EXPECT_GE(cur.blade_profile, prev.blade_profile);
            EXPECT_GE(cur.parasite, prev.parasite);
            prev = cur;
        }
    }
}

TEST(HoverPower, Examples) {
    EXPECT_EQ(hover_power(ModelParams{80.0, 0.01, 88.0, 10.0, 0.1}), 168.0);
    const auto p = reference_params();
    EXPECT_EQ(hover_power(p), power_level_flight(0.0, p).total);
    EXPECT_LT(rel_diff(hover_power(p), reference_power(0.0, 0.0, p).total.convert_to<double>()), 1e-15);
}

TEST(HoverPower, IdentityOnRandomSets) {
    Rng rng(13);
    for (int n = 0; n < 200; ++n) {
        const auto p = random_params(rng);
        EXPECT_EQ(hover_power(p), power_level_flight(0.0, p).total);
    }
}

TEST(CentripetalAccel, Examples) {
    EXPECT_DOUBLE_EQ(centripetal_accel({1.0, 0.0}, {0.0, 2.0}), 2.0);
    EXPECT_NEAR(centripetal_accel({3.0, 4.0}, {3.0, 4.0}), 0.0, 1e-6);
    EXPECT_NEAR(centripetal_accel({1.0, 1.0}, {2.0, 0.0}), std::sqrt(2.0), 1e-15);
}

TEST(CentripetalAccel, MatchesBruteForceDecomposition) {
    Rng rng(14);
    for (int n = 0; n < 1000; ++n) {
        const Vec2 v{rng.uniform(-10, 10), rng.uniform(-10, 10)};
        const Vec2 a{rng.uniform(-5, 5), rng.uniform(-5, 5)};
        // Rotate into the velocity frame; the perpendicular part is the y component there.
        const double angle = std::atan2(v.y, v.x);
        const double perp = -std::sin(angle) * a.x + std::cos(angle) * a.y;
        EXPECT_NEAR(centripetal_accel(v, a), std::abs(perp), 1e-6);
    }
}

TEST(CentripetalAccel, StationaryUsesFullMagnitude) {
    EXPECT_DOUBLE_EQ(centripetal_accel({0.0, 0.0}, {3.0, 4.0}), 5.0);
    EXPECT_DOUBLE_EQ(centripetal_accel({5e-7, 0.0}, {3.0, 4.0}), 5.0);
    EXPECT_EQ(centripetal_accel({0.0, 0.0}, {0.0, 0.0}), 0.0);
}

TEST(CentripetalAccel, DependsOnlyOnDirection) {
    Rng rng(15);
    for (int n = 0; n < 500; ++n) {
        const Vec2 v{rng.uniform(-10, 10), rng.uniform(-10, 10)};
        const Vec2 a{rng.uniform(-5, 5), rng.uniform(-5, 5)};
        const double base = centripetal_accel(v, a);
        for (double k : {1e-3, 0.5, 7.0, 1e4}) {
            EXPECT_NEAR(centripetal_accel(k * v, a), base, 1e-12 * (1.0 + base));
        }
        EXPECT_GE(base, 0.0);
        EXPECT_LE(base, a.norm() * (1 + 1e-15));
    }
}

TEST(PowerInstantaneous, ReducesToLevelFlightExactly) {
    Rng rng(16);
    for (int n = 0; n < 100; ++n) {
        const auto p = random_params(rng);
        for (int i = 0; i <= 300; ++i) {
            const double v = i * 0.1;
            const auto a = power_instantaneous(v, 0.0, p);
            const auto b = power_level_flight(v, p);
            EXPECT_EQ(a.total, b.total);
            EXPECT_EQ(a.induced, b.induced);
        }
    }
}

TEST(PowerInstantaneous, Examples) {
    const auto p = reference_params();
    EXPECT_EQ(power_instantaneous(0.0, 0.0, p).total, p.c1 + p.c3);
    const auto b = power_instantaneous(4.0, 1.6, p);
    const auto ref = reference_power(4.0, 1.6, p);
    EXPECT_LT(rel_diff(b.total, ref.total.convert_to<double>()), 1e-14);
    EXPECT_LT(rel_diff(b.induced, ref.induced.convert_to<double>()), 1e-14);
}

TEST(PowerInstantaneous, StrictlyIncreasingInPerpendicularAccel) {
    const auto p = reference_params();
    for (double v : {0.0, 2.0, 8.0, 14.0}) {
        double prev = power_instantaneous(v, 0.0, p).total;
        for (int i = 1; i <= 200; ++i) {
            const double cur = power_instantaneous(v, i * 0.05, p).total;
            EXPECT_GT(cur, prev);
            prev = cur;
        }
    }
}

TEST(PowerInstantaneous, RejectsNegativeInputs) {
    const auto p = reference_params();
    EXPECT_THROW(power_instantaneous(-0.1, 0.0, p), InputError);
    EXPECT_THROW(power_instantaneous(1.0, -0.1, p), InputError);
}

TEST(PowerCircular, StraightLineLimit) {
    const auto p = reference_params();
    for (int i = 0; i <= 140; ++i) {
        const double v = i * 0.1;
        EXPECT_LT(rel_diff(power_circular(v, 1e9, p).total, power_level_flight(v, p).total), 1e-9);
    }
}

TEST(PowerCircular, HoverIgnoresRadius) {
    const auto p = reference_params();
    for (double r : {0.5, 10.0, 1e6}) EXPECT_EQ(power_circular(0.0, r, p).total, p.c1 + p.c3);
}

TEST(PowerCircular, TighterCircleCostsMore) {
    const auto p = reference_params();
    EXPECT_GT(power_circular(6.0, 10.0, p).total, power_circular(6.0, 20.0, p).total);
}

TEST(PowerCircular, NonIncreasingInRadius) {
    const auto p = reference_params();
    for (int i = 0; i <= 70; ++i) {
        const double v = i * 0.2;
        double prev = power_circular(v, 5.0, p).total;
        for (double r = 5.0; r <= 1e4; r *= 1.05) {
            const double cur = power_circular(v, r, p).total;
            EXPECT_LE(cur, prev);
            prev = cur;
        }
    }
}

TEST(PowerCircular, RadiusGapGrowsWithSpeed) {
    const auto p = reference_params();
    double prev = -1.0;
    for (int i = 0; i <= 500; ++i) {
        const double v = 1.0 + i * 0.01;
        const double gap = power_circular(v, 10.0, p).total - power_circular(v, 20.0, p).total;
        EXPECT_GE(gap, prev);
        prev = gap;
    }
}

TEST(PowerCircular, RejectsNonPositiveRadius) {
    EXPECT_THROW(power_circular(1.0, 0.0, reference_params()), InputError);
    EXPECT_THROW(power_circular(1.0, -3.0, reference_params()), InputError);
}

TEST(PowerFixedWing, Examples) {
    EXPECT_DOUBLE_EQ(power_fixed_wing(1.0, 1.0, 1.0), 2.0);
    EXPECT_THROW(power_fixed_wing(0.0, 1.0, 1.0), InputError);
    EXPECT_THROW(power_fixed_wing(1.0, 0.0, 1.0), InputError);
}

TEST(PowerFixedWing, MinimumMatchesGridScan) {
    const double cp = 0.02;
    const double ci = 400.0;
    const double analytic = std::pow(ci / (3.0 * cp), 0.25);
    double best_v = 0.0;
    double best_p = INFINITY;
    for (int i = 1; i <= 60000; ++i) {
        const double v = i * 1e-3;
        const double pw = power_fixed_wing(v, cp, ci);
        if (pw < best_p) {
            best_p = pw;
            best_v = v;
        }
    }
    EXPECT_NEAR(best_v, analytic, 1e-3);
}
