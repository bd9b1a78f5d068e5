#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"

using namespace uavpower;

namespace {

template <typename F>
double grid_argmin(F&& f, double lo, double hi, double step) {
    double best_v = lo;
    double best = INFINITY;
    const auto n = static_cast<int>(std::llround((hi - lo) / step));
    for (int i = 0; i <= n; ++i) {
        const double v = lo + i * step;
        const double y = f(v);
        if (y < best) {
            best = y;
            best_v = v;
        }
    }
    return best_v;
}

}  // namespace

TEST(GoldenSection, FindsParabolaMinimum) {
    const double x = golden_section_minimize([](double v) { return (v - 2.5) * (v - 2.5); }, 0.0, 10.0, 1e-8);
    EXPECT_NEAR(x, 2.5, 1e-7);
}

TEST(OptimalSpeed, EnduranceMatchesGridOracle) {
    const auto p = reference_params();
    const auto opt = v_max_endurance(p);
    const double grid = grid_argmin([&](double v) { return power_level_flight(v, p).total; }, 0.0, 30.0, 1e-3);
    EXPECT_NEAR(opt.speed, grid, 0.01);
    EXPECT_TRUE(opt.interior);
    EXPECT_DOUBLE_EQ(opt.objective, power_level_flight(opt.speed, p).total);
}

TEST(OptimalSpeed, RangeMatchesGridOracle) {
    const auto p = reference_params();
    const auto opt = v_max_range(p);
    const double grid =
        grid_argmin([&](double v) { return power_level_flight(v, p).total / v; }, 1e-3, 30.0, 1e-3);
    EXPECT_NEAR(opt.speed, grid, 0.01);
    EXPECT_TRUE(opt.interior);
}

TEST(OptimalSpeed, EnduranceSlowerThanRange) {
    const auto p = reference_params();
    EXPECT_LT(v_max_endurance(p).speed, v_max_range(p).speed);
}

TEST(OptimalSpeed, EnduranceIsStationary) {
    const auto p = reference_params();
    const double v = v_max_endurance(p).speed;
    const double h = 1e-3;
    const double slope =
        (power_level_flight(v + h, p).total - power_level_flight(v - h, p).total) / (2.0 * h);
    // 1e-4 m/s of position error times a curvature of ~25 W/(m/s)^2.
    EXPECT_LT(std::abs(slope), 1e-2);
}

TEST(OptimalSpeed, PureParasiteIsBoundaryCase) {
    const ModelParams p{1e-300, 0.01, 1e-300, 5.0, 1.0};
    const auto opt = v_max_endurance(p);
    EXPECT_FALSE(opt.interior);
    EXPECT_LT(opt.speed, 1e-2);
}

TEST(OptimalSpeed, RangeIsInteriorWheneverHoverPowerPositive) {
    Rng rng(21);
    for (int n = 0; n < 30; ++n) {
        const auto p = testing_support::random_params(rng);
        EXPECT_TRUE(v_max_range(p).interior);
    }
}

TEST(OptimalSpeed, MoreParasiteDragLowersRangeSpeed) {
    auto p = reference_params();
    const double base = v_max_range(p).speed;
    p.c5 *= 2.0;
    const double heavier = v_max_range(p).speed;
    EXPECT_LT(heavier, base);
    const double grid_base =
        grid_argmin([&](double v) { return power_level_flight(v, reference_params()).total / v; }, 1e-3, 30.0, 1e-3);
    const double grid_heavier =
        grid_argmin([&](double v) { return power_level_flight(v, p).total / v; }, 1e-3, 30.0, 1e-3);
    EXPECT_LT(grid_heavier, grid_base);
}
