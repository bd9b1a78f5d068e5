#pragma once

// Maximum-endurance and maximum-range speeds of the level-flight model.

#include <cmath>
#include <functional>

#include "uavpower/power_model.hpp"

namespace uavpower {

struct SearchBracket {
    double lo = 1e-3;
    double hi = 30.0;
    double tolerance = 1e-4;
};

struct SpeedOptimum {
    double speed = 0.0;      ///< m/s
    double objective = 0.0;  ///< W for endurance, J/m for range
    bool interior = false;   ///< false when the minimum sits on the bracket edge
};

/// Golden-section minimization of a unimodal function on [lo, hi].
template <typename F>
double golden_section_minimize(F&& f, double lo, double hi, double tolerance) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo;
    double b = hi;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = f(x1);
    double f2 = f(x2);
    while (b - a > tolerance) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    return 0.5 * (a + b);
}

namespace detail {

template <typename F>
SpeedOptimum minimize_on_bracket(F&& objective, const SearchBracket& bracket) {
    SpeedOptimum out;
    out.speed = golden_section_minimize(objective, bracket.lo, bracket.hi, bracket.tolerance);
    out.objective = objective(out.speed);
    const double edge = 10.0 * bracket.tolerance;
    out.interior = out.speed - bracket.lo > edge && bracket.hi - out.speed > edge;
    return out;
}

}  // namespace detail

/// Speed minimizing power (longest flight time per joule).
inline SpeedOptimum v_max_endurance(const ModelParams& p, const SearchBracket& bracket = {}) {
    p.validate();
    return detail::minimize_on_bracket([&](double v) { return power_level_flight(v, p).total; }, bracket);
}

/// Speed minimizing energy per metre travelled.
inline SpeedOptimum v_max_range(const ModelParams& p, const SearchBracket& bracket = {}) {
    p.validate();
    return detail::minimize_on_bracket([&](double v) { return power_level_flight(v, p).total / v; }, bracket);
}

}  // namespace uavpower
