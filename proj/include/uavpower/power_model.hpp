#pragma once

// Closed-form propulsion power of a rotary-wing UAV in level flight.
//
// Level flight at speed V:
//
//   P(V) = c1 (1 + c2 V^2)                                  blade profile
//        + c3 (sqrt(1 + V^4 / c4^2) - V^2 / c4)^(1/2)        induced
//        + c5 V^3                                           parasite
//
// With a perpendicular (heading-changing) acceleration a_perp the induced
// term becomes c3 sqrt(k) (sqrt(k + V^4 / c4^2) - V^2 / c4)^(1/2) where
// k = 1 + a_perp^2 / g^2. Blade-profile and parasite terms are unchanged.
// All quantities are SI.

#include <cmath>
#include <limits>
#include <string>

#include "uavpower/errors.hpp"

namespace uavpower {

struct ModelParams {
    double c1 = 0.0;  ///< blade-profile base power [W]
    double c2 = 0.0;  ///< blade-profile speed-squared coefficient [s^2/m^2]
    double c3 = 0.0;  ///< induced base power [W]
    double c4 = 0.0;  ///< induced speed scale [m^2/s^2]
    double c5 = 0.0;  ///< parasite coefficient [W s^3/m^3]
    double mass = 3.0;
    double g = 9.81;

    bool valid() const noexcept {
        auto pos = [](double v) { return std::isfinite(v) && v > 0.0; };
        return pos(c1) && pos(c2) && pos(c3) && pos(c4) && pos(c5) && pos(mass) && pos(g);
    }

    void validate() const {
        if (!valid()) {
            throw InputError("model parameters must be finite and strictly positive");
        }
    }

    friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// Stand-in parameter set for a ~3 kg quadrotor (1.64 kg airframe plus
/// 1.36 kg battery). Hover draws 185 W and level flight stays inside
/// [154, 582] W for 0 <= V <= 14 m/s. Not fitted to any real airframe; the
/// values were picked so that all five coefficients stay identifiable from
/// noisy speed-sweep data. tests/fixtures/reference_params.txt mirrors it.
inline constexpr ModelParams reference_params() {
    return ModelParams{88.0, 0.02, 97.0, 5.0, 0.05, 3.0, 9.81};
}

struct PowerBreakdown {
    double blade_profile = 0.0;
    double induced = 0.0;
    double parasite = 0.0;
    double total = 0.0;
};

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    double dot(const Vec2& o) const noexcept { return x * o.x + y * o.y; }
    double norm_squared() const noexcept { return dot(*this); }
    double norm() const noexcept { return std::hypot(x, y); }

    friend Vec2 operator*(double k, const Vec2& v) noexcept { return {k * v.x, k * v.y}; }
    friend Vec2 operator+(const Vec2& a, const Vec2& b) noexcept { return {a.x + b.x, a.y + b.y}; }
    friend bool operator==(const Vec2&, const Vec2&) = default;
};

/// Below this speed the heading is undefined and all of `a` is treated as
/// perpendicular.
inline constexpr double kStationarySpeed = 1e-6;

namespace detail {

// Shared by level-flight and perpendicular-acceleration evaluation so that
// a_perp = 0 reproduces level flight bit for bit (k is exactly 1 then).
inline PowerBreakdown evaluate_power(double speed, double load_factor_sq, const ModelParams& p) {
    const double v2 = speed * speed;
    const double x = v2 / p.c4;
    // sqrt(k + x^2) - x, rewritten to avoid cancellation at high speed.
    const double inner = load_factor_sq / (std::sqrt(load_factor_sq + x * x) + x);
    if (!(inner > 0.0)) {
        throw NumericalError("induced-power radicand is not positive (speed " + std::to_string(speed) + ")");
    }
    PowerBreakdown out;
    out.blade_profile = p.c1 * (1.0 + p.c2 * v2);
    out.induced = p.c3 * std::sqrt(load_factor_sq) * std::sqrt(inner);
    out.parasite = p.c5 * v2 * speed;
    out.total = out.blade_profile + out.induced + out.parasite;
    if (!std::isfinite(out.total)) {
        throw NumericalError("power evaluated to a non-finite value");
    }
    return out;
}

inline void require_speed(double speed) {
    if (!(speed >= 0.0) || !std::isfinite(speed)) {
        throw InputError("speed must be finite and non-negative");
    }
}

}  // namespace detail

inline PowerBreakdown power_level_flight(double speed, const ModelParams& p) {
    detail::require_speed(speed);
    p.validate();
    return detail::evaluate_power(speed, 1.0, p);
}

/// Power drawn while hovering, c1 + c3.
inline double hover_power(const ModelParams& p) {
    p.validate();
    return p.c1 + p.c3;
}

/// Magnitude of the component of `accel` perpendicular to `velocity`.
inline double centripetal_accel(const Vec2& velocity, const Vec2& accel) {
    const double speed = velocity.norm();
    const double a2 = accel.norm_squared();
    if (speed < kStationarySpeed) {
        return std::sqrt(a2);
    }
    // Unit direction first so the result only depends on the heading.
    const Vec2 dir = (1.0 / speed) * velocity;
    const double along = accel.dot(dir);
    const double perp2 = a2 - along * along;
    return perp2 > 0.0 ? std::sqrt(perp2) : 0.0;
}

inline PowerBreakdown power_instantaneous(double speed, double a_perp, const ModelParams& p) {
    detail::require_speed(speed);
    if (!(a_perp >= 0.0) || !std::isfinite(a_perp)) {
        throw InputError("perpendicular acceleration must be finite and non-negative");
    }
    p.validate();
    const double r = a_perp / p.g;
    return detail::evaluate_power(speed, 1.0 + r * r, p);
}

/// Uniform circular level flight; a_perp = V^2 / r.
inline PowerBreakdown power_circular(double speed, double radius, const ModelParams& p) {
    if (!(radius > 0.0)) {
        throw InputError("circle radius must be positive");
    }
    detail::require_speed(speed);
    return power_instantaneous(speed, speed * speed / radius, p);
}

/// Two-term fixed-wing model: parasite power cubic in speed, induced power
/// inversely proportional to it. Undefined at V = 0.
inline double power_fixed_wing(double speed, double c_parasite, double c_induced) {
    if (!(speed > 0.0) || !std::isfinite(speed)) {
        throw InputError("fixed-wing power requires a positive speed");
    }
    if (!(c_parasite > 0.0) || !(c_induced > 0.0)) {
        throw InputError("fixed-wing coefficients must be positive");
    }
    return c_parasite * speed * speed * speed + c_induced / speed;
}

}  // namespace uavpower
