#pragma once

// Synthetic flight logs with known ground truth.
//
// Straight round trips fly legs back and forth along the x axis: accelerate
// from rest at ramp_accel, cruise, decelerate to rest at the site edge,
// reverse. Circular scenarios fly a counter-clockwise circle about the
// origin at constant speed. Hover stays at the origin.
//
// Per-sample power is the instantaneous model power for the sample's speed and
// perpendicular acceleration plus a kinetic-power term. The kinetic energy
// gained over each sampling interval, 0.5 m (V_{j+1}^2 - V_j^2), is credited
// to the interval's accelerating end point (split evenly when both or neither
// accelerate) and converted to power with the trapezoidal weight of that
// sample. Inside a linear ramp this equals m V a exactly, cruise samples carry
// no kinetic term, and the trapezoidal energy of the log equals the model
// energy of the same trajectory including the kinetic-energy change.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "uavpower/energy.hpp"
#include "uavpower/errors.hpp"
#include "uavpower/flight_log.hpp"
#include "uavpower/power_model.hpp"
#include "uavpower/preprocess.hpp"
#include "uavpower/random.hpp"

namespace uavpower {

enum class ScenarioKind { straight_round_trip, circular, hover };

inline std::string_view to_string(ScenarioKind k) {
    switch (k) {
        case ScenarioKind::straight_round_trip: return "straight";
        case ScenarioKind::circular: return "circular";
        case ScenarioKind::hover: return "hover";
    }
    return "?";
}

struct NoiseSpec {
    double speed_std = 0.15;  ///< m/s
    double power_std = 5.0;   ///< W
};

struct ScenarioSpec {
    ScenarioKind kind = ScenarioKind::straight_round_trip;
    double target_speed = 10.0;  ///< m/s
    double site_length = 200.0;  ///< m, straight only
    double radius = 10.0;        ///< m, circular only
    double duration = 120.0;     ///< s of flight, excluding take-off and landing
    double ramp_accel = 2.0;     ///< m/s^2
    double sample_rate = 5.0;    ///< Hz
    double takeoff = 0.0;        ///< s of hover before the flight
    double landing = 0.0;        ///< s of hover after it
    double altitude = 30.0;      ///< m, metadata only
    NoiseSpec noise;
    std::uint64_t seed = 1;

    void validate() const {
        auto finite = [](double v) { return std::isfinite(v); };
        if (!finite(target_speed) || target_speed < 0.0) throw InputError("target speed must be non-negative");
        if (!finite(duration) || !(duration > 0.0)) throw InputError("duration must be positive");
        if (!finite(sample_rate) || !(sample_rate > 0.0)) throw InputError("sample rate must be positive");
        if (!(noise.speed_std >= 0.0) || !(noise.power_std >= 0.0)) throw InputError("noise stds must be >= 0");
        if (!(takeoff >= 0.0) || !(landing >= 0.0)) throw InputError("take-off/landing durations must be >= 0");
        const bool moves = kind != ScenarioKind::hover && target_speed > 0.0;
        const bool ramps = kind == ScenarioKind::straight_round_trip ||
                           (kind == ScenarioKind::circular && (takeoff > 0.0 || landing > 0.0));
        if (moves && ramps && !(ramp_accel > 0.0)) throw InputError("ramp acceleration must be positive");
        if (kind == ScenarioKind::circular && !(radius > 0.0)) throw InputError("circular scenario needs radius > 0");
        if (kind == ScenarioKind::straight_round_trip && moves) {
            const double ramp_distance = target_speed * target_speed / ramp_accel;
            if (!(site_length > ramp_distance)) {
                throw InputError("site length " + std::to_string(site_length) + " m is too short to reach " +
                                 std::to_string(target_speed) + " m/s and stop (needs > " +
                                 std::to_string(ramp_distance) + " m)");
            }
        }
    }
};

struct LabeledLog {
    FlightLog log;  ///< log.phases holds one label per sample
    ModelParams true_params;
    Trajectory2D trajectory;  ///< noise-free kinematics at the sample times

    const std::vector<Phase>& labels() const { return log.phases; }
};

namespace detail {

struct Segment {
    Phase phase = Phase::cruise;
    double t0 = 0.0;
    double t1 = 0.0;
    double v0 = 0.0;
    double accel = 0.0;  ///< rate of change of speed
    double dir = 1.0;    ///< straight: +1 / -1 along x
    double s0 = 0.0;     ///< arc length at segment start
    Vec2 origin;         ///< straight/hover: position at segment start

    double arc(double tau) const { return v0 * tau + 0.5 * accel * tau * tau; }
};

class SegmentBuilder {
public:
    void add(Phase phase, double length, double v0, double accel, double dir) {
        if (!(length > 0.0)) return;
        Segment s;
        s.phase = phase;
        s.t0 = clock_;
        s.t1 = clock_ + length;
        s.v0 = v0;
        s.accel = accel;
        s.dir = dir;
        s.s0 = arc_;
        s.origin = position_;
        const double d = s.arc(length);
        arc_ += d;
        position_.x += dir * d;
        clock_ = s.t1;
        segments_.push_back(s);
    }

    double clock() const { return clock_; }
    std::vector<Segment> take() { return std::move(segments_); }

private:
    std::vector<Segment> segments_;
    double clock_ = 0.0;
    double arc_ = 0.0;
    Vec2 position_;
};

inline std::vector<Segment> build_segments(const ScenarioSpec& spec) {
    SegmentBuilder b;
    b.add(Phase::takeoff, spec.takeoff, 0.0, 0.0, 1.0);
    const double v = spec.target_speed;
    const double a = spec.ramp_accel;

    if (spec.kind == ScenarioKind::hover || v == 0.0) {
        b.add(Phase::cruise, spec.duration, 0.0, 0.0, 1.0);
    } else if (spec.kind == ScenarioKind::circular) {
        if (spec.takeoff > 0.0) b.add(Phase::ramp, v / a, 0.0, a, 1.0);
        b.add(Phase::cruise, spec.duration, v, 0.0, 1.0);
        if (spec.landing > 0.0) b.add(Phase::ramp, v / a, v, -a, 1.0);
    } else {
        const double ramp_time = v / a;
        const double full_cruise = (spec.site_length - v * v / a) / v;
        double remaining = spec.duration;
        std::vector<double> cruises;
        while (remaining > 2.0 * ramp_time) {
            const double c = std::min(full_cruise, remaining - 2.0 * ramp_time);
            cruises.push_back(c);
            remaining -= 2.0 * ramp_time + c;
        }
        if (cruises.empty()) cruises.push_back(std::min(full_cruise, spec.duration));
        for (std::size_t leg = 0; leg < cruises.size(); ++leg) {
            const double dir = leg % 2 == 0 ? 1.0 : -1.0;
            b.add(leg == 0 ? Phase::ramp : Phase::turnaround, ramp_time, 0.0, a, dir);
            b.add(Phase::cruise, cruises[leg], v, 0.0, dir);
            b.add(leg + 1 == cruises.size() ? Phase::ramp : Phase::turnaround, ramp_time, v, -a, dir);
        }
    }
    b.add(Phase::landing, spec.landing, 0.0, 0.0, 1.0);
    return b.take();
}

struct KinematicState {
    Vec2 position;
    Vec2 velocity;
    Vec2 accel;
    double speed = 0.0;
    double tangential = 0.0;
    Phase phase = Phase::cruise;
};

inline KinematicState evaluate(const Segment& seg, double t, const ScenarioSpec& spec) {
    const double tau = std::clamp(t - seg.t0, 0.0, seg.t1 - seg.t0);
    KinematicState k;
    k.phase = seg.phase;
    k.speed = std::max(0.0, seg.v0 + seg.accel * tau);
    k.tangential = seg.accel;
    if (spec.kind == ScenarioKind::circular) {
        const double theta = (seg.s0 + seg.arc(tau)) / spec.radius;
        const Vec2 radial{std::cos(theta), std::sin(theta)};
        const Vec2 tangent{-radial.y, radial.x};
        k.position = spec.radius * radial;
        k.velocity = k.speed * tangent;
        k.accel = seg.accel * tangent + (-k.speed * k.speed / spec.radius) * radial;
    } else {
        k.position = Vec2{seg.origin.x + seg.dir * seg.arc(tau), seg.origin.y};
        k.velocity = Vec2{seg.dir * k.speed, 0.0};
        k.accel = Vec2{seg.dir * seg.accel, 0.0};
    }
    return k;
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace detail

inline LabeledLog generate(const ScenarioSpec& spec, const ModelParams& p) {
    spec.validate();
    p.validate();
    const auto segments = detail::build_segments(spec);
    const double end_time = segments.back().t1;
    const auto count = static_cast<std::size_t>(std::floor(end_time * spec.sample_rate + 1e-9)) + 1;
    if (count < 2) throw InputError("scenario is shorter than one sampling period");

    std::vector<detail::KinematicState> states;
    states.reserve(count);
    std::size_t seg = 0;
    for (std::size_t k = 0; k < count; ++k) {
        const double t = static_cast<double>(k) / spec.sample_rate;
        while (seg + 1 < segments.size() && t >= segments[seg].t1) ++seg;
        states.push_back(detail::evaluate(segments[seg], t, spec));
    }

    // Kinetic energy per interval, credited to the accelerating end point.
    const double dt = 1.0 / spec.sample_rate;
    std::vector<double> credited(count, 0.0);
    for (std::size_t j = 0; j + 1 < count; ++j) {
        const double gain = states[j + 1].speed * states[j + 1].speed - states[j].speed * states[j].speed;
        const bool left = states[j].tangential != 0.0;
        const bool right = states[j + 1].tangential != 0.0;
        if (left && !right) {
            credited[j] += gain;
        } else if (right && !left) {
            credited[j + 1] += gain;
        } else {
            credited[j] += 0.5 * gain;
            credited[j + 1] += 0.5 * gain;
        }
    }

    LabeledLog out;
    out.true_params = p;
    out.log.sample_rate = spec.sample_rate;
    out.log.meta.target_speed = spec.target_speed;
    if (spec.kind == ScenarioKind::circular) out.log.meta.radius = spec.radius;
    out.log.meta.altitude = spec.altitude;
    out.log.samples.reserve(count);
    out.log.phases.reserve(count);

    Rng rng(spec.seed);
    std::vector<TrajectorySample> traj;
    traj.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        const auto& st = states[k];
        const double t = static_cast<double>(k) / spec.sample_rate;
        const double weight = (k == 0 || k + 1 == count) ? 0.5 * dt : dt;
        const double kinetic = 0.5 * p.mass * credited[k] / weight;
        const double power = power_instantaneous(st.speed, centripetal_accel(st.velocity, st.accel), p).total + kinetic;

        const double speed_noise = rng.normal() * spec.noise.speed_std;
        const double power_noise = rng.normal() * spec.noise.power_std;

        FlightSample s;
        s.t = t;
        s.x = st.position.x;
        s.y = st.position.y;
        s.speed = std::max(0.0, st.speed + speed_noise);
        s.power = std::max(0.0, power + power_noise);
        out.log.samples.push_back(s);
        out.log.phases.push_back(st.phase);
        traj.push_back({t, st.velocity, st.accel});
    }
    out.trajectory = Trajectory2D(std::move(traj));
    return out;
}

/// Number of cruise-labeled samples that pass the steady-flight filter.
inline std::size_t steady_cruise_count(const FlightLog& log, double a_max = kSteadyAccelThreshold) {
    std::size_t n = 0;
    for (std::size_t i : steady_indices(log, a_max)) {
        if (log.phases.empty() || log.phases[i] == Phase::cruise) ++n;
    }
    return n;
}

struct SweepOptions {
    double site_length = 200.0;
    double ramp_accel = 2.0;
    double sample_rate = 5.0;
    double a_max = kSteadyAccelThreshold;
};

/// One straight round-trip log per speed, each just long enough that at
/// least `per_speed_budget` cruise samples survive the steady filter.
inline std::vector<LabeledLog> generate_speed_sweep(std::span<const double> speeds, std::size_t per_speed_budget,
                                                    const ModelParams& p, const NoiseSpec& noise, std::uint64_t seed,
                                                    const SweepOptions& opts = {}) {
    if (per_speed_budget < 1) throw InputError("per-speed budget must be at least 1");
    std::vector<LabeledLog> out;
    out.reserve(speeds.size());
    for (std::size_t i = 0; i < speeds.size(); ++i) {
        ScenarioSpec spec;
        spec.kind = ScenarioKind::straight_round_trip;
        spec.target_speed = speeds[i];
        spec.site_length = opts.site_length;
        spec.ramp_accel = opts.ramp_accel;
        spec.sample_rate = opts.sample_rate;
        spec.noise = noise;
        spec.seed = detail::mix_seed(seed, i);

        const double budget = static_cast<double>(per_speed_budget);
        // Fraction of flight time spent cruising, ignoring the filter.
        double cruise_fraction = 1.0;
        if (spec.target_speed > 0.0) {
            const double ramp_time = spec.target_speed / spec.ramp_accel;
            const double cruise = (spec.site_length - spec.target_speed * spec.target_speed / spec.ramp_accel) /
                                  spec.target_speed;
            cruise_fraction = cruise / (cruise + 2.0 * ramp_time);
        }
        spec.duration = budget / spec.sample_rate / cruise_fraction;

        LabeledLog log = generate(spec, p);
        std::size_t have = steady_cruise_count(log.log, opts.a_max);
        for (int attempt = 0; have < per_speed_budget; ++attempt) {
            if (attempt > 200) throw NumericalError("speed sweep could not reach the per-speed budget");
            const double survival = std::max(static_cast<double>(have), 1.0) /
                                    (spec.duration * spec.sample_rate * cruise_fraction);
            const double missing = budget - static_cast<double>(have);
            spec.duration += std::max(missing / spec.sample_rate / cruise_fraction / std::min(survival, 1.0),
                                      1.0 / spec.sample_rate);
            log = generate(spec, p);
            have = steady_cruise_count(log.log, opts.a_max);
        }
        out.push_back(std::move(log));
    }
    return out;
}

}  // namespace uavpower
