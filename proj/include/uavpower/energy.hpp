#pragma once

// Propulsion energy of an arbitrary planar level-flight trajectory: the
// instantaneous power (speed plus perpendicular acceleration) integrated over
// time, plus the net kinetic energy change between the end points.

#include <istream>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "uavpower/errors.hpp"
#include "uavpower/power_model.hpp"
#include "uavpower/text.hpp"

namespace uavpower {

struct TrajectorySample {
    double t = 0.0;
    Vec2 velocity;
    Vec2 accel;

    friend bool operator==(const TrajectorySample&, const TrajectorySample&) = default;
};

/// Time-ordered planar velocity/acceleration samples; at least two, with
/// strictly increasing timestamps.
class Trajectory2D {
public:
    Trajectory2D() = default;

    explicit Trajectory2D(std::vector<TrajectorySample> samples) : samples_(std::move(samples)) {
        if (samples_.size() < 2) {
            throw InputError("trajectory needs at least 2 samples");
        }
        for (std::size_t i = 1; i < samples_.size(); ++i) {
            if (!(samples_[i].t > samples_[i - 1].t)) {
                throw InputError("trajectory timestamps must be strictly increasing (sample " + std::to_string(i) +
                                 ")");
            }
        }
    }

    const std::vector<TrajectorySample>& samples() const noexcept { return samples_; }
    std::size_t size() const noexcept { return samples_.size(); }
    bool empty() const noexcept { return samples_.empty(); }
    double duration() const { return samples_.empty() ? 0.0 : samples_.back().t - samples_.front().t; }

    /// Samples [first, last] inclusive, as a trajectory of their own.
    Trajectory2D slice(std::size_t first, std::size_t last) const {
        return Trajectory2D(std::vector<TrajectorySample>(samples_.begin() + static_cast<std::ptrdiff_t>(first),
                                                          samples_.begin() + static_cast<std::ptrdiff_t>(last) + 1));
    }

private:
    std::vector<TrajectorySample> samples_;
};

struct EnergyBreakdown {
    double blade_profile = 0.0;  ///< J
    double induced = 0.0;
    double parasite = 0.0;
    double kinetic_delta = 0.0;
    double total = 0.0;
    double duration = 0.0;  ///< s

    double mean_power() const { return duration > 0.0 ? total / duration : 0.0; }
};

/// 0.5 m (v_end^2 - v_start^2); negative when the vehicle slows down.
inline double kinetic_delta(double mass, double v_start, double v_end) {
    if (!(mass > 0.0)) {
        throw InputError("mass must be positive");
    }
    if (!(v_start >= 0.0) || !(v_end >= 0.0)) {
        throw InputError("speeds must be non-negative");
    }
    return 0.5 * mass * (v_end * v_end - v_start * v_start);
}

/// Composite trapezoidal rule over the given samples, no resampling.
inline EnergyBreakdown trajectory_energy(const Trajectory2D& traj, const ModelParams& p) {
    if (traj.size() < 2) {
        throw InputError("trajectory needs at least 2 samples");
    }
    p.validate();
    const auto& s = traj.samples();

    EnergyBreakdown out;
    PowerBreakdown prev = power_instantaneous(s[0].velocity.norm(), centripetal_accel(s[0].velocity, s[0].accel), p);
    for (std::size_t i = 1; i < s.size(); ++i) {
        const PowerBreakdown cur =
            power_instantaneous(s[i].velocity.norm(), centripetal_accel(s[i].velocity, s[i].accel), p);
        const double half_dt = 0.5 * (s[i].t - s[i - 1].t);
        out.blade_profile += half_dt * (prev.blade_profile + cur.blade_profile);
        out.induced += half_dt * (prev.induced + cur.induced);
        out.parasite += half_dt * (prev.parasite + cur.parasite);
        prev = cur;
    }
    out.kinetic_delta = 0.5 * p.mass * (s.back().velocity.norm_squared() - s.front().velocity.norm_squared());
    out.total = out.blade_profile + out.induced + out.parasite + out.kinetic_delta;
    out.duration = traj.duration();
    return out;
}

// Trajectory files: '#' comment lines, then the header `t,vx,vy,ax,ay` and
// one comma-separated row per sample.

inline constexpr const char* kTrajectoryHeader = "t,vx,vy,ax,ay";

inline Trajectory2D parse_trajectory(std::istream& in) {
    std::string line;
    bool header_seen = false;
    std::size_t row = 0;
    std::vector<TrajectorySample> samples;
    while (std::getline(in, line)) {
        std::string_view view = text::trim(line);
        if (view.empty() || view.front() == '#') continue;
        if (!header_seen) {
            if (view != kTrajectoryHeader) {
                throw ParseError(std::string("expected trajectory header '") + kTrajectoryHeader + "'");
            }
            header_seen = true;
            continue;
        }
        ++row;
        auto fields = text::split(view, ',');
        if (fields.size() != 5) {
            throw ParseError("expected 5 columns, got " + std::to_string(fields.size()), row);
        }
        double v[5];
        for (int k = 0; k < 5; ++k) {
            auto parsed = text::parse_double(fields[static_cast<std::size_t>(k)]);
            if (!parsed) throw ParseError("unparseable number '" + std::string(fields[static_cast<std::size_t>(k)]) + "'", row);
            v[k] = *parsed;
        }
        if (!samples.empty() && !(v[0] > samples.back().t)) {
            throw ParseError("timestamps must be strictly increasing", row);
        }
        samples.push_back({v[0], {v[1], v[2]}, {v[3], v[4]}});
    }
    if (!header_seen) throw ParseError("empty trajectory file");
    if (samples.size() < 2) throw ParseError("trajectory needs at least 2 samples");
    return Trajectory2D(std::move(samples));
}

inline void write_trajectory(std::ostream& out, const Trajectory2D& traj) {
    out << kTrajectoryHeader << '\n';
    for (const auto& s : traj.samples()) {
        out << text::format_double(s.t) << ',' << text::format_double(s.velocity.x) << ','
            << text::format_double(s.velocity.y) << ',' << text::format_double(s.accel.x) << ','
            << text::format_double(s.accel.y) << '\n';
    }
}

}  // namespace uavpower
