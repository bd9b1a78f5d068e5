#pragma once

// Turns raw telemetry into steady-flight (speed, power) points.

#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "uavpower/errors.hpp"
#include "uavpower/flight_log.hpp"
#include "uavpower/text.hpp"

namespace uavpower {

inline constexpr double kSteadyAccelThreshold = 0.5;  // m/s^2

/// Finite-difference acceleration per adjacent sample pair,
/// a_i = (V_{i+1} - V_i) * f_s. One entry fewer than the log has samples.
inline std::vector<double> estimate_accels(const FlightLog& log) {
    if (log.samples.size() < 2) {
        throw InputError("acceleration estimate needs at least 2 samples");
    }
    std::vector<double> out;
    out.reserve(log.samples.size() - 1);
    for (std::size_t i = 0; i + 1 < log.samples.size(); ++i) {
        out.push_back((log.samples[i + 1].speed - log.samples[i].speed) * log.sample_rate);
    }
    return out;
}

/// Indices of samples whose every adjacent interval has |a| <= a_max.
inline std::vector<std::size_t> steady_indices(const FlightLog& log, double a_max = kSteadyAccelThreshold) {
    std::vector<std::size_t> out;
    if (log.samples.size() < 2) return out;
    const auto accels = estimate_accels(log);
    const std::size_t n = log.samples.size();
    for (std::size_t i = 0; i < n; ++i) {
        const bool left_ok = i == 0 || std::abs(accels[i - 1]) <= a_max;
        const bool right_ok = i + 1 == n || std::abs(accels[i]) <= a_max;
        if (left_ok && right_ok) out.push_back(i);
    }
    return out;
}

inline std::vector<SpeedPowerPoint> filter_steady(const FlightLog& log, double a_max = kSteadyAccelThreshold) {
    std::vector<SpeedPowerPoint> out;
    for (std::size_t i : steady_indices(log, a_max)) {
        out.push_back({log.samples[i].speed, log.samples[i].power});
    }
    return out;
}

/// Drops the first `head_s` and last `tail_s` seconds (take-off and landing).
inline FlightLog trim_transients(const FlightLog& log, double head_s, double tail_s) {
    if (!(head_s >= 0.0) || !(tail_s >= 0.0)) {
        throw InputError("trim durations must be non-negative");
    }
    if (head_s == 0.0 && tail_s == 0.0) return log;
    if (!(head_s + tail_s < log.duration())) {
        throw InputError("trim durations exceed the log duration");
    }
    // Sample times are multiples of 1/f_s computed in floating point; keep
    // samples sitting on the cut within a small fraction of a period.
    const double slack = 1e-6 / log.sample_rate;
    const double lo = log.samples.front().t + head_s - slack;
    const double hi = log.samples.back().t - tail_s + slack;

    FlightLog out = log;
    out.samples.clear();
    out.phases.clear();
    for (std::size_t i = 0; i < log.samples.size(); ++i) {
        const double t = log.samples[i].t;
        if (t >= lo && t <= hi) {
            out.samples.push_back(log.samples[i]);
            if (!log.phases.empty()) out.phases.push_back(log.phases[i]);
        }
    }
    if (out.samples.empty()) {
        throw InputError("trim removes the whole log");
    }
    return out;
}

struct SpeedBin {
    double lo = 0.0;  ///< inclusive, m/s
    double hi = 0.0;  ///< exclusive
    std::size_t count = 0;
    double mean_power = 0.0;
};

/// Histogram over [k w, (k+1) w); only populated bins, ascending.
inline std::vector<SpeedBin> bin_by_speed(std::span<const SpeedPowerPoint> points, double bin_width = 1.0) {
    if (!(bin_width > 0.0)) {
        throw InputError("bin width must be positive");
    }
    std::map<long long, std::pair<std::size_t, double>> acc;
    for (const auto& p : points) {
        auto& slot = acc[static_cast<long long>(std::floor(p.speed / bin_width))];
        slot.first += 1;
        slot.second += p.power;
    }
    std::vector<SpeedBin> out;
    out.reserve(acc.size());
    for (const auto& [k, v] : acc) {
        out.push_back({static_cast<double>(k) * bin_width, static_cast<double>(k + 1) * bin_width, v.first,
                       v.second / static_cast<double>(v.first)});
    }
    return out;
}

// Points files: '#' comments, header `speed,power`, one row per point.

inline void write_points(std::ostream& out, std::span<const SpeedPowerPoint> points) {
    out << "speed,power\n";
    for (const auto& p : points) {
        out << text::format_double(p.speed) << ',' << text::format_double(p.power) << '\n';
    }
}

inline std::vector<SpeedPowerPoint> parse_points(std::istream& in) {
    std::vector<SpeedPowerPoint> out;
    std::string line;
    bool header_seen = false;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        std::string_view view = text::trim(line);
        if (view.empty() || view.front() == '#') continue;
        if (!header_seen) {
            if (view != "speed,power") throw ParseError("expected header 'speed,power'");
            header_seen = true;
            continue;
        }
        ++row;
        auto fields = text::split(view, ',');
        if (fields.size() != 2) throw ParseError("expected 2 columns", row);
        auto speed = text::parse_double(fields[0]);
        auto power = text::parse_double(fields[1]);
        if (!speed || !power) throw ParseError("unparseable number", row);
        if (*speed < 0.0) throw ParseError("negative speed", row);
        if (!(*power > 0.0)) throw ParseError("power must be positive", row);
        out.push_back({*speed, *power});
    }
    if (!header_seen) throw ParseError("points file is empty");
    return out;
}

inline void write_histogram(std::ostream& out, std::span<const SpeedBin> bins) {
    out << "bin_lo,bin_hi,count,mean_power\n";
    for (const auto& b : bins) {
        out << text::format_double(b.lo) << ',' << text::format_double(b.hi) << ',' << b.count << ','
            << text::format_double(b.mean_power) << '\n';
    }
}

}  // namespace uavpower
