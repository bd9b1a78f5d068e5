#pragma once

// Flight telemetry logs and their text dialect.
//
//   # <free comment lines, kept verbatim>
//   # sample_rate_hz=5
//   # target_speed_mps=10
//   # radius_m=20
//   # altitude_m=30
//   # phases=takeoff*40,cruise*300,landing*40
//   t,x,y,speed,voltage,current,power
//   0,0,0,0,,,185
//
// x, y, voltage and current may be empty. Power may be empty when voltage
// and current are present; it is then computed as voltage * current.
// `write_log` emits the canonical form: free comments first, then the known
// metadata keys in the order above, then the table with every power filled
// in. Parsing canonical text and writing it back is byte-identical.

#include <algorithm>
#include <cmath>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "uavpower/errors.hpp"
#include "uavpower/text.hpp"

namespace uavpower {

enum class Phase { takeoff, ramp, cruise, turnaround, landing };

inline std::string_view to_string(Phase p) {
    switch (p) {
        case Phase::takeoff: return "takeoff";
        case Phase::ramp: return "ramp";
        case Phase::cruise: return "cruise";
        case Phase::turnaround: return "turnaround";
        case Phase::landing: return "landing";
    }
    return "?";
}

inline std::optional<Phase> parse_phase(std::string_view s) {
    for (Phase p : {Phase::takeoff, Phase::ramp, Phase::cruise, Phase::turnaround, Phase::landing}) {
        if (to_string(p) == s) return p;
    }
    return std::nullopt;
}

struct FlightSample {
    double t = 0.0;
    std::optional<double> x;
    std::optional<double> y;
    double speed = 0.0;
    std::optional<double> voltage;
    std::optional<double> current;
    double power = 0.0;

    friend bool operator==(const FlightSample&, const FlightSample&) = default;
};

struct FlightLogMeta {
    std::optional<double> target_speed;  ///< m/s
    std::optional<double> radius;        ///< m; none for straight flight
    std::optional<double> altitude;      ///< m

    friend bool operator==(const FlightLogMeta&, const FlightLogMeta&) = default;
};

struct FlightLog {
    std::vector<FlightSample> samples;
    double sample_rate = 5.0;  ///< Hz
    FlightLogMeta meta;
    /// Optional ground-truth phase per sample (empty when unknown).
    std::vector<Phase> phases;
    /// Free-form '#' lines (without the leading "# ") carried through I/O.
    std::vector<std::string> comments;

    double duration() const { return samples.size() < 2 ? 0.0 : samples.back().t - samples.front().t; }

    friend bool operator==(const FlightLog&, const FlightLog&) = default;
};

/// A steady-flight (speed, power) observation.
struct SpeedPowerPoint {
    double speed = 0.0;
    double power = 0.0;

    friend bool operator==(const SpeedPowerPoint&, const SpeedPowerPoint&) = default;
};

/// Checks the log invariants; throws InputError naming the first offending
/// sample (1-based).
inline void validate(const FlightLog& log) {
    if (!(log.sample_rate > 0.0) || !std::isfinite(log.sample_rate)) {
        throw InputError("sample rate must be positive");
    }
    if (log.samples.empty()) {
        throw InputError("flight log has no samples");
    }
    if (!log.phases.empty() && log.phases.size() != log.samples.size()) {
        throw InputError("phase label count does not match sample count");
    }
    const double dt = 1.0 / log.sample_rate;
    for (std::size_t i = 0; i < log.samples.size(); ++i) {
        const auto& s = log.samples[i];
        const std::string where = "sample " + std::to_string(i + 1) + ": ";
        if (!(s.speed >= 0.0)) throw InputError(where + "speed must be non-negative");
        if (!(s.power >= 0.0)) throw InputError(where + "power must be non-negative");
        if (s.voltage && !(*s.voltage >= 0.0)) throw InputError(where + "voltage must be non-negative");
        if (s.current && !(*s.current >= 0.0)) throw InputError(where + "current must be non-negative");
        if (i > 0) {
            const double step = s.t - log.samples[i - 1].t;
            if (!(step > 0.0)) throw InputError(where + "timestamps must be strictly increasing");
            if (std::abs(step - dt) > 0.1 * dt) {
                throw InputError(where + "sample spacing deviates more than 10% from 1/sample_rate");
            }
        }
    }
}

namespace detail {

inline constexpr std::string_view kLogHeader = "t,x,y,speed,voltage,current,power";

inline std::string encode_phases(const std::vector<Phase>& phases) {
    std::string out;
    std::size_t i = 0;
    while (i < phases.size()) {
        std::size_t j = i;
        while (j < phases.size() && phases[j] == phases[i]) ++j;
        if (!out.empty()) out += ',';
        out += to_string(phases[i]);
        out += '*';
        out += std::to_string(j - i);
        i = j;
    }
    return out;
}

inline std::vector<Phase> decode_phases(std::string_view s) {
    std::vector<Phase> out;
    if (text::trim(s).empty()) return out;
    for (auto run : text::split(s, ',')) {
        auto star = run.find('*');
        if (star == std::string_view::npos) throw ParseError("bad phases entry '" + std::string(run) + "'");
        auto phase = parse_phase(text::trim(run.substr(0, star)));
        auto count = text::parse_int(run.substr(star + 1));
        if (!phase || !count || *count <= 0) throw ParseError("bad phases entry '" + std::string(run) + "'");
        out.insert(out.end(), static_cast<std::size_t>(*count), *phase);
    }
    return out;
}

inline std::string optional_field(const std::optional<double>& v) {
    return v ? text::format_double(*v) : std::string();
}

}  // namespace detail

/// Reads a log in the dialect above. Power/voltage*current mismatches above
/// 5% are reported through `warnings` when given.
inline FlightLog parse_log(std::istream& in, std::vector<std::string>* warnings = nullptr) {
    FlightLog log;
    std::optional<double> sample_rate;
    std::string line;
    bool header_seen = false;
    std::size_t row = 0;

    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!header_seen) {
            if (line.empty()) continue;
            if (line.front() == '#') {
                std::string_view body = line;
                body.remove_prefix(1);
                if (!body.empty() && body.front() == ' ') body.remove_prefix(1);
                const auto eq = body.find('=');
                const std::string_view key = eq == std::string_view::npos ? std::string_view{} : body.substr(0, eq);
                const std::string_view value = eq == std::string_view::npos ? std::string_view{} : body.substr(eq + 1);
                auto number = [&]() {
                    auto v = text::parse_double(value);
                    if (!v) throw ParseError("metadata '" + std::string(key) + "' is not a number");
                    return *v;
                };
                if (key == "sample_rate_hz") {
                    sample_rate = number();
                } else if (key == "target_speed_mps") {
                    log.meta.target_speed = number();
                } else if (key == "radius_m") {
                    log.meta.radius = number();
                } else if (key == "altitude_m") {
                    log.meta.altitude = number();
                } else if (key == "phases") {
                    log.phases = detail::decode_phases(value);
                } else {
                    log.comments.emplace_back(body);
                }
                continue;
            }
            if (line != detail::kLogHeader) {
                throw ParseError("expected header '" + std::string(detail::kLogHeader) + "'");
            }
            header_seen = true;
            continue;
        }

        if (line.empty()) continue;
        ++row;
        auto fields = text::split(line, ',');
        if (fields.size() != 7) {
            throw ParseError("expected 7 columns, got " + std::to_string(fields.size()), row);
        }
        auto required = [&](std::size_t k, const char* name) {
            auto v = text::parse_double(fields[k]);
            if (!v) throw ParseError(std::string("missing or unparseable ") + name + " '" + std::string(fields[k]) + "'", row);
            return *v;
        };
        auto optional = [&](std::size_t k, const char* name) -> std::optional<double> {
            if (text::trim(fields[k]).empty()) return std::nullopt;
            auto v = text::parse_double(fields[k]);
            if (!v) throw ParseError(std::string("unparseable ") + name + " '" + std::string(fields[k]) + "'", row);
            return v;
        };

        FlightSample s;
        s.t = required(0, "t");
        s.x = optional(1, "x");
        s.y = optional(2, "y");
        s.speed = required(3, "speed");
        s.voltage = optional(4, "voltage");
        s.current = optional(5, "current");
        auto power = optional(6, "power");
        if (power) {
            s.power = *power;
            if (s.voltage && s.current && warnings) {
                const double vi = *s.voltage * *s.current;
                if (std::abs(vi - s.power) > 0.05 * std::max(std::abs(s.power), std::abs(vi))) {
                    warnings->push_back("row " + std::to_string(row) +
                                        ": power differs from voltage*current by more than 5%");
                }
            }
        } else if (s.voltage && s.current) {
            s.power = *s.voltage * *s.current;
        } else {
            throw ParseError("row has neither power nor voltage and current", row);
        }
        if (s.speed < 0.0) throw ParseError("negative speed", row);
        if (s.power < 0.0) throw ParseError("negative power", row);
        if ((s.voltage && *s.voltage < 0.0) || (s.current && *s.current < 0.0)) {
            throw ParseError("negative voltage or current", row);
        }
        if (!log.samples.empty() && !(s.t > log.samples.back().t)) {
            throw ParseError("timestamp does not increase", row);
        }
        log.samples.push_back(s);
    }

    if (!header_seen || log.samples.empty()) {
        throw ParseError("flight log is empty");
    }
    if (sample_rate) {
        log.sample_rate = *sample_rate;
    } else if (log.samples.size() >= 2) {
        std::vector<double> steps;
        for (std::size_t i = 1; i < log.samples.size(); ++i) steps.push_back(log.samples[i].t - log.samples[i - 1].t);
        std::nth_element(steps.begin(), steps.begin() + static_cast<std::ptrdiff_t>(steps.size() / 2), steps.end());
        log.sample_rate = 1.0 / steps[steps.size() / 2];
    }
    if (!(log.sample_rate > 0.0)) throw ParseError("sample_rate_hz must be positive");
    if (!log.phases.empty() && log.phases.size() != log.samples.size()) {
        throw ParseError("phases cover " + std::to_string(log.phases.size()) + " samples, log has " +
                         std::to_string(log.samples.size()));
    }
    const double dt = 1.0 / log.sample_rate;
    for (std::size_t i = 1; i < log.samples.size(); ++i) {
        const double step = log.samples[i].t - log.samples[i - 1].t;
        if (std::abs(step - dt) > 0.1 * dt) {
            throw ParseError("sample spacing deviates more than 10% from 1/sample_rate", i + 1);
        }
    }
    return log;
}

inline FlightLog parse_log(std::string_view content, std::vector<std::string>* warnings = nullptr) {
    std::istringstream in{std::string(content)};
    return parse_log(in, warnings);
}

inline void write_log(std::ostream& out, const FlightLog& log) {
    for (const auto& c : log.comments) out << "# " << c << '\n';
    out << "# sample_rate_hz=" << text::format_double(log.sample_rate) << '\n';
    if (log.meta.target_speed) out << "# target_speed_mps=" << text::format_double(*log.meta.target_speed) << '\n';
    if (log.meta.radius) out << "# radius_m=" << text::format_double(*log.meta.radius) << '\n';
    if (log.meta.altitude) out << "# altitude_m=" << text::format_double(*log.meta.altitude) << '\n';
    if (!log.phases.empty()) out << "# phases=" << detail::encode_phases(log.phases) << '\n';
    out << detail::kLogHeader << '\n';
    for (const auto& s : log.samples) {
        out << text::format_double(s.t) << ',' << detail::optional_field(s.x) << ',' << detail::optional_field(s.y)
            << ',' << text::format_double(s.speed) << ',' << detail::optional_field(s.voltage) << ','
            << detail::optional_field(s.current) << ',' << text::format_double(s.power) << '\n';
    }
}

inline std::string serialize_log(const FlightLog& log) {
    std::ostringstream out;
    write_log(out, log);
    return out.str();
}

}  // namespace uavpower
