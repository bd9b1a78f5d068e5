// uavpower: command-line front end for simulation, preprocessing, fitting and
// curve generation.
//
// Exit codes: 0 success, 1 usage, 2 input/parse, 3 numerical failure.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "uavpower/uavpower.hpp"

namespace fs = std::filesystem;
using namespace uavpower;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kInput = 2, kNumerical = 3 };

constexpr std::uint64_t kDefaultSeed = 1;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FileError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string num(double v) { return text::format_double(v); }

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileError("cannot read '" + path + "'");
    return in;
}

std::ofstream open_output(const std::string& path) {
    const fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FileError("cannot write '" + path + "'");
    return out;
}

// Re-throws library parse errors with the file name attached.
template <typename F>
auto with_file_context(const std::string& path, F&& f) {
    try {
        return f();
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

ModelParams load_params(const std::string& path) {
    if (path.empty()) return reference_params();
    auto in = open_input(path);
    return with_file_context(path, [&] { return params_from_document(parse_key_values(in)); });
}

std::vector<SpeedPowerPoint> load_points(const std::string& path) {
    auto in = open_input(path);
    return with_file_context(path, [&] { return parse_points(in); });
}

std::pair<double, double> parse_noise(const std::string& s) {
    auto parts = text::split(s, ',');
    if (parts.size() != 2) throw UsageError("--noise expects 'speed_std,power_std'");
    auto a = text::parse_double(parts[0]);
    auto b = text::parse_double(parts[1]);
    if (!a || !b || *a < 0.0 || *b < 0.0) throw UsageError("--noise values must be non-negative numbers");
    return {*a, *b};
}

std::vector<double> parse_range(const std::string& s) {
    auto parts = text::split(s, ':');
    if (parts.size() != 3) throw UsageError("--sweep expects start:stop:step");
    auto start = text::parse_double(parts[0]);
    auto stop = text::parse_double(parts[1]);
    auto step = text::parse_double(parts[2]);
    if (!start || !stop || !step || !(*step > 0.0) || *stop < *start || *start < 0.0) {
        throw UsageError("--sweep needs 0 <= start <= stop and step > 0");
    }
    std::vector<double> out;
    const auto n = static_cast<long long>(std::floor((*stop - *start) / *step + 1e-9));
    for (long long k = 0; k <= n; ++k) out.push_back(*start + static_cast<double>(k) * *step);
    return out;
}

double log_energy(const FlightLog& log) {
    double e = 0.0;
    for (std::size_t i = 1; i < log.samples.size(); ++i) {
        e += 0.5 * (log.samples[i].t - log.samples[i - 1].t) * (log.samples[i].power + log.samples[i - 1].power);
    }
    return e;
}

std::string phase_summary(const FlightLog& log) {
    std::map<std::string, std::size_t> counts;
    for (Phase p : log.phases) ++counts[std::string(to_string(p))];
    std::string s;
    for (const auto& [k, v] : counts) s += (s.empty() ? "" : " ") + k + "=" + std::to_string(v);
    return s;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
    std::string kind = "straight";
    double speed = 10.0;
    double radius = 10.0;
    double site_length = 200.0;
    double duration = 120.0;
    double ramp_accel = 2.0;
    double rate = 5.0;
    double takeoff = 0.0;
    double landing = 0.0;
    double altitude = 30.0;
    std::string noise = "0.15,5";
    std::uint64_t seed = kDefaultSeed;
    std::string params;
    std::string out = "flight.csv";
    std::string trajectory_out;
    std::string sweep;
    std::size_t budget = 800;
    std::string out_dir = "sweep";
};

void write_labeled(const std::string& path, const LabeledLog& labeled, const RunManifest& manifest) {
    FlightLog log = labeled.log;
    log.comments = manifest.lines();
    auto out = open_output(path);
    write_log(out, log);
}

int cmd_simulate(const SimulateArgs& a) {
    const ModelParams params = load_params(a.params);
    const auto [speed_std, power_std] = parse_noise(a.noise);

    RunManifest manifest;
    manifest.subcommand = "simulate";
    manifest.seed = a.seed;
    if (!a.params.empty()) manifest.inputs.push_back(a.params);
    manifest.options = {{"noise", num(speed_std) + "," + num(power_std)},
                        {"rate", num(a.rate)},
                        {"ramp-accel", num(a.ramp_accel)},
                        {"site-length", num(a.site_length)}};

    if (!a.sweep.empty()) {
        const auto speeds = parse_range(a.sweep);
        manifest.options["sweep"] = a.sweep;
        manifest.options["budget"] = std::to_string(a.budget);
        std::vector<std::string> paths;
        for (double v : speeds) {
            char name[64];
            std::snprintf(name, sizeof(name), "speed_%05.2f.csv", v);
            paths.push_back((fs::path(a.out_dir) / name).string());
        }
        manifest.outputs = paths;
        SweepOptions opts;
        opts.site_length = a.site_length;
        opts.ramp_accel = a.ramp_accel;
        opts.sample_rate = a.rate;
        std::vector<LabeledLog> logs;
        try {
            logs = generate_speed_sweep(speeds, a.budget, params, NoiseSpec{speed_std, power_std}, a.seed, opts);
        } catch (const InputError& e) {
            throw UsageError(e.what());
        }
        for (std::size_t i = 0; i < logs.size(); ++i) {
            write_labeled(paths[i], logs[i], manifest);
            std::cout << paths[i] << ": speed=" << num(speeds[i]) << " samples=" << logs[i].log.samples.size()
                      << " steady=" << filter_steady(logs[i].log).size() << " " << phase_summary(logs[i].log)
                      << " energy_J=" << num(log_energy(logs[i].log)) << '\n';
        }
        return kOk;
    }

    ScenarioSpec spec;
    if (a.kind == "straight") {
        spec.kind = ScenarioKind::straight_round_trip;
    } else if (a.kind == "circular") {
        spec.kind = ScenarioKind::circular;
    } else if (a.kind == "hover") {
        spec.kind = ScenarioKind::hover;
    } else {
        throw UsageError("--kind must be straight, circular or hover");
    }
    spec.target_speed = spec.kind == ScenarioKind::hover ? 0.0 : a.speed;
    spec.radius = a.radius;
    spec.site_length = a.site_length;
    spec.duration = a.duration;
    spec.ramp_accel = a.ramp_accel;
    spec.sample_rate = a.rate;
    spec.takeoff = a.takeoff;
    spec.landing = a.landing;
    spec.altitude = a.altitude;
    spec.noise = {speed_std, power_std};
    spec.seed = a.seed;

    manifest.options["kind"] = a.kind;
    manifest.options["speed"] = num(spec.target_speed);
    manifest.options["duration"] = num(a.duration);
    manifest.options["takeoff"] = num(a.takeoff);
    manifest.options["landing"] = num(a.landing);
    manifest.options["altitude"] = num(a.altitude);
    if (spec.kind == ScenarioKind::circular) manifest.options["radius"] = num(a.radius);
    manifest.outputs.push_back(a.out);
    if (!a.trajectory_out.empty()) manifest.outputs.push_back(a.trajectory_out);

    LabeledLog labeled;
    try {
        labeled = generate(spec, params);
    } catch (const InputError& e) {
        throw UsageError(e.what());
    }
    write_labeled(a.out, labeled, manifest);
    if (!a.trajectory_out.empty()) {
        auto out = open_output(a.trajectory_out);
        manifest.write(out);
        write_trajectory(out, labeled.trajectory);
    }
    const EnergyBreakdown model = trajectory_energy(labeled.trajectory, params);
    std::cout << a.out << ": samples=" << labeled.log.samples.size() << " " << phase_summary(labeled.log)
              << " energy_J=" << num(log_energy(labeled.log)) << " model_energy_J=" << num(model.total) << '\n';
    return kOk;
}

// -------------------------------------------------------------- preprocess

struct PreprocessArgs {
    std::vector<std::string> logs;
    double threshold = kSteadyAccelThreshold;
    double trim_head = 0.0;
    double trim_tail = 0.0;
    double bin_width = 1.0;
    std::string out = "points.csv";
    std::string hist = "histogram.csv";
};

int cmd_preprocess(const PreprocessArgs& a) {
    if (!(a.threshold > 0.0)) throw UsageError("--threshold must be positive");
    if (!(a.bin_width > 0.0)) throw UsageError("--bin-width must be positive");
    std::vector<SpeedPowerPoint> points;
    std::size_t raw = 0;
    for (const auto& path : a.logs) {
        auto in = open_input(path);
        std::vector<std::string> warnings;
        FlightLog log = with_file_context(path, [&] { return parse_log(in, &warnings); });
        for (const auto& w : warnings) std::cerr << path << ": warning: " << w << '\n';
        try {
            log = trim_transients(log, a.trim_head, a.trim_tail);
        } catch (const InputError& e) {
            throw UsageError(path + ": " + e.what());
        }
        raw += log.samples.size();
        if (log.samples.size() < 2) continue;
        auto kept = filter_steady(log, a.threshold);
        points.insert(points.end(), kept.begin(), kept.end());
    }
    // Zero-power rows cannot be fitted; the points dialect requires P > 0.
    std::erase_if(points, [](const SpeedPowerPoint& p) { return !(p.power > 0.0); });

    RunManifest manifest;
    manifest.subcommand = "preprocess";
    manifest.inputs = a.logs;
    manifest.outputs = {a.out, a.hist};
    manifest.options = {{"threshold", num(a.threshold)},
                        {"trim-head", num(a.trim_head)},
                        {"trim-tail", num(a.trim_tail)},
                        {"bin-width", num(a.bin_width)}};
    {
        auto out = open_output(a.out);
        manifest.write(out);
        write_points(out, points);
    }
    {
        auto out = open_output(a.hist);
        manifest.write(out);
        const auto bins = bin_by_speed(points, a.bin_width);
        write_histogram(out, bins);
    }
    std::cout << "samples=" << raw << " steady=" << points.size() << '\n';
    return kOk;
}

// --------------------------------------------------------------------- fit

struct FitArgs {
    std::string points;
    std::string model = "theoretical";
    std::string out = "params.txt";
    std::string report;
    int max_iterations = 200;
    int starts = 1;
    std::uint64_t seed = kDefaultSeed;
    double mass = 3.0;
    double g = 9.81;
};

int cmd_fit(const FitArgs& a) {
    if (a.model != "theoretical" && a.model != "poly6") throw UsageError("--model must be theoretical or poly6");
    const auto points = load_points(a.points);

    RunManifest manifest;
    manifest.subcommand = "fit";
    manifest.seed = a.seed;
    manifest.inputs = {a.points};
    manifest.outputs = {a.out};
    if (!a.report.empty()) manifest.outputs.push_back(a.report);
    manifest.options = {{"model", a.model}};

    std::ostringstream report;
    int code = kOk;
    if (a.model == "theoretical") {
        FitOptions opts;
        opts.max_iterations = a.max_iterations;
        opts.starts = a.starts;
        opts.seed = a.seed;
        opts.mass = a.mass;
        opts.g = a.g;
        manifest.options["max-iterations"] = std::to_string(a.max_iterations);
        manifest.options["starts"] = std::to_string(a.starts);
        manifest.options["mass"] = num(a.mass);
        manifest.options["g"] = num(a.g);
        const FitResult fit = fit_theoretical(points, opts);
        auto out = open_output(a.out);
        manifest.write(out);
        out << "# model: theoretical\n";
        write_fit_result(out, fit);
        report << "model: theoretical\npoints: " << points.size() << "\nc1: " << num(fit.params.c1)
               << "\nc2: " << num(fit.params.c2) << "\nc3: " << num(fit.params.c3) << "\nc4: " << num(fit.params.c4)
               << "\nc5: " << num(fit.params.c5) << "\nrmse_W: " << num(fit.rmse)
               << "\nr_squared: " << num(fit.r_squared) << "\niterations: " << fit.iterations
               << "\nfinal_gradient_norm: " << num(fit.final_gradient_norm)
               << "\nconverged: " << (fit.converged ? "true" : "false") << '\n';
        if (!fit.converged) code = kNumerical;
    } else {
        const PolyFit fit = fit_polynomial(points, 6);
        auto out = open_output(a.out);
        manifest.write(out);
        out << "# model: poly6\n";
        write_poly_fit(out, fit);
        report << "model: poly6\npoints: " << points.size();
        for (std::size_t k = 0; k < fit.coefficients.size(); ++k) report << "\na" << k << ": " << num(fit.coefficients[k]);
        report << "\nrmse_W: " << num(fit.rmse) << "\nr_squared: " << num(fit.r_squared) << '\n';
    }
    std::cout << report.str();
    if (!a.report.empty()) {
        auto out = open_output(a.report);
        manifest.write(out);
        out << report.str();
    }
    if (code == kNumerical) std::cerr << "error: fit did not converge\n";
    return code;
}

// --------------------------------------------------------------- train-mlp

struct TrainArgs {
    std::string points;
    std::string out = "mlp.txt";
    std::string loss = "loss.csv";
    int epochs = 5000;
    int batch_size = 64;
    double learning_rate = 0.01;
    std::uint64_t seed = kDefaultSeed;
};

mlp::TrainConfig train_config(const TrainArgs& a) {
    mlp::TrainConfig cfg;
    cfg.epochs = a.epochs;
    cfg.batch_size = a.batch_size;
    cfg.learning_rate = a.learning_rate;
    cfg.seed = a.seed;
    try {
        cfg.validate();
    } catch (const InputError& e) {
        throw UsageError(e.what());
    }
    return cfg;
}

int cmd_train_mlp(const TrainArgs& a) {
    const auto points = load_points(a.points);
    const auto result = mlp::train(points, train_config(a));

    RunManifest manifest;
    manifest.subcommand = "train-mlp";
    manifest.seed = a.seed;
    manifest.inputs = {a.points};
    manifest.outputs = {a.out, a.loss};
    manifest.options = {{"epochs", std::to_string(a.epochs)},
                        {"batch-size", std::to_string(a.batch_size)},
                        {"learning-rate", num(a.learning_rate)}};
    {
        auto out = open_output(a.out);
        manifest.write(out);
        mlp::store(out, result.model);
    }
    {
        auto out = open_output(a.loss);
        manifest.write(out);
        out << "epoch,loss\n";
        for (std::size_t e = 0; e < result.loss_history.size(); ++e) {
            out << e + 1 << ',' << num(result.loss_history[e]) << '\n';
        }
    }
    std::cout << "epochs=" << a.epochs << " initial_loss=" << num(result.loss_history.front())
              << " final_loss=" << num(result.loss_history.back()) << '\n';
    return kOk;
}

// ------------------------------------------------------------------- curve

struct CurveArgs {
    std::string params;
    std::string model;
    double v_min = 0.0;
    double v_max = 14.0;
    double v_step = 0.1;
    std::vector<double> radii{10.0, 20.0};
    std::string out = "curve.csv";
    std::string circular_out;
};

std::vector<double> speed_grid(double lo, double hi, double step) {
    if (!(step > 0.0) || lo < 0.0 || hi < lo) throw UsageError("speed range needs 0 <= v-min <= v-max, v-step > 0");
    std::vector<double> out;
    const auto n = static_cast<long long>(std::floor((hi - lo) / step + 1e-9));
    for (long long k = 0; k <= n; ++k) out.push_back(lo + static_cast<double>(k) * step);
    return out;
}

int cmd_curve(const CurveArgs& a) {
    if (a.params.empty() == a.model.empty()) throw UsageError("give exactly one of --params or --model");
    for (double r : a.radii) {
        if (!(r > 0.0)) throw UsageError("--radius values must be positive");
    }
    const auto speeds = speed_grid(a.v_min, a.v_max, a.v_step);
    const std::string circular_out =
        a.circular_out.empty() ? (fs::path(a.out).replace_extension("").string() + "_circular.csv") : a.circular_out;

    RunManifest manifest;
    manifest.subcommand = "curve";
    manifest.inputs = {a.params.empty() ? a.model : a.params};
    manifest.options = {{"v-min", num(a.v_min)}, {"v-max", num(a.v_max)}, {"v-step", num(a.v_step)}};

    if (!a.model.empty()) {
        auto in = open_input(a.model);
        const auto model = with_file_context(a.model, [&] { return mlp::load(in); });
        manifest.outputs = {a.out};
        auto out = open_output(a.out);
        manifest.write(out);
        out << "speed,total\n";
        for (double v : speeds) out << num(v) << ',' << num(mlp::predict(model, v)) << '\n';
        return kOk;
    }

    auto in = open_input(a.params);
    const auto doc = with_file_context(a.params, [&] { return parse_key_values(in); });
    if (!is_theoretical_document(doc)) {
        const auto poly = with_file_context(a.params, [&] { return poly_from_document(doc); });
        manifest.outputs = {a.out};
        auto out = open_output(a.out);
        manifest.write(out);
        out << "speed,total\n";
        for (double v : speeds) out << num(v) << ',' << num(poly(v)) << '\n';
        return kOk;
    }

    const ModelParams p = with_file_context(a.params, [&] { return params_from_document(doc); });
    std::string radii;
    for (double r : a.radii) radii += (radii.empty() ? "" : ",") + num(r);
    manifest.options["radius"] = radii;
    manifest.outputs = {a.out, circular_out};
    {
        auto out = open_output(a.out);
        manifest.write(out);
        out << "speed,blade_profile,induced,parasite,total\n";
        for (double v : speeds) {
            const auto b = power_level_flight(v, p);
            out << num(v) << ',' << num(b.blade_profile) << ',' << num(b.induced) << ',' << num(b.parasite) << ','
                << num(b.total) << '\n';
        }
    }
    {
        auto out = open_output(circular_out);
        manifest.write(out);
        out << "speed,radius,total\n";
        for (double v : speeds) {
            for (double r : a.radii) out << num(v) << ',' << num(r) << ',' << num(power_circular(v, r, p).total) << '\n';
            out << num(v) << ",inf," << num(power_level_flight(v, p).total) << '\n';
        }
    }
    return kOk;
}

// ------------------------------------------------------------------ energy

struct EnergyArgs {
    std::string trajectory;
    std::string params;
    std::string out;
};

int cmd_energy(const EnergyArgs& a) {
    const ModelParams p = load_params(a.params);
    auto in = open_input(a.trajectory);
    const Trajectory2D traj = with_file_context(a.trajectory, [&] { return parse_trajectory(in); });
    const EnergyBreakdown e = trajectory_energy(traj, p);

    std::ostringstream report;
    report << "total_J=" << num(e.total) << '\n'
           << "blade_profile_J=" << num(e.blade_profile) << '\n'
           << "induced_J=" << num(e.induced) << '\n'
           << "parasite_J=" << num(e.parasite) << '\n'
           << "kinetic_delta_J=" << num(e.kinetic_delta) << '\n'
           << "duration_s=" << num(e.duration) << '\n'
           << "mean_power_W=" << num(e.mean_power()) << '\n';
    std::cout << report.str();
    if (!a.out.empty()) {
        RunManifest manifest;
        manifest.subcommand = "energy";
        manifest.inputs = {a.trajectory};
        if (!a.params.empty()) manifest.inputs.push_back(a.params);
        manifest.outputs = {a.out};
        auto out = open_output(a.out);
        manifest.write(out);
        out << report.str();
    }
    return kOk;
}

// ----------------------------------------------------------------- compare

struct CompareArgs {
    std::string points;
    std::string out = "compare.csv";
    TrainArgs train;
    double v_min = 0.0;
    double v_max = 14.0;
    double v_step = 0.1;
};

int cmd_compare(const CompareArgs& a) {
    const auto points = load_points(a.points);
    const auto speeds = speed_grid(a.v_min, a.v_max, a.v_step);
    FitOptions opts;
    opts.seed = a.train.seed;
    const FitResult theory = fit_theoretical(points, opts);
    const PolyFit poly = fit_polynomial(points, 6);
    const auto net = mlp::train(points, train_config(a.train));

    const FitMetrics mlp_metrics =
        evaluate_fit([&](double v) { return mlp::predict(net.model, v); }, std::span<const SpeedPowerPoint>(points));

    RunManifest manifest;
    manifest.subcommand = "compare";
    manifest.seed = a.train.seed;
    manifest.inputs = {a.points};
    manifest.outputs = {a.out};
    manifest.options = {{"epochs", std::to_string(a.train.epochs)},
                        {"batch-size", std::to_string(a.train.batch_size)},
                        {"learning-rate", num(a.train.learning_rate)},
                        {"v-min", num(a.v_min)},
                        {"v-max", num(a.v_max)},
                        {"v-step", num(a.v_step)}};
    auto out = open_output(a.out);
    manifest.write(out);
    out << "speed,theoretical,poly6,mlp\n";
    for (double v : speeds) {
        out << num(v) << ',' << num(power_level_flight(v, theory.params).total) << ',' << num(poly(v)) << ','
            << num(mlp::predict(net.model, v)) << '\n';
    }
    std::cout << "theoretical_rmse_W=" << num(theory.rmse) << " converged=" << (theory.converged ? "true" : "false")
              << "\npoly6_rmse_W=" << num(poly.rmse) << "\nmlp_rmse_W=" << num(mlp_metrics.rmse) << '\n';
    return theory.converged ? kOk : kNumerical;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"UAV propulsion power modelling toolkit"};
    app.set_version_flag("--version", std::string("uavpower ") + kVersion);
    app.require_subcommand(1);
    int code = kOk;

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Generate synthetic flight logs");
    simulate->add_option("--kind", sim.kind, "straight | circular | hover")->capture_default_str();
    simulate->add_option("--speed", sim.speed, "Target speed [m/s]")->capture_default_str();
    simulate->add_option("--radius", sim.radius, "Circle radius [m]")->capture_default_str();
    simulate->add_option("--site-length", sim.site_length, "Straight site length [m]")->capture_default_str();
    simulate->add_option("--duration", sim.duration, "Flight duration [s]")->capture_default_str();
    simulate->add_option("--ramp-accel", sim.ramp_accel, "Speed ramp acceleration [m/s^2]")->capture_default_str();
    simulate->add_option("--rate", sim.rate, "Sample rate [Hz]")->capture_default_str();
    simulate->add_option("--takeoff", sim.takeoff, "Take-off hover [s]")->capture_default_str();
    simulate->add_option("--landing", sim.landing, "Landing hover [s]")->capture_default_str();
    simulate->add_option("--altitude", sim.altitude, "Altitude metadata [m]")->capture_default_str();
    simulate->add_option("--noise", sim.noise, "speed_std,power_std")->capture_default_str();
    simulate->add_option("--seed", sim.seed, "Random seed")->capture_default_str();
    simulate->add_option("--params", sim.params, "Parameter document (default: reference set)");
    simulate->add_option("--out", sim.out, "Output log path")->capture_default_str();
    simulate->add_option("--trajectory-out", sim.trajectory_out, "Also write the noise-free trajectory");
    simulate->add_option("--sweep", sim.sweep, "Speed sweep start:stop:step (straight round trips)");
    simulate->add_option("--budget", sim.budget, "Steady samples per sweep speed")->capture_default_str();
    simulate->add_option("--out-dir", sim.out_dir, "Sweep output directory")->capture_default_str();
    simulate->callback([&] { code = cmd_simulate(sim); });

    PreprocessArgs pre;
    auto* preprocess = app.add_subcommand("preprocess", "Filter logs down to steady-flight points");
    preprocess->add_option("logs,--log", pre.logs, "Flight log(s)")->required();
    preprocess->add_option("--threshold", pre.threshold, "Steady-flight |a| limit [m/s^2]")->capture_default_str();
    preprocess->add_option("--trim-head", pre.trim_head, "Seconds dropped at the start")->capture_default_str();
    preprocess->add_option("--trim-tail", pre.trim_tail, "Seconds dropped at the end")->capture_default_str();
    preprocess->add_option("--bin-width", pre.bin_width, "Histogram bin width [m/s]")->capture_default_str();
    preprocess->add_option("--out", pre.out, "Points output")->capture_default_str();
    preprocess->add_option("--hist", pre.hist, "Histogram output")->capture_default_str();
    preprocess->callback([&] { code = cmd_preprocess(pre); });

    FitArgs fit;
    auto* fit_cmd = app.add_subcommand("fit", "Fit the power model or a degree-6 polynomial");
    fit_cmd->add_option("points,--points", fit.points, "Points file")->required();
    fit_cmd->add_option("--model", fit.model, "theoretical | poly6")->capture_default_str();
    fit_cmd->add_option("--out", fit.out, "Parameter document output")->capture_default_str();
    fit_cmd->add_option("--report", fit.report, "Also write the report here");
    fit_cmd->add_option("--max-iterations", fit.max_iterations)->capture_default_str();
    fit_cmd->add_option("--starts", fit.starts, "Number of jittered starts")->capture_default_str();
    fit_cmd->add_option("--seed", fit.seed)->capture_default_str();
    fit_cmd->add_option("--mass", fit.mass, "Airframe mass carried into the result [kg]")->capture_default_str();
    fit_cmd->add_option("--g", fit.g)->capture_default_str();
    fit_cmd->callback([&] { code = cmd_fit(fit); });

    TrainArgs tr;
    auto* train_cmd = app.add_subcommand("train-mlp", "Train the 1-10-10-10-1 regressor");
    train_cmd->add_option("points,--points", tr.points, "Points file")->required();
    train_cmd->add_option("--out", tr.out, "Model output")->capture_default_str();
    train_cmd->add_option("--loss", tr.loss, "Per-epoch loss output")->capture_default_str();
    train_cmd->add_option("--epochs", tr.epochs)->capture_default_str();
    train_cmd->add_option("--batch-size", tr.batch_size)->capture_default_str();
    train_cmd->add_option("--learning-rate", tr.learning_rate)->capture_default_str();
    train_cmd->add_option("--seed", tr.seed)->capture_default_str();
    train_cmd->callback([&] { code = cmd_train_mlp(tr); });

    CurveArgs cv;
    auto* curve = app.add_subcommand("curve", "Tabulate power against speed");
    curve->add_option("--params", cv.params, "Parameter document (theoretical or poly6)");
    curve->add_option("--model", cv.model, "MLP model file");
    curve->add_option("--v-min", cv.v_min)->capture_default_str();
    curve->add_option("--v-max", cv.v_max)->capture_default_str();
    curve->add_option("--v-step", cv.v_step)->capture_default_str();
    curve->add_option("--radius", cv.radii, "Circle radii [m]")->delimiter(',')->capture_default_str();
    curve->add_option("--out", cv.out, "Level-flight table")->capture_default_str();
    curve->add_option("--circular-out", cv.circular_out, "Circular table (default: <out>_circular.csv)");
    curve->callback([&] { code = cmd_curve(cv); });

    EnergyArgs en;
    auto* energy = app.add_subcommand("energy", "Energy of a planar trajectory");
    energy->add_option("trajectory,--trajectory", en.trajectory, "Trajectory file")->required();
    energy->add_option("--params", en.params, "Parameter document (default: reference set)");
    energy->add_option("--out", en.out, "Also write the report here");
    energy->callback([&] { code = cmd_energy(en); });

    CompareArgs cmp;
    auto* compare = app.add_subcommand("compare", "Fit all three models and tabulate them together");
    compare->add_option("points,--points", cmp.points, "Points file")->required();
    compare->add_option("--out", cmp.out, "Joint curve table")->capture_default_str();
    compare->add_option("--epochs", cmp.train.epochs)->capture_default_str();
    compare->add_option("--batch-size", cmp.train.batch_size)->capture_default_str();
    compare->add_option("--learning-rate", cmp.train.learning_rate)->capture_default_str();
    compare->add_option("--seed", cmp.train.seed)->capture_default_str();
    compare->add_option("--v-min", cmp.v_min)->capture_default_str();
    compare->add_option("--v-max", cmp.v_max)->capture_default_str();
    compare->add_option("--v-step", cmp.v_step)->capture_default_str();
    compare->callback([&] { code = cmd_compare(cmp); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (const FileError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInput;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return kInput;
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kInput;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInput;
    }
    return code;
}
