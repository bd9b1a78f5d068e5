#pragma once

// Parameter identification from steady-flight (speed, power) points.
//
// fit_theoretical minimizes sum_i (P_i - P(V_i))^2 over c1..c5 with a damped
// Gauss-Newton (Levenberg-Marquardt) loop. The unknowns are log(c_k), so every
// iterate is a positive parameter set; the Jacobian is a forward finite
// difference in those log coordinates and the damping is Marquardt-scaled
// (lambda * diag(J^T J)), which keeps the iterates invariant under a rescaling
// of the power data.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "uavpower/errors.hpp"
#include "uavpower/flight_log.hpp"
#include "uavpower/power_model.hpp"
#include "uavpower/random.hpp"
#include "uavpower/text.hpp"

namespace uavpower {

struct FitMetrics {
    double rmse = 0.0;       ///< W
    double r_squared = 0.0;  ///< 1 - SS_res / SS_tot
    double max_abs_error = 0.0;
};

/// Goodness of fit of any callable `double(double speed)` on `points`.
template <typename Predictor>
FitMetrics evaluate_fit(const Predictor& predict, std::span<const SpeedPowerPoint> points) {
    if (points.empty()) {
        throw InputError("cannot evaluate a fit on zero points");
    }
    double mean = 0.0;
    for (const auto& p : points) mean += p.power;
    mean /= static_cast<double>(points.size());

    double ss_res = 0.0;
    double ss_tot = 0.0;
    FitMetrics m;
    for (const auto& p : points) {
        const double err = p.power - predict(p.speed);
        ss_res += err * err;
        ss_tot += (p.power - mean) * (p.power - mean);
        m.max_abs_error = std::max(m.max_abs_error, std::abs(err));
    }
    m.rmse = std::sqrt(ss_res / static_cast<double>(points.size()));
    if (ss_res == 0.0) {
        m.r_squared = 1.0;
    } else if (ss_tot == 0.0) {
        m.r_squared = -std::numeric_limits<double>::infinity();
    } else {
        m.r_squared = 1.0 - ss_res / ss_tot;
    }
    return m;
}

struct FitOptions {
    std::optional<ModelParams> initial_params;  ///< nullopt: heuristic start
    int max_iterations = 200;
    double gradient_tolerance = 1e-8;
    double step_tolerance = 1e-10;
    double damping_init = 1e-3;
    /// Relative finite-difference step on the log-parameters.
    double fd_step = 1e-6;
    /// Additional jittered starts; the lowest-cost result wins.
    int starts = 1;
    std::uint64_t seed = 0;
    double start_jitter = 0.5;  ///< std of the log-space jitter
    /// Carried into the result when initial_params is not given.
    double mass = 3.0;
    double g = 9.81;

    void validate() const {
        if (max_iterations < 1) throw InputError("max_iterations must be at least 1");
        if (!(gradient_tolerance > 0.0) || !(step_tolerance > 0.0) || !(damping_init > 0.0) || !(fd_step > 0.0)) {
            throw InputError("tolerances, damping and finite-difference step must be positive");
        }
        if (starts < 1) throw InputError("starts must be at least 1");
        if (initial_params) initial_params->validate();
    }
};

struct FitResult {
    ModelParams params;
    double rmse = 0.0;
    double r_squared = 0.0;
    int iterations = 0;
    bool converged = false;
    /// max_k |(J^T r)_k| / sum_i P_i^2, dimensionless.
    double final_gradient_norm = 0.0;
    /// Sum of squared residuals after each accepted step (first entry: start).
    std::vector<double> cost_history;

    double cost() const { return cost_history.empty() ? 0.0 : cost_history.back(); }
};

namespace detail {

using Vector5 = Eigen::Matrix<double, 5, 1>;

inline ModelParams params_from_log(const Vector5& theta, double mass, double g) {
    return ModelParams{std::exp(theta[0]), std::exp(theta[1]), std::exp(theta[2]), std::exp(theta[3]),
                       std::exp(theta[4]), mass, g};
}

inline Vector5 log_params(const ModelParams& p) {
    Vector5 theta;
    theta << std::log(p.c1), std::log(p.c2), std::log(p.c3), std::log(p.c4), std::log(p.c5);
    return theta;
}

inline void require_fit_data(std::span<const SpeedPowerPoint> points) {
    if (points.size() < 5) {
        throw InputError("theoretical fit needs at least 5 points, got " + std::to_string(points.size()));
    }
    std::set<long long> bins;
    for (const auto& p : points) {
        if (!std::isfinite(p.speed) || p.speed < 0.0 || !std::isfinite(p.power) || !(p.power > 0.0)) {
            throw InputError("fit points need finite non-negative speed and positive power");
        }
        bins.insert(static_cast<long long>(std::floor(p.speed)));
    }
    if (bins.size() < 3) {
        throw InputError("theoretical fit needs points in at least 3 distinct 1 m/s speed bins");
    }
}

class TheoreticalProblem {
public:
    TheoreticalProblem(std::span<const SpeedPowerPoint> points, double mass, double g)
        : points_(points), mass_(mass), g_(g) {
        for (const auto& p : points_) power_sq_sum_ += p.power * p.power;
    }

    std::size_t size() const { return points_.size(); }
    double power_sq_sum() const { return power_sq_sum_; }

    /// Residuals model - data; false when the model is not finite there.
    bool residuals(const Vector5& theta, Eigen::VectorXd& r) const {
        const ModelParams p = params_from_log(theta, mass_, g_);
        if (!p.valid()) return false;
        r.resize(static_cast<Eigen::Index>(points_.size()));
        try {
            for (std::size_t i = 0; i < points_.size(); ++i) {
                const double model = evaluate_power(points_[i].speed, 1.0, p).total;
                r[static_cast<Eigen::Index>(i)] = model - points_[i].power;
            }
        } catch (const NumericalError&) {
            // Extreme trial parameters (e.g. c4 near underflow); the caller
            // treats this like any other rejected step.
            return false;
        }
        return r.allFinite();
    }

    void jacobian(const Vector5& theta, const Eigen::VectorXd& r0, double rel_step, Eigen::MatrixXd& jac) const {
        jac.resize(static_cast<Eigen::Index>(points_.size()), 5);
        Eigen::VectorXd r1;
        for (int k = 0; k < 5; ++k) {
            Vector5 shifted = theta;
            const double h = rel_step * std::max(std::abs(theta[k]), 1.0);
            shifted[k] += h;
            const double actual = shifted[k] - theta[k];
            if (!residuals(shifted, r1)) {
                throw NumericalError("model is not finite at a finite-difference probe");
            }
            jac.col(k) = (r1 - r0) / actual;
        }
    }

private:
    std::span<const SpeedPowerPoint> points_;
    double mass_;
    double g_;
    double power_sq_sum_ = 0.0;
};

inline FitResult levenberg_marquardt(const TheoreticalProblem& problem, Vector5 theta, const FitOptions& opts,
                                     double mass, double g) {
    FitResult result;
    Eigen::VectorXd r;
    if (!problem.residuals(theta, r)) {
        throw NumericalError("model is not finite at the initial parameters");
    }
    double cost = r.squaredNorm();
    result.cost_history.push_back(cost);

    double lambda = opts.damping_init;
    Eigen::MatrixXd jac;
    Eigen::VectorXd r_trial;
    double gnorm = std::numeric_limits<double>::infinity();
    bool stalled = false;

    auto gradient_norm = [&](const Eigen::MatrixXd& j, const Eigen::VectorXd& res) {
        return (j.transpose() * res).cwiseAbs().maxCoeff() / problem.power_sq_sum();
    };

    while (result.iterations < opts.max_iterations) {
        problem.jacobian(theta, r, opts.fd_step, jac);
        const Vector5 grad = jac.transpose() * r;
        gnorm = grad.cwiseAbs().maxCoeff() / problem.power_sq_sum();
        if (gnorm < opts.gradient_tolerance) break;

        const Eigen::Matrix<double, 5, 5> normal = jac.transpose() * jac;
        Vector5 diag = normal.diagonal();
        const double floor = 1e-12 * std::max(diag.maxCoeff(), std::numeric_limits<double>::min());
        diag = diag.cwiseMax(floor);

        ++result.iterations;
        bool accepted = false;
        double step_size = 0.0;
        while (!accepted) {
            Eigen::Matrix<double, 5, 5> damped = normal;
            damped.diagonal() += lambda * diag;
            const Vector5 step = damped.ldlt().solve(-grad);
            const Vector5 trial = theta + step;
            if (step.allFinite() && problem.residuals(trial, r_trial)) {
                const double trial_cost = r_trial.squaredNorm();
                if (trial_cost < cost) {
                    theta = trial;
                    r.swap(r_trial);
                    cost = trial_cost;
                    result.cost_history.push_back(cost);
                    lambda /= 10.0;
                    step_size = step.cwiseAbs().maxCoeff();
                    accepted = true;
                    break;
                }
            }
            lambda *= 10.0;
            if (lambda > 1e20) {
                stalled = true;
                break;
            }
        }
        if (stalled || step_size < opts.step_tolerance) break;
    }

    // Report the gradient at the point actually returned.
    problem.jacobian(theta, r, opts.fd_step, jac);
    gnorm = gradient_norm(jac, r);

    result.params = params_from_log(theta, mass, g);
    result.final_gradient_norm = gnorm;
    result.converged = gnorm < opts.gradient_tolerance;
    return result;
}

}  // namespace detail

/// Order-of-magnitude start: c1 and c3 split the slowest bin's mean power,
/// c5 attributes half the fastest bin's power to parasite drag, c2 = 1e-3,
/// c4 = 30.
inline ModelParams auto_initial_guess(std::span<const SpeedPowerPoint> points, double mass = 3.0, double g = 9.81) {
    detail::require_fit_data(points);
    std::map<long long, std::array<double, 3>> bins;  // count, sum V, sum P
    for (const auto& p : points) {
        auto& b = bins[static_cast<long long>(std::floor(p.speed))];
        b[0] += 1.0;
        b[1] += p.speed;
        b[2] += p.power;
    }
    const auto& low = bins.begin()->second;
    const auto& high = bins.rbegin()->second;
    const double p_low = low[2] / low[0];
    const double v_high = high[1] / high[0];
    const double p_high = high[2] / high[0];
    return ModelParams{0.5 * p_low, 1e-3, 0.5 * p_low, 30.0, 0.5 * p_high / (v_high * v_high * v_high), mass, g};
}

inline FitResult fit_theoretical(std::span<const SpeedPowerPoint> points, const FitOptions& opts = {}) {
    opts.validate();
    detail::require_fit_data(points);

    const ModelParams start =
        opts.initial_params ? *opts.initial_params : auto_initial_guess(points, opts.mass, opts.g);
    const detail::TheoreticalProblem problem(points, start.mass, start.g);
    const detail::Vector5 base = detail::log_params(start);

    std::optional<FitResult> best;
    Rng rng = Rng::derived(opts.seed, 0);
    for (int s = 0; s < opts.starts; ++s) {
        detail::Vector5 theta = base;
        if (s > 0) {
            for (int k = 0; k < 5; ++k) theta[k] += opts.start_jitter * rng.normal();
        }
        std::optional<FitResult> candidate;
        try {
            candidate = detail::levenberg_marquardt(problem, theta, opts, start.mass, start.g);
        } catch (const NumericalError&) {
            if (s == 0) throw;
            continue;  // a jittered start landed where the model is not finite
        }
        if (!best || candidate->cost() < best->cost()) best = std::move(candidate);
    }

    const ModelParams fitted = best->params;
    const FitMetrics m = evaluate_fit([&](double v) { return power_level_flight(v, fitted).total; }, points);
    best->rmse = m.rmse;
    best->r_squared = m.r_squared;
    return *best;
}

/// Ordinary least-squares polynomial in speed, a_0 + a_1 V + ... + a_d V^d.
struct PolyFit {
    std::vector<double> coefficients;
    double rmse = 0.0;
    double r_squared = 0.0;

    int degree() const { return static_cast<int>(coefficients.size()) - 1; }

    double operator()(double speed) const {
        double acc = 0.0;
        for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) acc = acc * speed + *it;
        return acc;
    }
};

/// Solved by column-pivoted Householder QR on a Vandermonde matrix in
/// V / max|V| (never through the normal equations).
inline PolyFit fit_polynomial(std::span<const SpeedPowerPoint> points, int degree = 6) {
    if (degree < 0) throw InputError("polynomial degree must be non-negative");
    const auto ncoef = static_cast<Eigen::Index>(degree) + 1;
    if (static_cast<Eigen::Index>(points.size()) <= degree) {
        throw InputError("polynomial fit of degree " + std::to_string(degree) + " needs more than " +
                         std::to_string(degree) + " points");
    }
    double scale = 0.0;
    for (const auto& p : points) scale = std::max(scale, std::abs(p.speed));
    if (scale == 0.0) scale = 1.0;

    const auto n = static_cast<Eigen::Index>(points.size());
    Eigen::MatrixXd vander(n, ncoef);
    Eigen::VectorXd rhs(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double u = points[static_cast<std::size_t>(i)].speed / scale;
        double pw = 1.0;
        for (Eigen::Index k = 0; k < ncoef; ++k) {
            vander(i, k) = pw;
            pw *= u;
        }
        rhs[i] = points[static_cast<std::size_t>(i)].power;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(vander);
    if (qr.rank() < ncoef) {
        throw InputError("polynomial design matrix is rank deficient (too few distinct speeds)");
    }
    const Eigen::VectorXd scaled = qr.solve(rhs);

    PolyFit fit;
    fit.coefficients.resize(static_cast<std::size_t>(ncoef));
    double s_pow = 1.0;
    for (Eigen::Index k = 0; k < ncoef; ++k) {
        fit.coefficients[static_cast<std::size_t>(k)] = scaled[k] / s_pow;
        s_pow *= scale;
    }
    const FitMetrics m = evaluate_fit(fit, points);
    fit.rmse = m.rmse;
    fit.r_squared = m.r_squared;
    return fit;
}

// Parameter documents: '#' comments and `key=value` lines.

using KeyValues = std::map<std::string, std::string, std::less<>>;

inline KeyValues parse_key_values(std::istream& in) {
    KeyValues out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view view = text::trim(line);
        if (view.empty() || view.front() == '#') continue;
        const auto eq = view.find('=');
        if (eq == std::string_view::npos) {
            throw ParseError("line " + std::to_string(lineno) + ": expected key=value");
        }
        out.emplace(std::string(text::trim(view.substr(0, eq))), std::string(text::trim(view.substr(eq + 1))));
    }
    return out;
}

namespace detail {

inline double require_number(const KeyValues& kv, std::string_view key) {
    auto it = kv.find(key);
    if (it == kv.end()) throw ParseError("missing key '" + std::string(key) + "'");
    auto v = text::parse_double(it->second);
    if (!v) throw ParseError("key '" + std::string(key) + "' is not a number");
    return *v;
}

}  // namespace detail

inline bool is_theoretical_document(const KeyValues& kv) { return kv.count("c1") != 0; }

inline ModelParams params_from_document(const KeyValues& kv) {
    ModelParams p;
    p.c1 = detail::require_number(kv, "c1");
    p.c2 = detail::require_number(kv, "c2");
    p.c3 = detail::require_number(kv, "c3");
    p.c4 = detail::require_number(kv, "c4");
    p.c5 = detail::require_number(kv, "c5");
    if (kv.count("mass")) p.mass = detail::require_number(kv, "mass");
    if (kv.count("g")) p.g = detail::require_number(kv, "g");
    if (!p.valid()) throw ParseError("parameter document holds non-positive values");
    return p;
}

inline void write_params(std::ostream& out, const ModelParams& p) {
    out << "c1=" << text::format_double(p.c1) << '\n'
        << "c2=" << text::format_double(p.c2) << '\n'
        << "c3=" << text::format_double(p.c3) << '\n'
        << "c4=" << text::format_double(p.c4) << '\n'
        << "c5=" << text::format_double(p.c5) << '\n'
        << "mass=" << text::format_double(p.mass) << '\n'
        << "g=" << text::format_double(p.g) << '\n';
}

inline void write_fit_result(std::ostream& out, const FitResult& fit) {
    out << "# iterations: " << fit.iterations << '\n'
        << "# final_gradient_norm: " << text::format_double(fit.final_gradient_norm) << '\n';
    write_params(out, fit.params);
    out << "rmse=" << text::format_double(fit.rmse) << '\n'
        << "r_squared=" << text::format_double(fit.r_squared) << '\n'
        << "converged=" << (fit.converged ? "true" : "false") << '\n';
}

inline void write_poly_fit(std::ostream& out, const PolyFit& fit) {
    for (std::size_t k = 0; k < fit.coefficients.size(); ++k) {
        out << 'a' << k << '=' << text::format_double(fit.coefficients[k]) << '\n';
    }
    out << "rmse=" << text::format_double(fit.rmse) << '\n'
        << "r_squared=" << text::format_double(fit.r_squared) << '\n';
}

inline PolyFit poly_from_document(const KeyValues& kv) {
    PolyFit fit;
    for (int k = 0;; ++k) {
        const std::string key = "a" + std::to_string(k);
        if (!kv.count(key)) break;
        fit.coefficients.push_back(detail::require_number(kv, key));
    }
    if (fit.coefficients.empty()) throw ParseError("polynomial document has no a0 coefficient");
    if (kv.count("rmse")) fit.rmse = detail::require_number(kv, "rmse");
    if (kv.count("r_squared")) fit.r_squared = detail::require_number(kv, "r_squared");
    return fit;
}

}  // namespace uavpower
