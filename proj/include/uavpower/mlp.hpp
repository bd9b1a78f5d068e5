#pragma once

// Model-free speed -> power regressor: a 1-10-10-10-1 perceptron with tanh
// hidden layers and a linear output, trained with Adam on z-scored data.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <numeric>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "uavpower/errors.hpp"
#include "uavpower/flight_log.hpp"
#include "uavpower/random.hpp"
#include "uavpower/text.hpp"

namespace uavpower::mlp {

inline constexpr std::array<int, 5> kLayerSizes{1, 10, 10, 10, 1};
inline constexpr int kLayerCount = 4;

struct Layer {
    int inputs = 0;
    int outputs = 0;
    std::vector<double> weights;  ///< row-major, outputs x inputs
    std::vector<double> biases;

    double& w(int out, int in) { return weights[static_cast<std::size_t>(out * inputs + in)]; }
    double w(int out, int in) const { return weights[static_cast<std::size_t>(out * inputs + in)]; }

    friend bool operator==(const Layer&, const Layer&) = default;
};

struct Normalization {
    double mean = 0.0;
    double std = 1.0;

    double apply(double v) const { return (v - mean) / std; }
    double invert(double z) const { return z * std + mean; }

    friend bool operator==(const Normalization&, const Normalization&) = default;
};

struct MlpModel {
    std::array<Layer, kLayerCount> layers;
    Normalization input;
    Normalization output;
    double train_speed_min = 0.0;
    double train_speed_max = 0.0;

    /// Zero weights and biases with the fixed layer sizes.
    static MlpModel zeros() {
        MlpModel m;
        for (int l = 0; l < kLayerCount; ++l) {
            auto& layer = m.layers[static_cast<std::size_t>(l)];
            layer.inputs = kLayerSizes[static_cast<std::size_t>(l)];
            layer.outputs = kLayerSizes[static_cast<std::size_t>(l) + 1];
            layer.weights.assign(static_cast<std::size_t>(layer.inputs * layer.outputs), 0.0);
            layer.biases.assign(static_cast<std::size_t>(layer.outputs), 0.0);
        }
        return m;
    }

    /// Glorot-uniform weights, zero biases.
    static MlpModel initialized(Rng& rng) {
        MlpModel m = zeros();
        for (auto& layer : m.layers) {
            const double limit = std::sqrt(6.0 / static_cast<double>(layer.inputs + layer.outputs));
            for (auto& w : layer.weights) w = rng.uniform(-limit, limit);
        }
        return m;
    }

    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (const auto& l : layers) n += l.weights.size() + l.biases.size();
        return n;
    }

    /// True when `speed` lies outside the range seen in training.
    bool extrapolates(double speed) const { return speed < train_speed_min || speed > train_speed_max; }

    void validate() const {
        for (int l = 0; l < kLayerCount; ++l) {
            const auto& layer = layers[static_cast<std::size_t>(l)];
            if (layer.inputs != kLayerSizes[static_cast<std::size_t>(l)] ||
                layer.outputs != kLayerSizes[static_cast<std::size_t>(l) + 1] ||
                layer.weights.size() != static_cast<std::size_t>(layer.inputs * layer.outputs) ||
                layer.biases.size() != static_cast<std::size_t>(layer.outputs)) {
                throw InputError("network must be 1-10-10-10-1");
            }
        }
        if (!(input.std > 0.0) || !(output.std > 0.0)) throw InputError("normalization stds must be positive");
    }

    friend bool operator==(const MlpModel&, const MlpModel&) = default;
};

namespace detail {

inline constexpr int kWidth = 10;

struct Activations {
    std::array<std::array<double, kWidth>, 3> hidden{};
    double output = 0.0;
};

// Forward pass in normalized units.
inline double forward(const MlpModel& m, double z, Activations* act = nullptr) {
    std::array<double, kWidth> a{};
    std::array<double, kWidth> next{};
    const Layer& first = m.layers[0];
    for (int j = 0; j < kWidth; ++j) a[static_cast<std::size_t>(j)] = std::tanh(first.w(j, 0) * z + first.biases[static_cast<std::size_t>(j)]);
    if (act) act->hidden[0] = a;
    for (int l = 1; l < 3; ++l) {
        const Layer& layer = m.layers[static_cast<std::size_t>(l)];
        for (int j = 0; j < kWidth; ++j) {
            double s = layer.biases[static_cast<std::size_t>(j)];
            for (int i = 0; i < kWidth; ++i) s += layer.w(j, i) * a[static_cast<std::size_t>(i)];
            next[static_cast<std::size_t>(j)] = std::tanh(s);
        }
        a = next;
        if (act) act->hidden[static_cast<std::size_t>(l)] = a;
    }
    const Layer& last = m.layers[3];
    double out = last.biases[0];
    for (int i = 0; i < kWidth; ++i) out += last.w(0, i) * a[static_cast<std::size_t>(i)];
    if (act) act->output = out;
    return out;
}

/// Gradient buffer shaped like the model's parameters.
struct Gradients {
    std::array<std::vector<double>, kLayerCount> weights;
    std::array<std::vector<double>, kLayerCount> biases;

    explicit Gradients(const MlpModel& m) {
        for (int l = 0; l < kLayerCount; ++l) {
            weights[static_cast<std::size_t>(l)].assign(m.layers[static_cast<std::size_t>(l)].weights.size(), 0.0);
            biases[static_cast<std::size_t>(l)].assign(m.layers[static_cast<std::size_t>(l)].biases.size(), 0.0);
        }
    }

    void zero() {
        for (auto& w : weights) std::fill(w.begin(), w.end(), 0.0);
        for (auto& b : biases) std::fill(b.begin(), b.end(), 0.0);
    }
};

// Accumulates d/dparam of scale * (y_hat - y)^2 for one sample.
inline void accumulate(const MlpModel& m, double z, double target, double scale, Gradients& g) {
    Activations act;
    const double y = forward(m, z, &act);
    const double d_out = 2.0 * scale * (y - target);

    const Layer& last = m.layers[3];
    std::array<double, kWidth> delta{};
    g.biases[3][0] += d_out;
    for (int i = 0; i < kWidth; ++i) {
        g.weights[3][static_cast<std::size_t>(i)] += d_out * act.hidden[2][static_cast<std::size_t>(i)];
        const double h = act.hidden[2][static_cast<std::size_t>(i)];
        delta[static_cast<std::size_t>(i)] = d_out * last.w(0, i) * (1.0 - h * h);
    }
    for (int l = 2; l >= 1; --l) {
        const Layer& layer = m.layers[static_cast<std::size_t>(l)];
        const auto& below = act.hidden[static_cast<std::size_t>(l) - 1];
        std::array<double, kWidth> prev{};
        auto& gw = g.weights[static_cast<std::size_t>(l)];
        auto& gb = g.biases[static_cast<std::size_t>(l)];
        for (int j = 0; j < kWidth; ++j) {
            const double dj = delta[static_cast<std::size_t>(j)];
            gb[static_cast<std::size_t>(j)] += dj;
            for (int i = 0; i < kWidth; ++i) {
                gw[static_cast<std::size_t>(j * kWidth + i)] += dj * below[static_cast<std::size_t>(i)];
                prev[static_cast<std::size_t>(i)] += dj * layer.w(j, i);
            }
        }
        for (int i = 0; i < kWidth; ++i) {
            const double h = below[static_cast<std::size_t>(i)];
            prev[static_cast<std::size_t>(i)] *= 1.0 - h * h;
        }
        delta = prev;
    }
    for (int j = 0; j < kWidth; ++j) {
        g.weights[0][static_cast<std::size_t>(j)] += delta[static_cast<std::size_t>(j)] * z;
        g.biases[0][static_cast<std::size_t>(j)] += delta[static_cast<std::size_t>(j)];
    }
}

inline Normalization fit_normalization(std::span<const double> values) {
    const double n = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    return {mean, std::sqrt(var / n)};
}

// Visits every trainable scalar with its gradient slot, in a fixed order.
template <typename F>
void for_each_parameter(MlpModel& m, Gradients& g, F&& f) {
    for (int l = 0; l < kLayerCount; ++l) {
        auto& layer = m.layers[static_cast<std::size_t>(l)];
        for (std::size_t k = 0; k < layer.weights.size(); ++k) f(layer.weights[k], g.weights[static_cast<std::size_t>(l)][k]);
        for (std::size_t k = 0; k < layer.biases.size(); ++k) f(layer.biases[k], g.biases[static_cast<std::size_t>(l)][k]);
    }
}

}  // namespace detail

/// Denormalized prediction in W.
inline double predict(const MlpModel& m, double speed) {
    return m.output.invert(detail::forward(m, m.input.apply(speed)));
}

struct TrainConfig {
    double learning_rate = 0.01;
    int epochs = 5000;
    int batch_size = 64;
    std::uint64_t seed = 42;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    void validate() const {
        if (!(learning_rate > 0.0)) throw InputError("learning rate must be positive");
        if (epochs < 1) throw InputError("epochs must be at least 1");
        if (batch_size < 1) throw InputError("batch size must be at least 1");
        if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0) || !(epsilon > 0.0)) {
            throw InputError("Adam decay rates must lie in [0, 1) and epsilon must be positive");
        }
    }
};

struct TrainResult {
    MlpModel model;
    /// Mean squared error on the normalized training set after each epoch.
    std::vector<double> loss_history;
};

/// Mean squared error of the model on normalized points.
inline double normalized_loss(const MlpModel& m, std::span<const SpeedPowerPoint> points) {
    double loss = 0.0;
    for (const auto& p : points) {
        const double err = detail::forward(m, m.input.apply(p.speed)) - m.output.apply(p.power);
        loss += err * err;
    }
    return loss / static_cast<double>(points.size());
}

inline TrainResult train(std::span<const SpeedPowerPoint> points, const TrainConfig& cfg = {}) {
    cfg.validate();
    if (points.size() < 2) throw InputError("training needs at least 2 points");
    std::vector<double> speeds;
    std::vector<double> powers;
    speeds.reserve(points.size());
    powers.reserve(points.size());
    for (const auto& p : points) {
        speeds.push_back(p.speed);
        powers.push_back(p.power);
    }
    const Normalization in = detail::fit_normalization(speeds);
    const Normalization out = detail::fit_normalization(powers);
    if (!(in.std > 0.0)) throw InputError("all training speeds are equal; cannot normalize");
    if (!std::isfinite(in.mean) || !std::isfinite(out.mean)) throw InputError("training data must be finite");

    Rng rng(cfg.seed);
    TrainResult result;
    MlpModel& m = result.model;
    m = MlpModel::initialized(rng);
    m.input = in;
    // Constant power data has zero spread; any positive scale represents it.
    m.output = out.std > 0.0 ? out : Normalization{out.mean, 1.0};
    m.train_speed_min = *std::min_element(speeds.begin(), speeds.end());
    m.train_speed_max = *std::max_element(speeds.begin(), speeds.end());

    std::vector<double> z(points.size());
    std::vector<double> y(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        z[i] = m.input.apply(speeds[i]);
        y[i] = m.output.apply(powers[i]);
    }

    detail::Gradients grad(m);
    detail::Gradients first(m);
    detail::Gradients second(m);
    std::vector<std::size_t> order(points.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    const auto batch = static_cast<std::size_t>(cfg.batch_size);
    double beta1_t = 1.0;
    double beta2_t = 1.0;
    result.loss_history.reserve(static_cast<std::size_t>(cfg.epochs));
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(std::span<std::size_t>(order));
        for (std::size_t start = 0; start < order.size(); start += batch) {
            const std::size_t stop = std::min(order.size(), start + batch);
            const double scale = 1.0 / static_cast<double>(stop - start);
            grad.zero();
            for (std::size_t k = start; k < stop; ++k) detail::accumulate(m, z[order[k]], y[order[k]], scale, grad);

            beta1_t *= cfg.beta1;
            beta2_t *= cfg.beta2;
            const double step = cfg.learning_rate * std::sqrt(1.0 - beta2_t) / (1.0 - beta1_t);
            // Walk parameters, gradients and both moment buffers in lockstep.
            std::size_t l = 0;
            for (auto& layer : m.layers) {
                auto update = [&](std::vector<double>& params, const std::vector<double>& g, std::vector<double>& m1,
                                  std::vector<double>& m2) {
                    for (std::size_t k = 0; k < params.size(); ++k) {
                        m1[k] = cfg.beta1 * m1[k] + (1.0 - cfg.beta1) * g[k];
                        m2[k] = cfg.beta2 * m2[k] + (1.0 - cfg.beta2) * g[k] * g[k];
                        params[k] -= step * m1[k] / (std::sqrt(m2[k]) + cfg.epsilon * std::sqrt(1.0 - beta2_t));
                    }
                };
                update(layer.weights, grad.weights[l], first.weights[l], second.weights[l]);
                update(layer.biases, grad.biases[l], first.biases[l], second.biases[l]);
                ++l;
            }
        }
        double loss = 0.0;
        for (std::size_t i = 0; i < z.size(); ++i) {
            const double err = detail::forward(m, z[i]) - y[i];
            loss += err * err;
        }
        result.loss_history.push_back(loss / static_cast<double>(z.size()));
    }
    return result;
}

/// Worst relative deviation between backpropagated gradients of the
/// normalized MSE and central finite differences with step `step`.
inline double gradient_check(const MlpModel& model, std::span<const SpeedPowerPoint> points, double step = 1e-5) {
    if (points.empty()) throw InputError("gradient check needs at least one point");
    MlpModel m = model;
    detail::Gradients analytic(m);
    const double scale = 1.0 / static_cast<double>(points.size());
    for (const auto& p : points) detail::accumulate(m, m.input.apply(p.speed), m.output.apply(p.power), scale, analytic);

    double worst = 0.0;
    detail::for_each_parameter(m, analytic, [&](double& param, double g) {
        const double saved = param;
        param = saved + step;
        const double up = normalized_loss(m, points);
        param = saved - step;
        const double down = normalized_loss(m, points);
        param = saved;
        const double numeric = (up - down) / (2.0 * step);
        const double denom = std::max({std::abs(g), std::abs(numeric), 1e-6});
        worst = std::max(worst, std::abs(g - numeric) / denom);
    });
    return worst;
}

// Model files: versioned text, numbers in shortest round-trip form so that a
// stored and reloaded model predicts bit-identically.
//
//   uavpower-mlp 1
//   layers 1 10 10 10 1
//   input_norm <mean> <std>
//   output_norm <mean> <std>
//   speed_range <min> <max>
//   layer <k> weights <w...row-major>
//   layer <k> biases <b...>

inline void store(std::ostream& out, const MlpModel& m) {
    using text::format_double;
    out << "uavpower-mlp 1\n";
    out << "layers";
    for (int s : kLayerSizes) out << ' ' << s;
    out << '\n';
    out << "input_norm " << format_double(m.input.mean) << ' ' << format_double(m.input.std) << '\n';
    out << "output_norm " << format_double(m.output.mean) << ' ' << format_double(m.output.std) << '\n';
    out << "speed_range " << format_double(m.train_speed_min) << ' ' << format_double(m.train_speed_max) << '\n';
    for (int l = 0; l < kLayerCount; ++l) {
        const auto& layer = m.layers[static_cast<std::size_t>(l)];
        out << "layer " << l << " weights";
        for (double w : layer.weights) out << ' ' << format_double(w);
        out << '\n' << "layer " << l << " biases";
        for (double b : layer.biases) out << ' ' << format_double(b);
        out << '\n';
    }
}

inline MlpModel load(std::istream& in) {
    std::string line;
    auto next_line = [&]() -> std::string {
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty() || line.front() == '#') continue;
            return line;
        }
        throw ParseError("model file ended early");
    };
    auto numbers = [](const std::string& l, std::string_view tag, std::size_t skip) {
        std::istringstream ss(l);
        std::string word;
        std::vector<double> out;
        for (std::size_t k = 0; k < skip; ++k) ss >> word;
        if (!text::starts_with(l, tag)) throw ParseError("expected '" + std::string(tag) + "' line");
        while (ss >> word) {
            auto v = text::parse_double(word);
            if (!v) throw ParseError("bad number '" + word + "' in model file");
            out.push_back(*v);
        }
        return out;
    };

    if (next_line() != "uavpower-mlp 1") throw ParseError("not a uavpower-mlp version 1 file");
    const auto sizes = numbers(next_line(), "layers", 1);
    if (sizes.size() != kLayerSizes.size() ||
        !std::equal(sizes.begin(), sizes.end(), kLayerSizes.begin(), [](double a, int b) { return a == b; })) {
        throw ParseError("model layer sizes must be 1 10 10 10 1");
    }
    MlpModel m = MlpModel::zeros();
    auto pair = [&](std::string_view tag) {
        auto v = numbers(next_line(), tag, 1);
        if (v.size() != 2) throw ParseError("'" + std::string(tag) + "' needs 2 values");
        return v;
    };
    auto v = pair("input_norm");
    m.input = {v[0], v[1]};
    v = pair("output_norm");
    m.output = {v[0], v[1]};
    v = pair("speed_range");
    m.train_speed_min = v[0];
    m.train_speed_max = v[1];
    for (int l = 0; l < kLayerCount; ++l) {
        auto& layer = m.layers[static_cast<std::size_t>(l)];
        const std::string prefix = "layer " + std::to_string(l);
        auto w = numbers(next_line(), prefix + " weights", 3);
        auto b = numbers(next_line(), prefix + " biases", 3);
        if (w.size() != layer.weights.size() || b.size() != layer.biases.size()) {
            throw ParseError(prefix + " has the wrong number of values");
        }
        layer.weights = std::move(w);
        layer.biases = std::move(b);
    }
    try {
        m.validate();
    } catch (const InputError& e) {
        throw ParseError(e.what());
    }
    return m;
}

}  // namespace uavpower::mlp
