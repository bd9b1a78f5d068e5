#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "support.hpp"

using namespace uavpower;

namespace {

std::vector<SpeedPowerPoint> curve_points(int n) {
    std::vector<SpeedPowerPoint> pts;
    for (int i = 0; i < n; ++i) {
        const double v = 14.0 * i / (n - 1);
        pts.push_back({v, power_level_flight(v, reference_params()).total});
    }
    return pts;
}

mlp::MlpModel random_model(std::uint64_t seed) {
    Rng rng(seed);
    auto m = mlp::MlpModel::initialized(rng);
    for (auto& layer : m.layers) {
        for (auto& b : layer.biases) b = rng.uniform(-0.5, 0.5);
    }
    m.input = {7.0, 4.0};
    m.output = {300.0, 120.0};
    return m;
}

}  // namespace

TEST(Mlp, Shape) {
    const auto m = mlp::MlpModel::zeros();
    EXPECT_EQ(m.parameter_count(), 20u + 110u + 110u + 11u);
    EXPECT_EQ(m.layers[0].inputs, 1);
    EXPECT_EQ(m.layers[3].outputs, 1);
}

TEST(Mlp, GlorotInitRange) {
    Rng rng(1);
    const auto m = mlp::MlpModel::initialized(rng);
    for (const auto& layer : m.layers) {
        const double limit = std::sqrt(6.0 / (layer.inputs + layer.outputs));
        for (double w : layer.weights) EXPECT_LE(std::abs(w), limit);
        for (double b : layer.biases) EXPECT_EQ(b, 0.0);
    }
}

TEST(Mlp, ZeroWeightsPredictDenormalizedBias) {
    auto m = mlp::MlpModel::zeros();
    m.layers[3].biases[0] = 0.75;
    m.input = {5.0, 2.0};
    m.output = {300.0, 40.0};
    for (double v : {0.0, 3.3, 14.0, 100.0}) EXPECT_DOUBLE_EQ(mlp::predict(m, v), 330.0);
}

TEST(Mlp, NormalizationRoundTrip) {
    const mlp::Normalization n{312.7, 118.3};
    Rng rng(2);
    for (int i = 0; i < 1000; ++i) {
        const double p = rng.uniform(100, 700);
        EXPECT_NEAR(n.invert(n.apply(p)), p, 1e-12 * p);
    }
}

TEST(Mlp, GradientCheckRandomModels) {
    const auto pts = curve_points(10);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        EXPECT_LT(mlp::gradient_check(random_model(seed), pts), 1e-4) << seed;
    }
}

TEST(Mlp, GradientCheckZeroModelOutputBias) {
    auto m = mlp::MlpModel::zeros();
    m.input = {7.0, 4.0};
    m.output = {300.0, 120.0};
    const auto pts = curve_points(10);
    mlp::detail::Gradients g(m);
    for (const auto& p : pts) mlp::detail::accumulate(m, m.input.apply(p.speed), m.output.apply(p.power), 0.1, g);
    const double h = 1e-5;
    auto shifted = m;
    shifted.layers[3].biases[0] = h;
    const double up = mlp::normalized_loss(shifted, pts);
    shifted.layers[3].biases[0] = -h;
    const double down = mlp::normalized_loss(shifted, pts);
    EXPECT_NEAR(g.biases[3][0], (up - down) / (2 * h), 1e-9);
    EXPECT_LT(mlp::gradient_check(m, pts), 1e-4);
}

TEST(Mlp, GradientCheckImprovesWithSmallerStep) {
    const auto pts = curve_points(10);
    const auto m = random_model(9);
    EXPECT_LT(mlp::gradient_check(m, pts, 1e-5), mlp::gradient_check(m, pts, 1e-3));
}

TEST(Mlp, ConstantPowerLearned) {
    std::vector<SpeedPowerPoint> pts;
    for (int i = 0; i < 50; ++i) pts.push_back({0.28 * i, 400.0});
    mlp::TrainConfig cfg;
    cfg.epochs = 300;
    const auto res = mlp::train(pts, cfg);
    for (double v = 0.0; v <= 13.72; v += 0.1) EXPECT_NEAR(mlp::predict(res.model, v), 400.0, 1.0);
}

TEST(Mlp, TrainingIsDeterministicAndReducesLoss) {
    const auto pts = curve_points(200);
    mlp::TrainConfig cfg;
    cfg.epochs = 200;
    cfg.seed = 5;
    const auto a = mlp::train(pts, cfg);
    const auto b = mlp::train(pts, cfg);
    EXPECT_EQ(a.model, b.model);
    EXPECT_EQ(a.loss_history, b.loss_history);
    ASSERT_EQ(a.loss_history.size(), 200u);
    EXPECT_LE(a.loss_history.back(), a.loss_history.front());
    cfg.seed = 6;
    EXPECT_NE(mlp::train(pts, cfg).model, a.model);
}

TEST(Mlp, DegenerateData) {
    std::vector<SpeedPowerPoint> same(10, {4.0, 200.0});
    EXPECT_THROW(mlp::train(same), InputError);
    EXPECT_THROW(mlp::train(std::vector<SpeedPowerPoint>{{1.0, 2.0}}), InputError);
    mlp::TrainConfig cfg;
    cfg.learning_rate = 0.0;
    EXPECT_THROW(mlp::train(curve_points(10), cfg), InputError);
    cfg = {};
    cfg.batch_size = 0;
    EXPECT_THROW(mlp::train(curve_points(10), cfg), InputError);
}

TEST(Mlp, ExtrapolationFlag) {
    std::vector<SpeedPowerPoint> pts{{2.0, 200.0}, {8.0, 300.0}};
    mlp::TrainConfig cfg;
    cfg.epochs = 1;
    const auto res = mlp::train(pts, cfg);
    EXPECT_FALSE(res.model.extrapolates(5.0));
    EXPECT_TRUE(res.model.extrapolates(1.0));
    EXPECT_TRUE(res.model.extrapolates(9.0));
}

TEST(Mlp, StoreLoadIsBitExact) {
    const auto m = random_model(3);
    std::ostringstream out;
    out << "# header comment\n";
    mlp::store(out, m);
    std::istringstream in(out.str());
    const auto back = mlp::load(in);
    EXPECT_EQ(back, m);
    for (double v = 0.0; v < 14.0; v += 0.37) EXPECT_EQ(mlp::predict(back, v), mlp::predict(m, v));
}

TEST(Mlp, LoadRejectsBadFiles) {
    auto load = [](const std::string& s) {
        std::istringstream in(s);
        return mlp::load(in);
    };
    EXPECT_THROW(load(""), ParseError);
    EXPECT_THROW(load("uavpower-mlp 2\n"), ParseError);
    EXPECT_THROW(load("uavpower-mlp 1\nlayers 1 5 1\n"), ParseError);
    std::ostringstream out;
    mlp::store(out, random_model(4));
    std::string text = out.str();
    EXPECT_THROW(load(text.substr(0, text.size() / 2)), ParseError);
}

TEST(Mlp, PredictIsContinuous) {
    const auto m = random_model(8);
    for (double v = 0.0; v <= 14.0; v += 0.5) {
        EXPECT_LT(std::abs(mlp::predict(m, v + 1e-6) - mlp::predict(m, v)), 1e-3);
    }
}
