#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cfpt/error.hpp"
#include "cfpt/kernels.hpp"
#include "cfpt/network.hpp"
#include "cfpt/snapshot.hpp"
#include "cfpt/train.hpp"
#include "oracles.hpp"

using namespace cfpt;

namespace {

LabeledScan random_sample(std::mt19937_64& rng, std::size_t dim) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> td(-2.0, 6.0);
    LabeledScan s;
    s.label.scan_id = "s";
    s.label.patient_id = "p";
    s.label.p = static_cast<int>(rng() & 1U);
    s.label.y = static_cast<int>(rng() & 1U);
    s.label.t_d = td(rng);
    s.label.right_censored = s.label.p == 0;
    for (std::size_t i = 0; i < dim; ++i) s.features.push_back(normal(rng));
    return s;
}

double sample_loss(const Network& net, const LabeledScan& s, const LossConfig& cfg) {
    const auto f = forward(net, s.features);
    return joint_loss({s.label.scan_id, f.y_hat, f.t_pred}, s.label, cfg);
}

// Recomputes both heads from the flat parameters without calling forward().
std::pair<double, double> heads_oracle(const Network& net, std::span<const double> x) {
    const auto pre = oracle::trunk_preactivations(net, x);
    const std::size_t width = net.feature_width();
    std::vector<double> h(x.begin(), x.end());
    if (!net.trunk().empty()) {
        h.assign(pre.end() - static_cast<std::ptrdiff_t>(width), pre.end());
        for (auto& v : h) v = std::max(0.0, v);
    }
    auto head = [&](const DenseSlice& s) {
        double a = net.params()[s.bias_offset];
        for (std::size_t i = 0; i < s.in; ++i) a += net.params()[s.weight_offset + i] * h[i];
        return a;
    };
    return {head(net.cls_head()), head(net.reg_head())};
}

}  // namespace

TEST(Network, LayoutCoversEveryParameterOnce) {
    const Network net(ModelConfig{5, {7, 3}, 1, true});
    EXPECT_EQ(net.num_params(), (5 * 7 + 7) + (7 * 3 + 3) + 2 * (3 + 1));
    std::vector<int> hit(net.num_params(), 0);
    auto mark = [&](const DenseSlice& s) {
        for (std::size_t i = 0; i < s.in * s.out; ++i) ++hit[s.weight_offset + i];
        for (std::size_t i = 0; i < s.out; ++i) ++hit[s.bias_offset + i];
    };
    for (const auto& s : net.trunk()) mark(s);
    mark(net.cls_head());
    mark(net.reg_head());
    for (int h : hit) EXPECT_EQ(h, 1);
    EXPECT_EQ(net.feature_width(), 3u);
}

TEST(Network, RejectsBadConfig) {
    EXPECT_THROW(Network(ModelConfig{0, {4}, 0, true}), Error);
    EXPECT_THROW(Network(ModelConfig{3, {0}, 0, true}), Error);
}

TEST(InitParams, SeededAndBounded) {
    const ModelConfig cfg{6, {16, 8}, 42, true};
    const auto a = init_params(cfg, 2.5);
    const auto b = init_params(cfg, 2.5);
    EXPECT_EQ(a, b);
    auto other = cfg;
    other.seed = 43;
    EXPECT_FALSE(a == init_params(other, 2.5));

    EXPECT_EQ(a.params()[a.reg_head().bias_offset], 2.5);
    EXPECT_EQ(a.params()[a.cls_head().bias_offset], 0.0);
    for (const auto& s : a.trunk()) {
        const double bound = std::sqrt(6.0 / static_cast<double>(s.in));
        for (std::size_t i = 0; i < s.in * s.out; ++i) EXPECT_LE(std::abs(a.params()[s.weight_offset + i]), bound);
        for (std::size_t i = 0; i < s.out; ++i) EXPECT_EQ(a.params()[s.bias_offset + i], 0.0);
    }

    auto off = cfg;
    off.init_reg_bias_mean = false;
    EXPECT_EQ(init_params(off, 2.5).params()[a.reg_head().bias_offset], 0.0);
}

TEST(Forward, MatchesIndependentRecomputation) {
    std::mt19937_64 rng(11);
    for (const auto& hidden : {std::vector<std::size_t>{}, std::vector<std::size_t>{5}, std::vector<std::size_t>{6, 4}}) {
        const auto net = init_params(ModelConfig{4, hidden, 3, true}, 1.0);
        for (int i = 0; i < 50; ++i) {
            const auto s = random_sample(rng, 4);
            const auto f = forward(net, s.features);
            const auto [z, t] = heads_oracle(net, s.features);
            EXPECT_NEAR(f.logit, z, 1e-12);
            EXPECT_NEAR(f.t_pred, t, 1e-12);
            EXPECT_NEAR(f.y_hat, 1.0 / (1.0 + std::exp(-z)), 1e-15);
            EXPECT_GT(f.y_hat, 0.0);
            EXPECT_LT(f.y_hat, 1.0);
        }
    }
}

TEST(Forward, RejectsWrongWidth) {
    const auto net = init_params(ModelConfig{3, {4}, 0, true});
    const std::vector<double> x{1.0, 2.0};
    EXPECT_THROW(forward(net, x), Error);
}

// Every parameter's derivative against a central difference of the full loss,
// skipping instances that sit within reach of a rectifier or loss kink.
TEST(Backward, MatchesCentralDifferences) {
    std::mt19937_64 rng(12);
    const LossConfig cfg{0.5, 1.0, 1e-7};
    const double h = 1e-5;
    int instances = 0;
    while (instances < 200) {
        ModelConfig mcfg{3, {5, 4}, rng(), true};
        auto net = init_params(mcfg, 1.0);
        const auto s = random_sample(rng, 3);
        const auto f = forward(net, s.features);
        bool near_kink = oracle::near_crl_kink(f.t_pred, s.label.t_d, s.label.p, cfg.epsilon, 1e-3);
        for (double a : oracle::trunk_preactivations(net, s.features)) near_kink |= std::abs(a) < 1e-3;
        if (near_kink) continue;

        std::vector<double> grad(net.num_params(), 0.0);
        Workspace ws;
        const double loss = accumulate_gradient(net, s, cfg, grad, ws);
        EXPECT_NEAR(loss, sample_loss(net, s, cfg), 1e-12);
        for (std::size_t j = 0; j < net.num_params(); ++j) {
            const double saved = net.params()[j];
            const double fd = oracle::central_difference(
                [&](double v) {
                    net.params()[j] = v;
                    return sample_loss(net, s, cfg);
                },
                saved, h);
            net.params()[j] = saved;
            ASSERT_LE(oracle::relative_error(grad[j], fd), 1e-5) << "param " << j << " instance " << instances;
        }
        ++instances;
    }
}

TEST(Backward, ZeroLambdaLeavesRegressionHeadUntouched) {
    std::mt19937_64 rng(13);
    const auto net = init_params(ModelConfig{3, {6}, 1, true}, 1.0);
    std::vector<LabeledScan> data;
    for (int i = 0; i < 20; ++i) data.push_back(random_sample(rng, 3));
    const auto g = backward(net, data, LossConfig{0.0, 1.0, 1e-7});
    const auto& reg = net.reg_head();
    for (std::size_t i = 0; i < reg.in; ++i) EXPECT_EQ(g.grad[reg.weight_offset + i], 0.0);
    EXPECT_EQ(g.grad[reg.bias_offset], 0.0);

    const auto g5 = backward(net, data, LossConfig{0.5, 1.0, 1e-7});
    double reg_norm = 0.0;
    for (std::size_t i = 0; i < reg.in; ++i) reg_norm += std::abs(g5.grad[reg.weight_offset + i]);
    EXPECT_GT(reg_norm + std::abs(g5.grad[reg.bias_offset]), 0.0);
}

TEST(Backward, BatchIsMeanOfSamples) {
    std::mt19937_64 rng(14);
    const auto net = init_params(ModelConfig{3, {6}, 2, true}, 0.0);
    std::vector<LabeledScan> data;
    for (int i = 0; i < 13; ++i) data.push_back(random_sample(rng, 3));
    const LossConfig cfg;
    std::vector<double> sum(net.num_params(), 0.0);
    Workspace ws;
    double loss = 0.0;
    for (const auto& s : data) loss += accumulate_gradient(net, s, cfg, sum, ws);
    const auto g = backward(net, data, cfg);
    EXPECT_NEAR(g.loss, loss / 13.0, 1e-12);
    for (std::size_t j = 0; j < sum.size(); ++j) EXPECT_NEAR(g.grad[j], sum[j] / 13.0, 1e-12);
}

TEST(Backward, DuplicatedRowsGiveTheSameMean) {
    std::mt19937_64 rng(15);
    const auto net = init_params(ModelConfig{3, {6}, 2, true}, 0.0);
    std::vector<LabeledScan> data;
    for (int i = 0; i < 4; ++i) data.push_back(random_sample(rng, 3));
    const LossConfig cfg;
    const std::vector<std::size_t> once{2};
    const std::vector<std::size_t> thrice{2, 2, 2};
    const auto a = backward(net, data, once, cfg);
    const auto b = backward(net, data, thrice, cfg);
    EXPECT_NEAR(a.loss, b.loss, 1e-14);
    for (std::size_t j = 0; j < a.grad.size(); ++j) EXPECT_NEAR(a.grad[j], b.grad[j], 1e-14);
    EXPECT_THROW(backward(net, data, std::vector<std::size_t>{}, cfg), Error);
    EXPECT_THROW(backward(net, data, std::vector<std::size_t>{9}, cfg), Error);
}

TEST(Adam, FirstStepMovesByLearningRate) {
    std::vector<double> params{1.0, -2.0, 0.5, 0.0};
    const std::vector<double> grads{0.3, -4.0, 1e-3, 0.0};
    AdamState state(params.size());
    adam_step(params, state, grads, 0.01, 0.0);
    EXPECT_EQ(state.step, 1u);
    // Bias-corrected first step: m_hat / sqrt(v_hat) = sign(g).
    EXPECT_NEAR(params[0], 1.0 - 0.01, 1e-9);
    EXPECT_NEAR(params[1], -2.0 + 0.01, 1e-9);
    EXPECT_NEAR(params[2], 0.5 - 0.01 * 1e-3 / (1e-3 + 1e-8), 1e-12);
    EXPECT_EQ(params[3], 0.0);
}

TEST(Adam, WeightDecayEntersTheGradient) {
    std::vector<double> params{2.0};
    const std::vector<double> grads{0.0};
    AdamState state(1);
    adam_step(params, state, grads, 0.1, 0.5);
    EXPECT_NEAR(state.m[0], 0.1 * 0.5 * 2.0, 1e-15);
    EXPECT_NEAR(params[0], 2.0 - 0.1, 1e-8);
}

TEST(Adam, MatchesHandRolledRecurrence) {
    std::mt19937_64 rng(16);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> params(5), ref(5), m(5, 0.0), v(5, 0.0);
    for (std::size_t i = 0; i < 5; ++i) ref[i] = params[i] = normal(rng);
    AdamState state(5);
    for (int t = 1; t <= 30; ++t) {
        std::vector<double> g(5);
        for (auto& x : g) x = normal(rng);
        adam_step(params, state, g, 0.05, 0.01);
        for (std::size_t i = 0; i < 5; ++i) {
            const double gi = g[i] + 0.01 * ref[i];
            m[i] = 0.9 * m[i] + 0.1 * gi;
            v[i] = 0.999 * v[i] + 0.001 * gi * gi;
            const double mh = m[i] / (1.0 - std::pow(0.9, t));
            const double vh = v[i] / (1.0 - std::pow(0.999, t));
            ref[i] -= 0.05 * mh / (std::sqrt(vh) + 1e-8);
        }
    }
    for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(params[i], ref[i], 1e-12);
}

TEST(Snapshot, RoundTripsBitwise) {
    const auto net = init_params(ModelConfig{4, {9, 3}, 77, false}, 1.25);
    const std::string text = write_snapshot(net, 0xdeadbeefcafef00dULL);
    const auto back = read_snapshot(text);
    EXPECT_EQ(back.config_hash, 0xdeadbeefcafef00dULL);
    EXPECT_EQ(back.network, net);
    EXPECT_EQ(back.network.config().hidden_dims, net.config().hidden_dims);
    EXPECT_EQ(back.network.config().seed, 77u);
    EXPECT_EQ(write_snapshot(back.network, back.config_hash), text);

    const auto linear = init_params(ModelConfig{2, {}, 1, true});
    EXPECT_EQ(read_snapshot(write_snapshot(linear, 1)).network, linear);
}

TEST(Snapshot, RejectsCorruptInput) {
    const auto net = init_params(ModelConfig{2, {3}, 1, true});
    std::string text = write_snapshot(net, 1);
    EXPECT_THROW(read_snapshot("cfpt-snapshot 2\n"), Error);
    EXPECT_THROW(read_snapshot(text.substr(0, text.size() - 10)), Error);
    EXPECT_THROW(read_snapshot(text + "1.0\n"), Error);
}
