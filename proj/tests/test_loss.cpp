#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <random>

#include "cfpt/error.hpp"
#include "cfpt/loss.hpp"
#include "oracles.hpp"

using namespace cfpt;

TEST(Crl, WorkedExamples) {
    EXPECT_EQ(crl(5, 3, 0, 1), 0.0);
    EXPECT_EQ(crl(2, 3, 0, 1), 4.0);
    EXPECT_EQ(crl(1, 2, 1, 1), 0.0);
    EXPECT_EQ(crl(3, 2, 1, 1), 4.0);
    EXPECT_EQ(crl(-1, 0, 1, 1), 0.0);
    EXPECT_EQ(crl(1, 0.5, 1, 1), 2.25);
}

TEST(Crl, BoundaryTdEqualsEpsilonTakesClampedBranch) {
    // t_d = eps: the clamped branch gives 0 below t_d - eps; the unclamped one would not.
    EXPECT_EQ(crl(-1.0, 1.0, 1, 1.0), 0.0);
    EXPECT_EQ(crl(2.0, 1.0, 1, 1.0), 4.0);
}

TEST(Crl, RejectsBadArguments) {
    EXPECT_THROW(crl(0, 0, 0, 0.0), Error);
    EXPECT_THROW(crl(0, 0, 0, -1.0), Error);
    EXPECT_THROW(crl(NAN, 0, 0, 1.0), Error);
    EXPECT_THROW(crl(0, INFINITY, 1, 1.0), Error);
    EXPECT_THROW(crl(0, 0, 2, 1.0), Error);
    EXPECT_THROW(crl_grad(0, 0, 0, 0.0), Error);
}

TEST(CrlGrad, WorkedExamples) {
    EXPECT_EQ(crl_grad(5, 3, 0, 1), 0.0);
    EXPECT_EQ(crl_grad(2, 3, 0, 1), -4.0);
    EXPECT_EQ(crl_grad(3, 2, 1, 1), 4.0);
    // Cross-check against central differences of the scalar oracle.
    EXPECT_NEAR(oracle::central_difference([](double t) { return oracle::crl(t, 3, 0, 1); }, 2.0), -4.0, 1e-8);
    EXPECT_NEAR(oracle::central_difference([](double t) { return oracle::crl(t, 2, 1, 1); }, 3.0), 4.0, 1e-8);
}

TEST(Crl, MatchesOracleOnRandomTuples) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> time(-5.0, 10.0);
    std::uniform_real_distribution<double> margin(0.0, 3.0);
    for (int i = 0; i < 10000; ++i) {
        const int p = static_cast<int>(rng() & 1U);
        const double t = time(rng), td = time(rng);
        double eps = margin(rng);
        if (eps == 0.0) eps = 1.0;
        ASSERT_NEAR(crl(t, td, p, eps), oracle::crl(t, td, p, eps), 1e-12);
    }
}

TEST(Crl, ZeroSetsAndConvexity) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> time(-5.0, 10.0);
    std::uniform_real_distribution<double> margin(0.05, 3.0);
    for (int i = 0; i < 10000; ++i) {
        const int p = static_cast<int>(rng() & 1U);
        const double t = time(rng), td = time(rng), eps = margin(rng);
        const double v = crl(t, td, p, eps);
        ASSERT_GE(v, 0.0);
        if (p == 0) {
            EXPECT_EQ(v == 0.0, t >= td + eps);
        } else if (td <= eps) {
            EXPECT_EQ(v == 0.0, t <= td - eps);
        } else {
            EXPECT_GT(v, 0.0);  // unique minimiser is measure-zero
            EXPECT_LE(crl(td - eps, td, p, eps), 1e-24);  // minimiser, up to rounding of td - eps
        }
        const double u = time(rng);
        const double mid = crl(0.5 * (t + u), td, p, eps);
        EXPECT_LE(mid, 0.5 * (v + crl(u, td, p, eps)) + 1e-12);
    }
}

TEST(CrlGrad, ContinuousAcrossKinks) {
    for (double eps : {0.3, 1.0, 2.5}) {
        for (double td : {-1.0, 0.0, 0.5, 2.0, 7.0}) {
            for (int p : {0, 1}) {
                const double kink = p == 0 ? td + eps : td - eps;
                const double below = crl_grad(kink - 1e-9, td, p, eps);
                const double above = crl_grad(kink + 1e-9, td, p, eps);
                EXPECT_NEAR(below, above, 1e-8);
                EXPECT_NEAR(crl(kink - 1e-9, td, p, eps), crl(kink + 1e-9, td, p, eps), 1e-15);
            }
        }
    }
}

TEST(CrlGrad, MatchesCentralDifferences) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> time(-5.0, 10.0);
    std::uniform_real_distribution<double> margin(0.05, 3.0);
    int checked = 0;
    while (checked < 2000) {
        const int p = static_cast<int>(rng() & 1U);
        const double t = time(rng), td = time(rng), eps = margin(rng);
        if (oracle::near_crl_kink(t, td, p, eps, 1e-3)) continue;
        const double fd = oracle::central_difference([&](double x) { return oracle::crl(x, td, p, eps); }, t);
        ASSERT_LE(oracle::relative_error(crl_grad(t, td, p, eps), fd), 1e-6);
        ++checked;
    }
}

TEST(Cel, Values) {
    EXPECT_NEAR(cel(0.5, 1, 1e-7), 0.6931471805599453, 1e-15);
    EXPECT_NEAR(cel(1.0, 1, 1e-7), -std::log(1.0 - 1e-7), 1e-18);
    EXPECT_LT(cel(1.0, 1, 1e-7), 1e-6);
    EXPECT_TRUE(std::isfinite(cel(0.0, 1, 1e-7)));
    EXPECT_DOUBLE_EQ(cel(0.3, 0, 1e-7), cel(0.7, 1, 1e-7));
    EXPECT_THROW(cel(0.5, 2, 1e-7), Error);
    EXPECT_THROW(cel(1.5, 1, 1e-7), Error);
}

TEST(CelGradLogit, Values) {
    EXPECT_EQ(cel_grad_logit(0.0, 1), -0.5);
    EXPECT_EQ(cel_grad_logit(0.0, 0), 0.5);
    EXPECT_NEAR(cel_grad_logit(40.0, 1), 0.0, 1e-15);
    EXPECT_THROW(cel_grad_logit(NAN, 1), Error);
}

TEST(CelGradLogit, MatchesCentralDifferences) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> logit(-8.0, 8.0);
    for (int i = 0; i < 2000; ++i) {
        const double z = logit(rng);
        const int y = static_cast<int>(rng() & 1U);
        const double fd = oracle::central_difference(
            [&](double x) {
                const double q = 1.0 / (1.0 + std::exp(-x));
                return y == 1 ? -std::log(q) : -std::log(1.0 - q);
            },
            z);
        ASSERT_LE(oracle::relative_error(cel_grad_logit(z, y), fd), 1e-6) << z;
    }
}

TEST(JointLoss, LinearCombination) {
    const LossConfig cfg{0.5, 1.0, 1e-7};
    const ScanLabel label{"s", "p", 3.0, 0, 1, true};
    // crl(2, 3, 0, 1) = 4 and cel(0.5, 1) = log 2
    EXPECT_NEAR(joint_loss({"s", 0.5, 2.0}, label, cfg), 2.0 + std::log(2.0), 1e-15);
    EXPECT_NEAR(joint_loss({"s", 0.5, 2.0}, label, cfg), 2.693147, 1e-6);

    const ScanLabel zero{"s", "p", 3.0, 0, 0, true};
    EXPECT_NEAR(joint_loss({"s", 0.0, 5.0}, zero, cfg), 0.0, 1e-6);
}

TEST(JointLoss, ZeroLambdaIsBitwiseCrossEntropy) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const LossConfig cfg{0.0, 1.0, 1e-7};
    for (int i = 0; i < 1000; ++i) {
        const ScanLabel label{"s", "p", 10 * unit(rng) - 2, 1, static_cast<int>(rng() & 1U), false};
        const Prediction pred{"s", unit(rng), 20 * unit(rng) - 5};
        const double a = joint_loss(pred, label, cfg);
        const double b = cel(pred.y_hat, label.y, cfg.prob_clamp);
        EXPECT_EQ(std::memcmp(&a, &b, sizeof a), 0);
    }
}

TEST(BatchLoss, MeanOfJointLoss) {
    const LossConfig cfg;
    const std::vector<ScanLabel> labels{{"a", "p", 3.0, 0, 0, true}, {"b", "q", 2.0, 1, 1, false}};
    const std::vector<Prediction> preds{{"a", 0.2, 1.0}, {"b", 0.9, 4.0}};
    const double l0 = joint_loss(preds[0], labels[0], cfg);
    const double l1 = joint_loss(preds[1], labels[1], cfg);
    EXPECT_DOUBLE_EQ(batch_loss(preds, labels, cfg), 0.5 * (l0 + l1));
    EXPECT_EQ(batch_loss(std::span(preds).first(1), std::span(labels).first(1), cfg), l0);

    const std::vector<ScanLabel> rl{labels[1], labels[0]};
    const std::vector<Prediction> rp{preds[1], preds[0]};
    EXPECT_DOUBLE_EQ(batch_loss(rp, rl, cfg), batch_loss(preds, labels, cfg));
}

TEST(BatchLoss, Errors) {
    const LossConfig cfg;
    const std::vector<ScanLabel> labels{{"a", "p", 3.0, 0, 0, true}};
    const std::vector<Prediction> preds{{"b", 0.2, 1.0}};
    EXPECT_THROW(batch_loss(preds, labels, cfg), Error);
    EXPECT_THROW(batch_loss({}, {}, cfg), Error);
    const std::vector<Prediction> two{{"a", 0.2, 1.0}, {"a", 0.2, 1.0}};
    EXPECT_THROW(batch_loss(two, labels, cfg), Error);
}

TEST(LossConfig, Validation) {
    EXPECT_NO_THROW(LossConfig{}.validate());
    EXPECT_THROW((LossConfig{0.5, 0.0, 1e-7}.validate()), Error);
    EXPECT_THROW((LossConfig{-0.1, 1.0, 1e-7}.validate()), Error);
    EXPECT_THROW((LossConfig{0.5, 1.0, 0.5}.validate()), Error);
}
