#include "support.hpp"

#include <gtest/gtest.h>

using namespace eel;
using namespace testing_support;

namespace {

ExtendedLikelihood three_point() { return ExtendedLikelihood(builtin_mean(1), column_sample({1, 2, 4})); }

}  // namespace

TEST(Factor, FirstAndSecondOrder) {
    const auto f = ExpansionFactor::first_order(10);
    EXPECT_EQ(f(0.0), 1.0);
    EXPECT_DOUBLE_EQ(f(4.0), 1.2);
    EXPECT_LT(f(1.0), f(1.1));
    const auto s = ExpansionFactor::second_order(16, 1.5);
    EXPECT_EQ(s(0.0), 1.0);
    EXPECT_DOUBLE_EQ(s.delta_n, 0.25);
    EXPECT_DOUBLE_EQ(s(16.0), 1.0 + 1.5 / 32.0 * 2.0);
}

TEST(Forward, Examples) {
    const auto el = three_point();
    EXPECT_EQ(el.forward(el.center()), el.center());
    const double l = 2.0 * std::log(1.125);
    const double expect = 7.0 / 3.0 + (1.0 + l / 6.0) * (2.0 - 7.0 / 3.0);
    EXPECT_NEAR(el.forward(vec({2.0}))(0), expect, 1e-9);
    EXPECT_NEAR(el.forward(vec({2.0}))(0), 1.986913, 1e-6);
    EXPECT_THROW(el.forward(vec({9.0})), DomainViolation);
}

TEST(Inverse, Examples) {
    const auto el = three_point();
    const InverseResult c = el.inverse(el.center());
    EXPECT_EQ(c.preimage, el.center());
    EXPECT_EQ(c.residual, 0.0);

    const double image = el.forward(vec({2.0}))(0);
    const InverseResult r = el.inverse(vec({image}));
    EXPECT_NEAR(r.preimage(0), 2.0, 1e-6);
    EXPECT_NEAR(r.loglik, 2.0 * std::log(1.125), 1e-6);
    EXPECT_NEAR(el.eel(vec({image})), 0.235566, 1e-6);
    EXPECT_EQ(el.eel(el.center()), 0.0);
}

TEST(Inverse, RoundTripAndPreimageIdentity) {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> z;
    const std::vector<std::pair<EstimatingModel, Sample>> cases = {
        {builtin_mean(1), normal_sample(rng, 20, 1)},
        {builtin_mean(2), normal_sample(rng, 20, 2)},
        {builtin_linear_regression(2), regression_sample(rng, 20)},
        {builtin_mean_variance(), normal_sample(rng, 30, 1)},
    };
    for (const auto& [m, s] : cases) {
        const ExtendedLikelihood el(m, s);
        const auto f = el.factor(ExpansionOrder::first);
        int done = 0;
        while (done < 100) {
            Vector theta = el.center();
            for (auto& v : theta) v += 0.3 * z(rng) * (m.name == "regression" ? 0.1 : 1.0);
            const ExtendedReal l = el.oel(theta);
            if (l.is_infinite()) continue;
            const InverseResult inv = el.inverse(el.forward(theta));
            EXPECT_LE((inv.preimage - theta).norm(), 1e-6) << m.name;
            const Vector lhs = f(inv.loglik) * (inv.preimage - el.center());
            EXPECT_LE((lhs - (el.forward(theta) - el.center())).norm(), 1e-8) << m.name;
            ++done;
        }
    }
}

TEST(Inverse, PreimageOnSegmentAndBoundedByOel) {
    std::mt19937_64 rng(32);
    std::normal_distribution<double> z;
    const ExtendedLikelihood el(builtin_linear_regression(2), regression_sample(rng, 25));
    int done = 0;
    while (done < 100) {
        const Vector theta = el.center() + vec({0.5 * z(rng), 0.03 * z(rng)});
        const ExtendedReal l = el.oel(theta);
        const InverseResult inv = el.inverse(theta);
        EXPECT_GE(inv.t, 0.0);
        EXPECT_LE(inv.t, 1.0);
        const Vector on_segment = el.center() + inv.t * (theta - el.center());
        EXPECT_LE((on_segment - inv.preimage).norm(), 1e-12 * (1.0 + theta.norm()));
        EXPECT_LE(inv.residual, 1e-8 * (1.0 + theta.norm()));
        EXPECT_NEAR(inv.loglik, el.oel(inv.preimage).value(), 1e-12 * (1.0 + inv.loglik));
        if (l.is_infinite()) continue;
        EXPECT_GE(inv.loglik, 0.0);
        EXPECT_LE(inv.loglik, l.value() + 1e-10);
        ++done;
    }
}

TEST(Forward, SimilarityPerContour) {
    // Points on one level set of l in the mean model with d = 2.
    std::mt19937_64 rng(33);
    const ExtendedLikelihood el(builtin_mean(2), normal_sample(rng, 30, 2));
    const double target = 2.0;
    for (int k = 0; k < 12; ++k) {
        const double a = 2.0 * std::numbers::pi * k / 12.0;
        const Vector dir = vec({std::cos(a), std::sin(a)});
        double lo = 0.0, hi = 5.0;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (el.oel(el.center() + mid * dir).at_most(target)) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        const Vector theta = el.center() + lo * dir;
        ASSERT_NEAR(el.oel(theta).value(), target, 1e-10);
        const double ratio = (el.forward(theta) - el.center()).norm() / (theta - el.center()).norm();
        const double expect = 1.0 + el.oel(theta).value() / (2.0 * 30.0);
        EXPECT_NEAR(ratio, expect, 1e-8);
        EXPECT_NEAR(ratio, 1.0 + target / 60.0, 1e-8);
    }
}

TEST(Inverse, RemoteThetaIsFinite) {
    std::mt19937_64 rng(34);
    const ExtendedLikelihood el(builtin_mean(2), normal_sample(rng, 20, 2));
    const Vector remote = el.center() + 1e6 * vec({1.0, 0.0});
    EXPECT_TRUE(el.oel(remote).is_infinite());
    const double v = el.eel(remote);
    EXPECT_TRUE(std::isfinite(v));
    EXPECT_GT(v, 0.0);
    const ElEvaluation ev = el.evaluate(remote);
    EXPECT_FALSE(ev.in_domain);
    EXPECT_TRUE(std::isfinite(ev.eel1));
}

TEST(Eel, SecondOrderUnsupportedWhenOverDetermined) {
    std::mt19937_64 rng(35);
    const Sample s = normal_sample(rng, 30, 1);
    const ExtendedLikelihood el(builtin_mean_variance(), s);
    EXPECT_THROW(el.eel(el.center() + vec({0.1}), ExpansionOrder::second), UnsupportedConfiguration);
    EXPECT_THROW(eel_loglik(builtin_mean_variance(), s, vec({0.1}), ExpansionOrder::second),
                 UnsupportedConfiguration);
    EXPECT_NO_THROW(eel_loglik(builtin_mean_variance(), s, vec({0.1}), ExpansionOrder::first));
    EXPECT_FALSE(el.evaluate(el.center() + vec({0.1})).eel2.has_value());
}

TEST(Eel, SecondOrderRoundTrip) {
    std::mt19937_64 rng(36);
    const ExtendedLikelihood el(builtin_mean(1), normal_sample(rng, 40, 1));
    ASSERT_TRUE(el.bartlett().has_value());
    for (double d : {-0.3, -0.1, 0.05, 0.2}) {
        const Vector theta = el.center() + vec({d});
        const Vector image = el.forward(theta, ExpansionOrder::second);
        const InverseResult inv = el.inverse(image, ExpansionOrder::second);
        EXPECT_NEAR(inv.preimage(0), theta(0), 1e-6);
    }
}

TEST(Bartlett, NormalLikeMomentsGiveThreeHalves) {
    // {-1, 0, 0, 0, 0, 1}: m3 = 0 and m4 / m2^2 = (1/3) / (1/9) = 3.
    Matrix g(6, 1);
    g << -1.0, 0.0, 0.0, 0.0, 0.0, 1.0;
    EXPECT_NEAR(bartlett_constant(g), 1.5, 1e-12);
}

TEST(Bartlett, TwoPointGivesOneHalf) {
    Matrix g(8, 1);
    g << -1, 1, -1, 1, -1, 1, -1, 1;
    EXPECT_NEAR(bartlett_constant(g), 0.5, 1e-12);
}

TEST(Bartlett, AffineInvariance) {
    std::mt19937_64 rng(37);
    std::exponential_distribution<double> e;
    Matrix g(40, 2);
    for (Eigen::Index i = 0; i < g.rows(); ++i) g.row(i) << e(rng), e(rng) + e(rng);
    Matrix a(2, 2);
    a << 2.0, 0.7, -1.3, 0.4;
    EXPECT_NEAR(bartlett_constant(g * a.transpose()), bartlett_constant(g), 1e-10);
}

TEST(Bartlett, SingularCovarianceThrows) {
    Matrix g(5, 2);
    g << 1, 2, 2, 4, -1, -2, 0, 0, 3, 6;
    EXPECT_THROW(bartlett_constant(g), RankDeficiency);
}

TEST(Bel, Examples) {
    EXPECT_EQ(bartlett_scale(ExtendedReal(0.0), 1.5, 3).value, ExtendedReal(0.0));
    const BelValue v = bartlett_scale(ExtendedReal(0.235566), 1.5, 3);
    EXPECT_NEAR(v.value.value(), 0.117783, 1e-12);
    EXPECT_FALSE(v.clamped);
    const BelValue c = bartlett_scale(ExtendedReal(2.0), 4.0, 3);
    EXPECT_TRUE(c.clamped);
    EXPECT_EQ(c.value.value(), 0.0);
    EXPECT_TRUE(bartlett_scale(ExtendedReal::infinity(), 1.0, 10).value.is_infinite());

    const auto el = three_point();
    EXPECT_EQ(el.bel(el.center()).value.value(), 0.0);
}
