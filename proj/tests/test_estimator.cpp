#include "support.hpp"

#include <gtest/gtest.h>

using namespace eel;
using namespace testing_support;

TEST(Mele, MeanSample) {
    const MeleResult r = mele(builtin_mean(1), column_sample({1, 2, 4}));
    EXPECT_NEAR(r.theta_tilde(0), 7.0 / 3.0, 1e-12);
    EXPECT_LE(r.loglik_at_tilde, 1e-8);
    EXPECT_TRUE(r.converged);
}

TEST(Mele, RegressionEqualsLeastSquares) {
    std::mt19937_64 rng(21);
    for (int k = 0; k < 20; ++k) {
        const Sample s = regression_sample(rng, 10 + k);
        const auto m = builtin_linear_regression(2);
        const MeleResult r = mele(m, s);
        EXPECT_EQ(r.method, MeleMethod::least_squares);
        EXPECT_LE((r.theta_tilde - least_squares(s)).cwiseAbs().maxCoeff(), 1e-8);
        EXPECT_LE(r.loglik_at_tilde, 1e-8);
        const Matrix g = g_matrix(m, s, r.theta_tilde);
        EXPECT_LE(g.colwise().sum().cwiseAbs().maxCoeff(), 1e-8 * static_cast<double>(s.n()));
        EXPECT_TRUE(oel_loglik(m, s, r.theta_tilde).is_finite());
    }
}

TEST(Mele, MeanVarianceMatchesGridSearch) {
    std::mt19937_64 rng(42);
    const Sample s = normal_sample(rng, 50, 1);
    const auto m = builtin_mean_variance();
    double best = 0.0, best_l = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 20000; ++k) {
        const double t = -1.0 + 1e-4 * k;
        const ExtendedReal l = oel_loglik(m, s, vec({t}));
        if (l.is_finite() && l.value() < best_l) {
            best_l = l.value();
            best = t;
        }
    }
    const MeleResult r = mele(m, s);
    EXPECT_EQ(r.method, MeleMethod::profile_minimize);
    EXPECT_NEAR(r.theta_tilde(0), best, 1e-3);
    EXPECT_LE(r.loglik_at_tilde, best_l + 1e-9);
    const Vector grad = oel_gradient(m, s, r.theta_tilde);
    EXPECT_LE(grad.norm(), 1e-6 * (1.0 + r.loglik_at_tilde));
}

TEST(Mele, OverDeterminedRestartsFromSubsystem) {
    std::mt19937_64 rng(7);
    const Sample s = normal_sample(rng, 40, 1);
    MeleOptions opts;
    opts.init = vec({25.0});
    const MeleResult r = mele(builtin_mean_variance(), s, opts);
    const MeleResult ref = mele(builtin_mean_variance(), s);
    EXPECT_NEAR(r.theta_tilde(0), ref.theta_tilde(0), 1e-6);
}

TEST(Mele, MultiStartNeverWorse) {
    std::mt19937_64 rng(17);
    for (int k = 0; k < 10; ++k) {
        const Sample s = normal_sample(rng, 30, 1);
        MeleOptions multi;
        multi.multi_start = true;
        const MeleResult a = mele(builtin_mean_variance(), s);
        const MeleResult b = mele(builtin_mean_variance(), s, multi);
        EXPECT_LE(b.loglik_at_tilde, a.loglik_at_tilde + 1e-9);
    }
}

TEST(Mele, MonteCarloConsistency) {
    std::mt19937_64 rng(100);
    const auto m = builtin_linear_regression(2);
    const int reps = 200;
    Matrix est(reps, 2);
    for (int r = 0; r < reps; ++r) est.row(r) = mele(m, regression_sample(rng, 100)).theta_tilde.transpose();
    const Vector mean = est.colwise().mean().transpose();
    const Vector truth = vec({1.0, 2.0});
    for (int j = 0; j < 2; ++j) {
        const double sd = std::sqrt((est.col(j).array() - mean(j)).square().sum() / (reps - 1));
        EXPECT_LE(std::abs(mean(j) - truth(j)), 3.0 * sd / std::sqrt(static_cast<double>(reps)));
    }
}
