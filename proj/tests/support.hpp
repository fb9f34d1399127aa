#pragma once

#include "eel/eel.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

namespace testing_support {

using eel::Matrix;
using eel::Vector;

inline Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out(i++) = x;
    return out;
}

inline eel::Sample column_sample(std::initializer_list<double> v) {
    return eel::Sample::from_rows(vec(v));
}

inline eel::Sample normal_sample(std::mt19937_64& rng, Eigen::Index n, Eigen::Index d) {
    std::normal_distribution<double> z;
    Matrix rows(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) rows(i, j) = z(rng);
    }
    return eel::Sample::from_rows(rows);
}

/// Rows (y, 1, x1) with x1 ~ U[0, 30] and N(0, 1) errors around 1 + 2 x1.
inline eel::Sample regression_sample(std::mt19937_64& rng, Eigen::Index n) {
    std::uniform_real_distribution<double> u(0.0, 30.0);
    std::normal_distribution<double> z;
    Matrix rows(n, 3);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double x = u(rng);
        rows(i, 0) = 1.0 + 2.0 * x + z(rng);
        rows(i, 1) = 1.0;
        rows(i, 2) = x;
    }
    return eel::Sample::from_rows(rows);
}

/// Brute-force hull check for q <= 2: 0 is interior iff every direction on a
/// fine angular grid (plus the directions perpendicular to each g_i) sees some
/// strictly negative projection.
inline bool brute_force_inside(const Matrix& g) {
    const Eigen::Index q = g.cols();
    if (q == 1) return g.minCoeff() < 0.0 && g.maxCoeff() > 0.0;
    std::vector<Vector> dirs;
    const int steps = 20000;
    for (int k = 0; k < steps; ++k) {
        const double a = 2.0 * std::numbers::pi * k / steps;
        dirs.push_back(vec({std::cos(a), std::sin(a)}));
    }
    for (Eigen::Index i = 0; i < g.rows(); ++i) {
        const double nrm = g.row(i).norm();
        if (nrm == 0.0) continue;
        dirs.push_back(vec({-g(i, 1) / nrm, g(i, 0) / nrm}));
        dirs.push_back(vec({g(i, 1) / nrm, -g(i, 0) / nrm}));
    }
    for (const Vector& v : dirs) {
        if ((g * v).minCoeff() >= -1e-12) return false;
    }
    return true;
}

/// Root of sum g_i / (1 + lambda g_i) = 0 for scalar g by bisection on the
/// feasible interval (-1/max g, -1/min g).
inline double bisect_lambda(const Vector& g) {
    const double lo0 = -1.0 / g.maxCoeff();
    const double hi0 = -1.0 / g.minCoeff();
    auto f = [&](double l) { return (g.array() / (1.0 + l * g.array())).sum(); };
    double lo = lo0 + 1e-15 * std::abs(lo0);
    double hi = hi0 - 1e-15 * std::abs(hi0);
    // f is decreasing in lambda.
    for (int it = 0; it < 400 && hi - lo > 1e-15 * (1.0 + std::abs(lo)); ++it) {
        const double m = 0.5 * (lo + hi);
        if (f(m) > 0.0) {
            lo = m;
        } else {
            hi = m;
        }
    }
    return 0.5 * (lo + hi);
}

inline Matrix central_difference(const std::function<double(const Vector&)>& f, const Vector& x,
                                 double rel = 1e-6) {
    Matrix out(1, x.size());
    Vector xp = x;
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        const double h = rel * (1.0 + std::abs(x(j)));
        xp(j) = x(j) + h;
        const double up = f(xp);
        xp(j) = x(j) - h;
        const double down = f(xp);
        xp(j) = x(j);
        out(0, j) = (up - down) / (2.0 * h);
    }
    return out;
}

}  // namespace testing_support
