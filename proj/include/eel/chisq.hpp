#pragma once

#include "eel/types.hpp"

#include <cmath>
#include <limits>

namespace eel {

namespace detail {

// Series for P(a, x); converges quickly for x < a + 1.
inline double gamma_p_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    for (int k = 1; k < 10000; ++k) {
        term *= x / (a + k);
        sum += term;
        if (std::abs(term) < std::abs(sum) * 1e-17) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Lentz continued fraction for Q(a, x); used for x >= a + 1.
inline double gamma_q_continued_fraction(double a, double x) {
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 10000; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace detail

/// Regularized lower incomplete gamma P(a, x).
inline double regularized_gamma_p(double a, double x) {
    if (!(a > 0.0)) throw InvalidArgument("regularized_gamma_p: a must be positive");
    if (x < 0.0) throw InvalidArgument("regularized_gamma_p: x must be non-negative");
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) return detail::gamma_p_series(a, x);
    return 1.0 - detail::gamma_q_continued_fraction(a, x);
}

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
inline double regularized_gamma_q(double a, double x) {
    if (!(a > 0.0)) throw InvalidArgument("regularized_gamma_q: a must be positive");
    if (x < 0.0) throw InvalidArgument("regularized_gamma_q: x must be non-negative");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - detail::gamma_p_series(a, x);
    return detail::gamma_q_continued_fraction(a, x);
}

inline double chisq_cdf(double x, int df) {
    if (df < 1) throw InvalidArgument("chi-square degrees of freedom must be >= 1");
    if (x <= 0.0) return 0.0;
    return regularized_gamma_p(0.5 * df, 0.5 * x);
}

/// Quantile of chi-square(df) at probability level, by bracketing and bisection.
inline double chisq_quantile(double level, int df) {
    if (!(level > 0.0 && level < 1.0)) {
        throw InvalidArgument("confidence level must lie in (0, 1)");
    }
    if (df < 1) throw InvalidArgument("chi-square degrees of freedom must be >= 1");
    double lo = 0.0;
    double hi = static_cast<double>(df);
    while (chisq_cdf(hi, df) < level) {
        lo = hi;
        hi *= 2.0;
    }
    for (int i = 0; i < 2000; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (chisq_cdf(mid, df) < level) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return std::abs(chisq_cdf(lo, df) - level) < std::abs(chisq_cdf(hi, df) - level) ? lo : hi;
}

}  // namespace eel
