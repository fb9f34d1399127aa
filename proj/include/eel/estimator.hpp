#pragma once

#include "eel/oel.hpp"

#include <optional>
#include <string>
#include <vector>

namespace eel {

enum class MeleMethod { root_solve, profile_minimize, least_squares };

inline const char* to_string(MeleMethod m) {
    switch (m) {
        case MeleMethod::root_solve: return "root-solve";
        case MeleMethod::profile_minimize: return "profile-minimize";
        case MeleMethod::least_squares: return "least-squares";
    }
    return "?";
}

struct MeleResult {
    Vector theta_tilde;
    double loglik_at_tilde = 0.0;
    MeleMethod method = MeleMethod::root_solve;
    bool converged = false;
    int iterations = 0;
};

struct MeleOptions {
    DualOptions dual;
    std::optional<Vector> init;
    double tol = 1e-8;
    int max_iter = 100;
    /// Also try perturbed starting points and keep the smallest l (over-determined only).
    bool multi_start = false;
};

namespace detail {

/// Newton on sum_i g_k(X_i, theta) = 0 for the first `rows` components of g.
inline Vector solve_estimating_equations(const EstimatingModel& model, const Sample& sample,
                                         Vector theta, int rows, double tol, int max_iter,
                                         int* iterations) {
    const double n = static_cast<double>(sample.n());
    auto total = [&](const Vector& t) {
        Vector s = Vector::Zero(rows);
        for (Eigen::Index i = 0; i < sample.n(); ++i) s += model.g(sample.observation(i), t).head(rows);
        return s;
    };
    Vector f = total(theta);
    for (int iter = 0; iter <= max_iter; ++iter) {
        if (iterations) *iterations = iter;
        if (f.cwiseAbs().maxCoeff() <= tol * n) return theta;
        if (iter == max_iter) break;
        Matrix jac = Matrix::Zero(rows, model.p);
        for (Eigen::Index i = 0; i < sample.n(); ++i) {
            jac += jacobian(model, sample.observation(i), theta).topRows(rows);
        }
        Eigen::ColPivHouseholderQR<Matrix> qr(jac);
        if (qr.rank() < model.p) throw RankDeficiency("estimating-equation Jacobian is singular");
        const Vector step = qr.solve(-f);
        double alpha = 1.0;
        const double norm0 = f.norm();
        for (int k = 0; k < 50; ++k, alpha *= 0.5) {
            Vector trial = theta + alpha * step;
            Vector ft = total(trial);
            if (ft.norm() < norm0 || k == 49) {
                theta = std::move(trial);
                f = std::move(ft);
                break;
            }
        }
    }
    throw NonConvergence("estimating-equation Newton did not converge", theta, f.cwiseAbs().maxCoeff());
}

struct ProfileOutcome {
    Vector theta;
    double loglik = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Newton minimization of l using the envelope gradient and a central-difference
/// Hessian of that gradient; steps that leave the domain are halved.
inline ProfileOutcome minimize_profile(const EstimatingModel& model, const Sample& sample,
                                       Vector theta, const MeleOptions& opts,
                                       const DualOptions& dual) {
    ProfileOutcome out;
    ExtendedReal l = oel_loglik(model, sample, theta, dual);
    if (l.is_infinite()) throw DomainViolation(in_domain(model, sample, theta));
    const int p = model.p;
    for (int iter = 0; iter <= opts.max_iter; ++iter) {
        out.iterations = iter;
        const Vector grad = oel_gradient(model, sample, theta, dual);
        const double gnorm = grad.cwiseAbs().maxCoeff();
        if (gnorm <= opts.tol * (1.0 + l.value())) {
            out.converged = true;
            break;
        }
        if (iter == opts.max_iter) break;

        Matrix hess(p, p);
        Vector tp = theta;
        bool hess_ok = true;
        for (int j = 0; j < p && hess_ok; ++j) {
            const double h = 1e-5 * (1.0 + std::abs(theta(j)));
            try {
                tp(j) = theta(j) + h;
                const Vector up = oel_gradient(model, sample, tp, dual);
                tp(j) = theta(j) - h;
                const Vector down = oel_gradient(model, sample, tp, dual);
                hess.col(j) = (up - down) / (2.0 * h);
            } catch (const DomainViolation&) {
                hess_ok = false;
            }
            tp(j) = theta(j);
        }
        Vector step;
        if (hess_ok) {
            hess = 0.5 * (hess + hess.transpose()).eval();
            Eigen::LDLT<Matrix> ldlt(hess);
            if (ldlt.info() == Eigen::Success && ldlt.isPositive() &&
                (ldlt.vectorD().array() > 0.0).all()) {
                step = ldlt.solve(-grad);
            }
        }
        if (step.size() == 0) step = -grad / std::max(1.0, grad.norm());

        double alpha = 1.0;
        bool moved = false;
        const double slope = grad.dot(step);
        for (int k = 0; k < 60; ++k, alpha *= 0.5) {
            Vector trial = theta + alpha * step;
            const ExtendedReal lt = oel_loglik(model, sample, trial, dual);
            if (lt.is_finite() && lt.value() <= l.value() + 1e-4 * alpha * slope) {
                theta = std::move(trial);
                l = lt;
                moved = true;
                break;
            }
        }
        if (!moved) {
            // No further decrease is representable; accept if the gradient is small.
            out.converged = gnorm <= 1e-6 * (1.0 + l.value());
            break;
        }
    }
    out.theta = std::move(theta);
    out.loglik = l.value();
    return out;
}

}  // namespace detail

/// Maximum empirical likelihood estimator. Just-determined models solve
/// sum g(X_i, theta) = 0; over-determined models minimize l(theta).
inline MeleResult mele(const EstimatingModel& model, const Sample& sample,
                       const MeleOptions& opts = {}) {
    check_dimensions(model, sample);
    Vector start = opts.init ? *opts.init : default_start(model, sample);
    check_theta(model, start);
    DualOptions dual = opts.dual;
    dual.tol = std::min(dual.tol, 1e-10);

    MeleResult res;
    if (model.just_determined()) {
        res.theta_tilde = detail::solve_estimating_equations(model, sample, start, model.q, opts.tol,
                                                             opts.max_iter, &res.iterations);
        res.method = model.start == StartKind::least_squares ? MeleMethod::least_squares
                                                             : MeleMethod::root_solve;
        res.converged = true;
        // Uniform weights solve the moment constraint at the root, so R = 1;
        // a rounding-level g set that fails the interior test keeps l = 0.
        const ExtendedReal l = oel_loglik(model, sample, res.theta_tilde, dual);
        res.loglik_at_tilde = l.is_finite() ? l.value() : 0.0;
        return res;
    }

    res.method = MeleMethod::profile_minimize;
    if (oel_loglik(model, sample, start, dual).is_infinite()) {
        start = detail::solve_estimating_equations(model, sample, start, model.p, opts.tol,
                                                   opts.max_iter, nullptr);
    }
    std::vector<Vector> starts{start};
    if (opts.multi_start) {
        for (int j = 0; j < model.p; ++j) {
            for (double s : {-0.5, 0.5}) {
                Vector alt = start;
                alt(j) += s * (1.0 + std::abs(start(j))) * 0.2;
                starts.push_back(alt);
            }
        }
    }
    std::optional<detail::ProfileOutcome> best;
    for (std::size_t k = 0; k < starts.size(); ++k) {
        if (k > 0 && oel_loglik(model, sample, starts[k], dual).is_infinite()) continue;
        detail::ProfileOutcome o = detail::minimize_profile(model, sample, starts[k], opts, dual);
        if (!best || (o.converged && (!best->converged || o.loglik < best->loglik))) best = std::move(o);
    }
    if (!best->converged) {
        throw NonConvergence("profile minimization of l did not converge", best->theta, best->loglik);
    }
    res.theta_tilde = best->theta;
    res.loglik_at_tilde = best->loglik;
    res.iterations = best->iterations;
    res.converged = true;
    return res;
}

}  // namespace eel
