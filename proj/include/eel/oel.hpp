#pragma once

#include "eel/detail/simplex.hpp"
#include "eel/model.hpp"

#include <cmath>
#include <optional>
#include <vector>

namespace eel {

/// Membership of theta in the empirical-likelihood domain: 0 must be an
/// interior point of the convex hull of {g(X_i, theta)}.
struct DomainStatus {
    bool inside = false;
    /// Strictly positive weights with sum(w_i g_i) = 0, sum(w_i) = 1 (inside only).
    Vector weights;
    /// Unit vector v with v^T g_i >= 0 for all i (outside only).
    Vector direction;
};

class DomainViolation : public Error {
public:
    explicit DomainViolation(DomainStatus status)
        : Error("domain_violation", "theta lies outside the empirical-likelihood domain"),
          status_(std::move(status)) {}
    const DomainStatus& status() const noexcept { return status_; }

private:
    DomainStatus status_;
};

/// Hull membership for the rows of an n x q matrix. Rank-deficient row sets
/// are reported outside with a direction orthogonal to their span; points on
/// the hull boundary are reported outside. The all-zero set satisfies every
/// moment constraint and is reported inside with uniform weights.
inline DomainStatus in_domain(const Matrix& g) {
    const Eigen::Index n = g.rows();
    const Eigen::Index q = g.cols();
    DomainStatus status;

    const double scale = g.cwiseAbs().maxCoeff();
    if (scale == 0.0) {
        status.inside = true;
        status.weights = Vector::Constant(n, 1.0 / static_cast<double>(n));
        return status;
    }
    const Matrix gs = g / scale;

    Eigen::SelfAdjointEigenSolver<Matrix> eig(gs.transpose() * gs);
    const Vector& ev = eig.eigenvalues();
    if (ev(0) <= 1e-20 * ev(q - 1)) {
        status.direction = eig.eigenvectors().col(0).normalized();
        return status;
    }

    // maximize t s.t. sum((t + s_i) g_i) = 0, sum(t + s_i) = 1, t, s >= 0.
    Matrix a(q + 1, n + 1);
    a.block(0, 0, q, 1) = gs.colwise().sum().transpose();
    a.block(0, 1, q, n) = gs.transpose();
    a(q, 0) = static_cast<double>(n);
    a.block(q, 1, 1, n).setOnes();
    Vector b = Vector::Zero(q + 1);
    b(q) = 1.0;
    Vector c = Vector::Zero(n + 1);
    c(0) = 1.0;
    const detail::LpResult lp = detail::simplex_solve(a, b, c);

    if (lp.status == detail::LpStatus::optimal && lp.x(0) > 1e-12) {
        status.inside = true;
        status.weights = Vector::Constant(n, lp.x(0)) + lp.x.tail(n);
        status.weights /= status.weights.sum();
        return status;
    }
    if (lp.status == detail::LpStatus::optimal || lp.status == detail::LpStatus::infeasible) {
        Vector v = lp.y.head(q);
        if (v.norm() > 0.0) {
            status.direction = v.normalized();
            return status;
        }
    }
    // The simplex should never end here on these bounded programs; fall back to
    // the direction of the mean, which at least orients the certificate.
    status.direction = gs.colwise().sum().transpose().normalized();
    return status;
}

inline DomainStatus in_domain(const EstimatingModel& model, const Sample& sample,
                              const ObsRef& theta) {
    check_dimensions(model, sample);
    check_theta(model, theta);
    return in_domain(g_matrix(model, sample, theta));
}

// ---------------------------------------------------------------------------

struct DualOptions {
    double tol = 1e-8;
    int max_iter = 100;
    /// Record f(lambda) = -sum log(1 + lambda^T g_i) after each accepted step.
    bool record_trace = false;
};

struct DualSolution {
    Vector lambda;
    double loglik_ratio = 0.0;
    Vector weights;
    int iterations = 0;
    bool converged = false;
    /// Infinity norm of sum(g_i / (1 + lambda^T g_i)).
    double max_residual = 0.0;
    std::vector<double> objective_trace;
};

namespace detail {

/// Damped Newton on the convex dual for a point known to be inside the domain.
inline DualSolution newton_dual(const Matrix& g, const DualOptions& opts) {
    const Eigen::Index n = g.rows();
    const Eigen::Index q = g.cols();
    const double floor = 1.0 / static_cast<double>(n);

    DualSolution sol;
    sol.lambda = Vector::Zero(q);
    Vector u = Vector::Ones(n);
    double f = 0.0;
    if (opts.record_trace) sol.objective_trace.push_back(f);

    Vector grad(q);
    Matrix hess(q, q);
    for (int iter = 0;; ++iter) {
        const Vector inv = u.cwiseInverse();
        grad.noalias() = -(g.transpose() * inv);
        sol.max_residual = grad.cwiseAbs().maxCoeff();
        sol.iterations = iter;
        if (sol.max_residual <= opts.tol) {
            sol.converged = true;
            // One extra full step: the residual bound alone leaves lambda off by
            // tol / curvature, which is large when the curvature is small. Skipped
            // once the residual is at the rounding level of the sum.
            const double noise = 1e-14 * (g.cwiseAbs().transpose() * inv).maxCoeff();
            if (sol.max_residual <= noise) break;
            const Matrix scaled = inv.asDiagonal() * g;
            const Vector step = (scaled.transpose() * scaled).ldlt().solve(-grad);
            const Vector trial = sol.lambda + step;
            const Vector tu = Vector::Ones(n) + g * trial;
            if (step.allFinite() && tu.minCoeff() >= floor) {
                const double tr = (g.transpose() * tu.cwiseInverse()).cwiseAbs().maxCoeff();
                if (tr < sol.max_residual) {
                    sol.lambda = trial;
                    u = tu;
                    sol.max_residual = tr;
                    if (opts.record_trace) {
                        const double tf = -tu.array().log().sum();
                        if (tf <= f) sol.objective_trace.push_back(tf);
                    }
                }
            }
            break;
        }
        if (iter >= opts.max_iter) break;

        const Matrix scaled = inv.asDiagonal() * g;
        hess.noalias() = scaled.transpose() * scaled;
        const Vector step = hess.ldlt().solve(-grad);
        const double slope = grad.dot(step);
        if (!step.allFinite() || slope >= 0.0) break;

        double alpha = 1.0;
        bool accepted = false;
        for (int halving = 0; halving < 60; ++halving, alpha *= 0.5) {
            const Vector trial = sol.lambda + alpha * step;
            const Vector tu = Vector::Ones(n) + g * trial;
            if (tu.minCoeff() < floor) continue;
            const double tf = -tu.array().log().sum();
            // Close to the optimum f is flat to rounding; fall back to the residual.
            const bool flat = std::abs(tf - f) <= 1e-12 * (1.0 + std::abs(f)) &&
                              (g.transpose() * tu.cwiseInverse()).cwiseAbs().maxCoeff() <
                                  sol.max_residual;
            if (tf <= f + 1e-4 * alpha * slope || flat) {
                sol.lambda = trial;
                u = tu;
                f = tf;
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
        if (opts.record_trace) sol.objective_trace.push_back(f);
    }
    sol.loglik_ratio = 2.0 * u.array().log().sum();
    sol.weights = (static_cast<double>(n) * u).cwiseInverse();
    return sol;
}

}  // namespace detail

/// Lagrange multiplier and log-likelihood ratio l = 2 sum log(1 + lambda^T g_i)
/// for the rows g_i of an n x q matrix; std::nullopt when 0 is outside the hull.
/// Throws NonConvergence if Newton fails inside the domain.
inline std::optional<DualSolution> try_solve_dual(const Matrix& g, const DualOptions& opts = {}) {
    if (!in_domain(g).inside) return std::nullopt;
    DualSolution sol = detail::newton_dual(g, opts);
    if (!sol.converged) {
        throw NonConvergence("dual Newton iteration did not converge (residual " +
                                 std::to_string(sol.max_residual) + ")",
                             sol.lambda, sol.max_residual);
    }
    return sol;
}

inline DualSolution solve_dual(const Matrix& g, const DualOptions& opts = {}) {
    DomainStatus status = in_domain(g);
    if (!status.inside) throw DomainViolation(std::move(status));
    DualSolution sol = detail::newton_dual(g, opts);
    if (!sol.converged) {
        throw NonConvergence("dual Newton iteration did not converge (residual " +
                                 std::to_string(sol.max_residual) + ")",
                             sol.lambda, sol.max_residual);
    }
    return sol;
}

inline DualSolution solve_dual(const EstimatingModel& model, const Sample& sample,
                               const ObsRef& theta, const DualOptions& opts = {}) {
    check_dimensions(model, sample);
    check_theta(model, theta);
    return solve_dual(g_matrix(model, sample, theta), opts);
}

/// l(theta), or +infinity outside the domain.
inline ExtendedReal oel_loglik(const EstimatingModel& model, const Sample& sample,
                               const ObsRef& theta, const DualOptions& opts = {}) {
    check_dimensions(model, sample);
    check_theta(model, theta);
    auto sol = try_solve_dual(g_matrix(model, sample, theta), opts);
    if (!sol) return ExtendedReal::infinity();
    return ExtendedReal(sol->loglik_ratio);
}

/// Gradient of l at theta: 2 sum_i G_i^T lambda / (1 + lambda^T g_i), with
/// G_i = dg(X_i, theta)/dtheta. Models without an analytic Jacobian use
/// central differences of l.
inline Vector oel_gradient(const EstimatingModel& model, const Sample& sample,
                           const ObsRef& theta, const DualOptions& opts = {}) {
    check_dimensions(model, sample);
    check_theta(model, theta);
    const Matrix g = g_matrix(model, sample, theta);
    const DualSolution sol = solve_dual(g, opts);

    if (!model.has_jacobian()) {
        Vector grad(model.p);
        Vector tp = theta;
        for (int j = 0; j < model.p; ++j) {
            const double h = 1e-6 * (1.0 + std::abs(theta(j)));
            tp(j) = theta(j) + h;
            const ExtendedReal up = oel_loglik(model, sample, tp, opts);
            tp(j) = theta(j) - h;
            const ExtendedReal down = oel_loglik(model, sample, tp, opts);
            tp(j) = theta(j);
            if (up.is_infinite() || down.is_infinite()) {
                throw DomainViolation(in_domain(model, sample, theta));
            }
            grad(j) = (up.value() - down.value()) / (2.0 * h);
        }
        return grad;
    }

    Vector grad = Vector::Zero(model.p);
    for (Eigen::Index i = 0; i < sample.n(); ++i) {
        const double u = 1.0 + sol.lambda.dot(g.row(i));
        grad.noalias() += model.dg_dtheta(sample.observation(i), theta).transpose() * sol.lambda / u;
    }
    return 2.0 * grad;
}

}  // namespace eel
