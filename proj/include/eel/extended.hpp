#pragma once

#include "eel/estimator.hpp"

#include <cmath>
#include <optional>
#include <string>
#include <utility>

namespace eel {

enum class ExpansionOrder { first, second };

/// Expansion factor of the composite similarity mapping.
///   first order:  gamma(n, l)  = 1 + l / (2n)
///   second order: gamma2(n, l) = 1 + (b / (2n)) l^delta,  delta = n^(-1/2),
///                 with gamma2(n, 0) = 1.
struct ExpansionFactor {
    ExpansionOrder order = ExpansionOrder::first;
    double n = 1.0;
    std::optional<double> bartlett_b;
    double delta_n = 0.0;

    static ExpansionFactor first_order(Eigen::Index n) {
        ExpansionFactor f;
        f.order = ExpansionOrder::first;
        f.n = static_cast<double>(n);
        return f;
    }

    static ExpansionFactor second_order(Eigen::Index n, double b) {
        ExpansionFactor f;
        f.order = ExpansionOrder::second;
        f.n = static_cast<double>(n);
        f.bartlett_b = b;
        f.delta_n = 1.0 / std::sqrt(f.n);
        return f;
    }

    double operator()(double l) const {
        if (order == ExpansionOrder::first) return 1.0 + l / (2.0 * n);
        if (l <= 0.0) return 1.0;
        return 1.0 + (*bartlett_b / (2.0 * n)) * std::pow(l, delta_n);
    }
};

/// h(theta) = center + gamma(n, l(theta)) (theta - center). `oel_fn` maps a
/// parameter to its ExtendedReal log-likelihood ratio.
template <class OelFn>
Vector forward_map(const Vector& center, const ExpansionFactor& factor, OelFn&& oel_fn,
                   const Vector& theta) {
    const ExtendedReal l = oel_fn(theta);
    if (l.is_infinite()) throw DomainViolation(DomainStatus{});
    return center + factor(l.value()) * (theta - center);
}

struct InverseMapOptions {
    int grid_points = 64;
    double t_tol = 1e-12;
    /// l values above this are treated like out-of-domain points (phi > 0).
    double loglik_ceiling = 1e6;
    int max_rescans = 16;
};

struct InverseResult {
    Vector preimage;
    /// ||h(preimage) - theta||
    double residual = 0.0;
    /// Position of the preimage on the segment [center, theta].
    double t = 0.0;
    /// l at the preimage.
    double loglik = 0.0;
    /// Number of scan passes that produced a root.
    int roots_found = 0;
};

namespace detail {

struct RayProbe {
    double t = 0.0;
    double phi = -1.0;
    double loglik = 0.0;
    bool capped = false;

    bool positive() const { return capped || phi > 0.0; }
};

}  // namespace detail

/// Generalized inverse of the composite similarity mapping. Searches the segment
/// theta'(t) = center + t (theta - center), t in [0, 1], for roots of
/// phi(t) = gamma(n, l(theta'(t))) t - 1 and returns the root closest to theta:
/// after each root the remaining interval is rescanned until no new root appears.
template <class OelFn>
InverseResult inverse_map(const Vector& center, const ExpansionFactor& factor, OelFn&& oel_fn,
                          const Vector& theta, const InverseMapOptions& opts = {}) {
    using detail::RayProbe;
    const Vector direction = theta - center;
    const double dist = direction.norm();
    InverseResult out;
    if (dist == 0.0) {
        out.preimage = center;
        const ExtendedReal l = oel_fn(center);
        out.loglik = l.is_finite() ? l.value() : 0.0;
        return out;
    }

    auto probe = [&](double t) {
        RayProbe pr;
        pr.t = t;
        ExtendedReal l;
        try {
            l = oel_fn(Vector(center + t * direction));
        } catch (const NonConvergence&) {
            pr.capped = true;
            return pr;
        }
        if (l.is_infinite() || l.value() > opts.loglik_ceiling) {
            pr.capped = true;
            return pr;
        }
        pr.loglik = l.value();
        pr.phi = factor(pr.loglik) * t - 1.0;
        return pr;
    };

    auto bisect = [&](RayProbe a, RayProbe b) {
        // a and b lie on opposite sides of zero (by positive()).
        while (b.t - a.t > opts.t_tol) {
            const double mid = 0.5 * (a.t + b.t);
            if (mid <= a.t || mid >= b.t) break;
            RayProbe m = probe(mid);
            if (m.positive() == a.positive()) {
                a = m;
            } else {
                b = m;
            }
        }
        return std::make_pair(a, b);
    };

    RayProbe lo;  // phi(0) = -1 at the centre
    std::optional<RayProbe> root;
    std::optional<RayProbe> resume;  // positive-side end of the last bracket
    const int grid = std::max(opts.grid_points, 2);

    for (int pass = 0; pass <= opts.max_rescans; ++pass) {
        const double start = resume ? resume->t : 0.0;
        if (start >= 1.0) break;
        std::vector<RayProbe> probes;
        probes.reserve(static_cast<std::size_t>(grid));
        probes.push_back(resume ? *resume : lo);
        for (int k = 1; k < grid; ++k) {
            const double t = k == grid - 1 ? 1.0 : start + (1.0 - start) * k / (grid - 1);
            probes.push_back(probe(t));
        }
        std::optional<RayProbe> found;
        std::optional<RayProbe> next_resume;
        for (std::size_t k = probes.size() - 1; k-- > 0;) {
            const RayProbe& a = probes[k];
            const RayProbe& b = probes[k + 1];
            if (!b.capped && b.phi == 0.0) {
                found = b;
                next_resume = k + 2 < probes.size() ? std::optional<RayProbe>(probes[k + 2]) : std::nullopt;
                break;
            }
            if (a.positive() != b.positive()) {
                auto [left, right] = bisect(a, b);
                const RayProbe& neg = left.positive() ? right : left;
                const RayProbe& pos = left.positive() ? left : right;
                if (!pos.capped && std::abs(pos.phi) < std::abs(neg.phi)) {
                    found = pos;
                } else {
                    found = neg;
                }
                next_resume = left.t < right.t ? right : left;
                if (!next_resume->positive()) next_resume = b;
                break;
            }
        }
        if (!found) break;
        // A root was found beyond the previous one (or the first root).
        root = found;
        ++out.roots_found;
        if (!next_resume) break;
        resume = next_resume;
    }

    if (!root) {
        throw SurjectivityFailure(
            "no root of the expansion equation on the segment from the estimate to theta");
    }
    out.t = root->t;
    out.preimage = center + root->t * direction;
    out.loglik = root->loglik;
    out.residual = std::abs(root->phi) * dist;
    return out;
}

// ---------------------------------------------------------------------------

/// Bartlett constant from standardized moments of the rows of g:
/// b = q^-1 [ (1/2) sum_{j,k} m_jjkk - (1/3) sum_{j,k,l} m_jkl^2 ],
/// z_i = S^(-1/2) (g_i - mean), S the covariance with divisor n.
inline double bartlett_constant(const Matrix& g) {
    const Eigen::Index n = g.rows();
    const Eigen::Index q = g.cols();
    const Matrix centered = g.rowwise() - g.colwise().mean();
    const Matrix cov = centered.transpose() * centered / static_cast<double>(n);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
    const Vector& ev = eig.eigenvalues();
    if (!(ev(q - 1) > 0.0) || ev(0) <= 1e-12 * ev(q - 1)) {
        throw RankDeficiency("covariance of the estimating function is singular");
    }
    const Matrix inv_sqrt =
        eig.eigenvectors() * ev.cwiseSqrt().cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
    const Matrix z = centered * inv_sqrt;

    const double fourth = z.rowwise().squaredNorm().array().square().mean();
    double third_sq = 0.0;
    for (Eigen::Index j = 0; j < q; ++j) {
        for (Eigen::Index k = 0; k < q; ++k) {
            const Vector zjk = z.col(j).cwiseProduct(z.col(k));
            for (Eigen::Index l = 0; l < q; ++l) {
                const double m = zjk.dot(z.col(l)) / static_cast<double>(n);
                third_sq += m * m;
            }
        }
    }
    return (0.5 * fourth - third_sq / 3.0) / static_cast<double>(q);
}

/// Bartlett constant of g(X_i, theta_ref); theta_ref must lie in the domain.
inline double bartlett_constant(const EstimatingModel& model, const Sample& sample,
                                const ObsRef& theta_ref) {
    check_dimensions(model, sample);
    check_theta(model, theta_ref);
    const Matrix g = g_matrix(model, sample, theta_ref);
    DomainStatus status = in_domain(g);
    if (!status.inside) throw DomainViolation(std::move(status));
    return bartlett_constant(g);
}

struct BelValue {
    ExtendedReal value;
    /// 1 - b/n was negative and has been clamped to 0.
    bool clamped = false;
};

inline BelValue bartlett_scale(const ExtendedReal& l, double b, Eigen::Index n) {
    BelValue out;
    double scale = 1.0 - b / static_cast<double>(n);
    if (scale < 0.0) {
        scale = 0.0;
        out.clamped = true;
    }
    out.value = l.is_infinite() ? ExtendedReal::infinity() : ExtendedReal(scale * l.value());
    return out;
}

/// l_B(theta) = (1 - b/n) l(theta).
inline BelValue bel_loglik(const EstimatingModel& model, const Sample& sample, const ObsRef& theta,
                           double b, const DualOptions& opts = {}) {
    return bartlett_scale(oel_loglik(model, sample, theta, opts), b, sample.n());
}

// ---------------------------------------------------------------------------

struct EelOptions {
    DualOptions dual;
    MeleOptions mele;
    InverseMapOptions inverse;
};

/// One parameter value with all likelihood-ratio statistics.
struct ElEvaluation {
    Vector theta;
    bool in_domain = false;
    ExtendedReal oel;
    double eel1 = 0.0;
    std::optional<double> eel2;
    std::optional<ExtendedReal> bel;
    bool bel_clamped = false;
    /// First-order preimage and its residual ||h(preimage) - theta||.
    Vector preimage;
    double preimage_residual = 0.0;
    /// Residual exceeds 1e-8 (1 + ||theta||): the preimage hit the numerical
    /// resolution of the domain boundary.
    bool saturated = false;
};

/// Estimated quantities of one sample (centre and Bartlett constant) bound
/// together so many parameter values can be evaluated cheaply.
class ExtendedLikelihood {
public:
    ExtendedLikelihood(EstimatingModel model, Sample sample, EelOptions opts = {})
        : model_(std::move(model)), sample_(std::move(sample)), opts_(std::move(opts)) {
        check_dimensions(model_, sample_);
        MeleOptions mo = opts_.mele;
        mo.dual = opts_.dual;
        mele_ = eel::mele(model_, sample_, mo);
        try {
            bartlett_ = bartlett_constant(g_matrix(model_, sample_, mele_.theta_tilde));
        } catch (const RankDeficiency& e) {
            bartlett_error_ = e.what();
        }
    }

    const EstimatingModel& model() const { return model_; }
    const Sample& sample() const { return sample_; }
    const MeleResult& mele() const { return mele_; }
    const Vector& center() const { return mele_.theta_tilde; }
    const EelOptions& options() const { return opts_; }

    /// Bartlett constant at the estimate, if the covariance there is nonsingular.
    const std::optional<double>& bartlett() const { return bartlett_; }

    double require_bartlett() const {
        if (!bartlett_) throw RankDeficiency("Bartlett constant unavailable: " + bartlett_error_);
        return *bartlett_;
    }

    ExtendedReal oel(const ObsRef& theta) const {
        check_theta(model_, theta);
        auto sol = try_solve_dual(g_matrix(model_, sample_, theta), opts_.dual);
        return sol ? ExtendedReal(sol->loglik_ratio) : ExtendedReal::infinity();
    }

    DomainStatus domain(const ObsRef& theta) const {
        check_theta(model_, theta);
        return in_domain(g_matrix(model_, sample_, theta));
    }

    ExpansionFactor factor(ExpansionOrder order) const {
        if (order == ExpansionOrder::first) return ExpansionFactor::first_order(sample_.n());
        if (!model_.just_determined()) {
            throw UnsupportedConfiguration(
                "second-order extended likelihood requires a just-determined model (q = p)");
        }
        return ExpansionFactor::second_order(sample_.n(), require_bartlett());
    }

    Vector forward(const Vector& theta, ExpansionOrder order = ExpansionOrder::first) const {
        const ExpansionFactor f = factor(order);
        const ExtendedReal l = oel(theta);
        if (l.is_infinite()) throw DomainViolation(domain(theta));
        return forward_map(center(), f, [&](const Vector&) { return l; }, theta);
    }

    InverseResult inverse(const Vector& theta, ExpansionOrder order = ExpansionOrder::first) const {
        check_theta(model_, theta);
        const ExpansionFactor f = factor(order);
        if (theta == center()) {
            InverseResult r;
            r.preimage = center();
            r.loglik = mele_.loglik_at_tilde;
            return r;
        }
        return inverse_map(center(), f, [this](const Vector& t) { return oel(t); }, theta,
                           opts_.inverse);
    }

    /// l*(theta) (first order) or l*_2(theta) (second order).
    double eel(const Vector& theta, ExpansionOrder order = ExpansionOrder::first) const {
        return inverse(theta, order).loglik;
    }

    BelValue bel(const ObsRef& theta) const {
        const ExtendedReal l = oel(theta);
        if (l.is_finite() && l.value() == 0.0) return BelValue{ExtendedReal(0.0), false};
        return bartlett_scale(l, require_bartlett(), sample_.n());
    }

    ElEvaluation evaluate(const Vector& theta) const {
        ElEvaluation ev;
        ev.theta = theta;
        ev.oel = oel(theta);
        ev.in_domain = ev.oel.is_finite();
        const InverseResult inv = inverse(theta, ExpansionOrder::first);
        ev.eel1 = inv.loglik;
        ev.preimage = inv.preimage;
        ev.preimage_residual = inv.residual;
        ev.saturated = inv.residual > 1e-8 * (1.0 + theta.norm());
        if (bartlett_) {
            const BelValue b = bartlett_scale(ev.oel, *bartlett_, sample_.n());
            ev.bel = b.value;
            ev.bel_clamped = b.clamped;
            if (model_.just_determined()) ev.eel2 = eel(theta, ExpansionOrder::second);
        }
        return ev;
    }

private:
    EstimatingModel model_;
    Sample sample_;
    EelOptions opts_;
    MeleResult mele_;
    std::optional<double> bartlett_;
    std::string bartlett_error_;
};

/// Extended log-likelihood ratio at theta for a fresh sample.
inline double eel_loglik(const EstimatingModel& model, const Sample& sample, const Vector& theta,
                         ExpansionOrder order = ExpansionOrder::first, const EelOptions& opts = {}) {
    if (order == ExpansionOrder::second && !model.just_determined()) {
        throw UnsupportedConfiguration(
            "second-order extended likelihood requires a just-determined model (q = p)");
    }
    return ExtendedLikelihood(model, sample, opts).eel(theta, order);
}

}  // namespace eel
