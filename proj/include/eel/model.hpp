#pragma once

#include "eel/types.hpp"

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace eel {

/// n observations of dimension d, stored one observation per column.
/// Immutable; copies share the underlying storage.
class Sample {
public:
    Sample() : data_(std::make_shared<const Matrix>(0, 0)) {}

    /// Build from an n x d matrix (one observation per row).
    static Sample from_rows(const Matrix& rows) { return Sample(Matrix(rows.transpose())); }

    /// Build from a d x n matrix (one observation per column).
    static Sample from_columns(Matrix cols) { return Sample(std::move(cols)); }

    Eigen::Index n() const { return data_->cols(); }
    Eigen::Index dim() const { return data_->rows(); }

    auto observation(Eigen::Index i) const { return data_->col(i); }
    const Matrix& columns() const { return *data_; }

    /// Same observations in a permuted order.
    Sample permuted(const std::vector<Eigen::Index>& order) const {
        Matrix out(dim(), n());
        for (Eigen::Index i = 0; i < n(); ++i) out.col(i) = data_->col(order[static_cast<std::size_t>(i)]);
        return Sample(std::move(out));
    }

private:
    explicit Sample(Matrix cols) : data_(std::make_shared<const Matrix>(std::move(cols))) {}
    std::shared_ptr<const Matrix> data_;
};

using ObsRef = Eigen::Ref<const Vector>;

/// How the default starting point for the estimator is formed.
enum class StartKind { zero, sample_mean, least_squares };

/// An estimating function g(x, theta) in R^q for a parameter theta in R^p
/// of observations x in R^d, with optional analytic Jacobian dg/dtheta.
struct EstimatingModel {
    std::string name;
    int d = 0;
    int p = 0;
    int q = 0;
    std::function<Vector(const ObsRef& x, const ObsRef& theta)> g;
    std::function<Matrix(const ObsRef& x, const ObsRef& theta)> dg_dtheta;
    StartKind start = StartKind::zero;

    bool just_determined() const { return q == p; }
    bool over_determined() const { return q > p; }
    bool has_jacobian() const { return static_cast<bool>(dg_dtheta); }
};

/// Rows g(X_i, theta)^T stacked into an n x q matrix.
inline Matrix g_matrix(const EstimatingModel& model, const Sample& sample, const ObsRef& theta) {
    Matrix out(sample.n(), model.q);
    for (Eigen::Index i = 0; i < sample.n(); ++i) {
        out.row(i) = model.g(sample.observation(i), theta).transpose();
    }
    return out;
}

inline void check_dimensions(const EstimatingModel& model, const Sample& sample) {
    if (sample.dim() != model.d) {
        throw DimensionMismatch("model '" + model.name + "' expects observations of dimension " +
                                std::to_string(model.d) + ", sample has " +
                                std::to_string(sample.dim()));
    }
    if (sample.n() <= model.q) {
        throw InvalidArgument("sample size " + std::to_string(sample.n()) +
                              " must exceed the estimating-function dimension " +
                              std::to_string(model.q));
    }
}

inline void check_theta(const EstimatingModel& model, const ObsRef& theta) {
    if (theta.size() != model.p) {
        throw DimensionMismatch("theta has length " + std::to_string(theta.size()) + ", model '" +
                                model.name + "' has p = " + std::to_string(model.p));
    }
}

// ---------------------------------------------------------------------------
// Built-in families

/// g(x, theta) = x - theta.
inline EstimatingModel builtin_mean(int dim) {
    if (dim < 1) throw InvalidArgument("mean model dimension must be >= 1");
    EstimatingModel m;
    m.name = "mean";
    m.d = m.p = m.q = dim;
    m.g = [](const ObsRef& x, const ObsRef& theta) -> Vector { return x - theta; };
    m.dg_dtheta = [dim](const ObsRef&, const ObsRef&) -> Matrix {
        return -Matrix::Identity(dim, dim);
    };
    m.start = StartKind::sample_mean;
    return m;
}

/// Regression score for y = x^T beta + e. Observation layout is (y, x_1..x_k);
/// g((y, x), beta) = x (y - x^T beta).
inline EstimatingModel builtin_linear_regression(int covariate_dim) {
    if (covariate_dim < 1) throw InvalidArgument("covariate dimension must be >= 1");
    EstimatingModel m;
    m.name = "regression";
    m.d = covariate_dim + 1;
    m.p = m.q = covariate_dim;
    m.g = [k = covariate_dim](const ObsRef& obs, const ObsRef& beta) -> Vector {
        const auto x = obs.tail(k);
        return x * (obs(0) - x.dot(beta));
    };
    m.dg_dtheta = [k = covariate_dim](const ObsRef& obs, const ObsRef&) -> Matrix {
        const auto x = obs.tail(k);
        return -x * x.transpose();
    };
    m.start = StartKind::least_squares;
    return m;
}

/// Over-determined location model with known unit variance:
/// g(x, theta) = (x - theta, (x - theta)^2 - 1).
inline EstimatingModel builtin_mean_variance() {
    EstimatingModel m;
    m.name = "mean_variance";
    m.d = 1;
    m.p = 1;
    m.q = 2;
    m.g = [](const ObsRef& x, const ObsRef& theta) -> Vector {
        const double r = x(0) - theta(0);
        return Vector{{r, r * r - 1.0}};
    };
    m.dg_dtheta = [](const ObsRef& x, const ObsRef& theta) -> Matrix {
        const double r = x(0) - theta(0);
        return Matrix{{-1.0}, {-2.0 * r}};
    };
    m.start = StartKind::sample_mean;
    return m;
}

// ---------------------------------------------------------------------------
// Registry

/// Builds a model given the observation dimension of the data it will see.
using ModelFactory = std::function<EstimatingModel(int data_dim)>;

inline const std::map<std::string, ModelFactory>& model_registry() {
    static const std::map<std::string, ModelFactory> registry = {
        {"mean", [](int d) { return builtin_mean(d); }},
        {"mean_variance",
         [](int d) {
             if (d != 1) throw DimensionMismatch("mean_variance expects 1-dimensional data");
             return builtin_mean_variance();
         }},
        {"regression",
         [](int d) {
             if (d < 2) throw DimensionMismatch("regression expects rows (y, x_1, ..., x_k) with k >= 1");
             return builtin_linear_regression(d - 1);
         }},
        {"model1",
         [](int d) {
             if (d != 3) throw DimensionMismatch("model1 expects rows (y, 1, x1)");
             return builtin_linear_regression(2);
         }},
        {"model2",
         [](int d) {
             if (d != 4) throw DimensionMismatch("model2 expects rows (y, 1, x1, x2)");
             return builtin_linear_regression(3);
         }},
    };
    return registry;
}

inline EstimatingModel make_model(const std::string& name, int data_dim) {
    const auto& reg = model_registry();
    auto it = reg.find(name);
    if (it == reg.end()) throw InvalidArgument("unknown model '" + name + "'");
    return it->second(data_dim);
}

// ---------------------------------------------------------------------------

/// Least-squares fit of column 0 on the remaining columns.
inline Vector least_squares(const Sample& sample) {
    const Matrix& cols = sample.columns();
    const Eigen::Index k = cols.rows() - 1;
    Matrix design = cols.bottomRows(k).transpose();
    Vector y = cols.row(0).transpose();
    Eigen::ColPivHouseholderQR<Matrix> qr(design);
    if (qr.rank() < k) throw RankDeficiency("regression design matrix is rank deficient");
    return qr.solve(y);
}

inline Vector default_start(const EstimatingModel& model, const Sample& sample) {
    switch (model.start) {
        case StartKind::least_squares:
            return least_squares(sample);
        case StartKind::sample_mean:
            return sample.columns().topRows(model.p).rowwise().mean();
        case StartKind::zero:
            break;
    }
    return Vector::Zero(model.p);
}

/// Central-difference Jacobian of g with step h_j = 1e-6 (1 + |theta_j|).
inline Matrix finite_difference_jacobian(const EstimatingModel& model, const ObsRef& x,
                                         const ObsRef& theta) {
    Matrix jac(model.q, model.p);
    Vector tp = theta;
    for (int j = 0; j < model.p; ++j) {
        const double h = 1e-6 * (1.0 + std::abs(theta(j)));
        tp(j) = theta(j) + h;
        Vector up = model.g(x, tp);
        tp(j) = theta(j) - h;
        Vector down = model.g(x, tp);
        tp(j) = theta(j);
        jac.col(j) = (up - down) / (2.0 * h);
    }
    return jac;
}

/// Largest entrywise |analytic - numeric| / max(1, |numeric|).
inline double jacobian_error(const EstimatingModel& model, const ObsRef& x, const ObsRef& theta) {
    if (!model.has_jacobian()) throw InvalidArgument("model has no analytic Jacobian");
    Matrix analytic = model.dg_dtheta(x, theta);
    Matrix numeric = finite_difference_jacobian(model, x, theta);
    return ((analytic - numeric).array().abs() / numeric.array().abs().max(1.0)).maxCoeff();
}

/// Jacobian dg/dtheta, analytic if available.
inline Matrix jacobian(const EstimatingModel& model, const ObsRef& x, const ObsRef& theta) {
    return model.has_jacobian() ? model.dg_dtheta(x, theta)
                                : finite_difference_jacobian(model, x, theta);
}

}  // namespace eel
