#pragma once

#include "eel/types.hpp"

#include <vector>

namespace eel::detail {

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

struct LpResult {
    LpStatus status = LpStatus::iteration_limit;
    Vector x;       ///< primal solution (optimal only)
    Vector y;       ///< dual multipliers of the equality rows
    double value = 0.0;
};

/// Dense two-phase primal simplex with Bland's rule for
///   maximize c^T x  subject to  A x = b, x >= 0.
/// Meant for the tiny hull-membership programs (a handful of rows).
/// On infeasibility, y is a Farkas certificate: A^T y >= 0 and b^T y < 0.
/// On optimality, y is dual optimal: A^T y >= c and b^T y = c^T x.
inline LpResult simplex_solve(const Matrix& a, const Vector& b, const Vector& c,
                              double tol = 1e-11, int max_pivots = 10000) {
    const Eigen::Index m = a.rows();
    const Eigen::Index nvar = a.cols();
    const Eigen::Index rhs = nvar + m;

    Matrix t = Matrix::Zero(m, nvar + m + 1);
    Vector sign = Vector::Ones(m);
    for (Eigen::Index r = 0; r < m; ++r) {
        if (b(r) < 0) sign(r) = -1.0;
        t.row(r).head(nvar) = sign(r) * a.row(r);
        t(r, nvar + r) = 1.0;
        t(r, rhs) = sign(r) * b(r);
    }
    std::vector<Eigen::Index> basis(static_cast<std::size_t>(m));
    for (Eigen::Index r = 0; r < m; ++r) basis[static_cast<std::size_t>(r)] = nvar + r;

    auto pivot = [&](Eigen::Index row, Eigen::Index col) {
        t.row(row) /= t(row, col);
        for (Eigen::Index r = 0; r < m; ++r) {
            if (r != row && t(r, col) != 0.0) t.row(r) -= t(r, col) * t.row(row);
        }
        basis[static_cast<std::size_t>(row)] = col;
    };

    auto duals = [&](const Vector& cost) {
        Vector cb(m);
        for (Eigen::Index r = 0; r < m; ++r) cb(r) = cost(basis[static_cast<std::size_t>(r)]);
        Vector y = (cb.transpose() * t.middleCols(nvar, m)).transpose();
        return Vector(y.cwiseProduct(sign));
    };

    // Columns with index >= allowed never enter the basis.
    int pivots = 0;
    auto optimize = [&](const Vector& cost, Eigen::Index allowed) -> LpStatus {
        while (pivots < max_pivots) {
            Vector cb(m);
            for (Eigen::Index r = 0; r < m; ++r) cb(r) = cost(basis[static_cast<std::size_t>(r)]);
            Eigen::Index enter = -1;
            for (Eigen::Index j = 0; j < allowed; ++j) {
                const double reduced = cost(j) - cb.dot(t.col(j));
                if (reduced > tol) {
                    enter = j;
                    break;
                }
            }
            if (enter < 0) return LpStatus::optimal;
            Eigen::Index leave = -1;
            double best = 0.0;
            for (Eigen::Index r = 0; r < m; ++r) {
                if (t(r, enter) > tol) {
                    const double ratio = t(r, rhs) / t(r, enter);
                    if (leave < 0 || ratio < best - tol ||
                        (ratio <= best + tol &&
                         basis[static_cast<std::size_t>(r)] < basis[static_cast<std::size_t>(leave)])) {
                        leave = r;
                        best = ratio;
                    }
                }
            }
            if (leave < 0) return LpStatus::unbounded;
            pivot(leave, enter);
            ++pivots;
        }
        return LpStatus::iteration_limit;
    };

    LpResult result;

    // Phase I: maximize -sum(artificials).
    Vector phase1 = Vector::Zero(nvar + m);
    phase1.tail(m).setConstant(-1.0);
    LpStatus st = optimize(phase1, nvar + m);
    if (st != LpStatus::optimal) {
        result.status = st;
        return result;
    }
    double infeas = 0.0;
    for (Eigen::Index r = 0; r < m; ++r) {
        if (basis[static_cast<std::size_t>(r)] >= nvar) infeas += t(r, rhs);
    }
    if (infeas > 1e3 * tol) {
        result.status = LpStatus::infeasible;
        result.y = duals(phase1);
        result.value = -infeas;
        return result;
    }

    // Drive zero-level artificials out of the basis where possible.
    for (Eigen::Index r = 0; r < m; ++r) {
        if (basis[static_cast<std::size_t>(r)] < nvar) continue;
        Eigen::Index col = -1;
        t.row(r).head(nvar).cwiseAbs().maxCoeff(&col);
        if (std::abs(t(r, col)) > tol) pivot(r, col);
    }

    Vector phase2 = Vector::Zero(nvar + m);
    phase2.head(nvar) = c;
    st = optimize(phase2, nvar);
    result.status = st;
    if (st != LpStatus::optimal) return result;
    result.x = Vector::Zero(nvar);
    for (Eigen::Index r = 0; r < m; ++r) {
        const Eigen::Index j = basis[static_cast<std::size_t>(r)];
        if (j < nvar) result.x(j) = t(r, rhs);
    }
    result.value = c.dot(result.x);
    result.y = duals(phase2);
    return result;
}

}  // namespace eel::detail
