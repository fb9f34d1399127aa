#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>

namespace eel {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// A log-likelihood ratio value that may be +infinity (parameter outside the
/// empirical-likelihood domain). Infinity is a distinguished state, never a
/// large float.
class ExtendedReal {
public:
    constexpr ExtendedReal() = default;
    constexpr explicit ExtendedReal(double v) : value_(v) {}

    static constexpr ExtendedReal infinity() {
        ExtendedReal r;
        r.infinite_ = true;
        return r;
    }

    constexpr bool is_infinite() const { return infinite_; }
    constexpr bool is_finite() const { return !infinite_; }

    /// Finite value; throws on infinity.
    double value() const {
        if (infinite_) throw std::logic_error("ExtendedReal::value() on infinity");
        return value_;
    }

    /// Value with infinity mapped to IEEE +inf (for arithmetic in tests).
    double as_double() const {
        return infinite_ ? std::numeric_limits<double>::infinity() : value_;
    }

    constexpr bool at_most(double c) const { return !infinite_ && value_ <= c; }

    friend bool operator==(const ExtendedReal& a, const ExtendedReal& b) {
        if (a.infinite_ || b.infinite_) return a.infinite_ == b.infinite_;
        return a.value_ == b.value_;
    }

private:
    double value_ = 0.0;
    bool infinite_ = false;
};

inline std::ostream& operator<<(std::ostream& os, const ExtendedReal& x) {
    if (x.is_infinite()) return os << "inf";
    return os << x.value();
}

// ---------------------------------------------------------------------------
// Errors. Every error carries a short machine-readable code used by the CLI.

class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what)
        : std::runtime_error(what), code_(std::move(code)) {}
    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

class InvalidArgument : public Error {
public:
    explicit InvalidArgument(const std::string& what) : Error("invalid_argument", what) {}
};

class DimensionMismatch : public Error {
public:
    explicit DimensionMismatch(const std::string& what) : Error("dimension_mismatch", what) {}
};

class UnsupportedConfiguration : public Error {
public:
    explicit UnsupportedConfiguration(const std::string& what)
        : Error("unsupported_configuration", what) {}
};

class RankDeficiency : public Error {
public:
    explicit RankDeficiency(const std::string& what) : Error("rank_deficiency", what) {}
};

class SurjectivityFailure : public Error {
public:
    explicit SurjectivityFailure(const std::string& what) : Error("surjectivity_failure", what) {}
};

class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("parse_error", "line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Iterative solver ran out of iterations; carries the last iterate.
class NonConvergence : public Error {
public:
    NonConvergence(const std::string& what, Vector last_iterate, double residual)
        : Error("non_convergence", what), last_(std::move(last_iterate)), residual_(residual) {}
    const Vector& last_iterate() const noexcept { return last_; }
    double residual() const noexcept { return residual_; }

private:
    Vector last_;
    double residual_;
};

}  // namespace eel
