#pragma once

#include "eel/chisq.hpp"
#include "eel/extended.hpp"

#include <array>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace eel {

enum class Method { oel, eel1, eel2, bel };

inline const char* to_string(Method m) {
    switch (m) {
        case Method::oel: return "oel";
        case Method::eel1: return "eel1";
        case Method::eel2: return "eel2";
        case Method::bel: return "bel";
    }
    return "?";
}

inline Method parse_method(const std::string& s) {
    if (s == "oel") return Method::oel;
    if (s == "eel1" || s == "eel") return Method::eel1;
    if (s == "eel2") return Method::eel2;
    if (s == "bel") return Method::bel;
    throw InvalidArgument("unknown method '" + s + "' (expected oel, eel1, eel2 or bel)");
}

struct RegionSpec {
    Method method = Method::oel;
    double level = 0.95;
    int df = 1;
    double critical_value = 0.0;
};

inline RegionSpec make_region_spec(Method method, double level, int df) {
    RegionSpec spec;
    spec.method = method;
    spec.level = level;
    spec.df = df;
    spec.critical_value = chisq_quantile(level, df);
    return spec;
}

/// The statistic a region of the given method thresholds. OEL and BEL are
/// +infinity outside the domain; EEL statistics are finite everywhere.
inline ExtendedReal statistic(const ExtendedLikelihood& el, Method method, const Vector& theta) {
    switch (method) {
        case Method::oel: return el.oel(theta);
        case Method::eel1: return ExtendedReal(el.eel(theta, ExpansionOrder::first));
        case Method::eel2: return ExtendedReal(el.eel(theta, ExpansionOrder::second));
        case Method::bel: return el.bel(theta).value;
    }
    return ExtendedReal::infinity();
}

inline bool region_contains(const ExtendedLikelihood& el, const RegionSpec& spec, const Vector& theta) {
    if (spec.df != el.model().q) {
        throw InvalidArgument("region degrees of freedom " + std::to_string(spec.df) +
                              " differ from q = " + std::to_string(el.model().q));
    }
    return statistic(el, spec.method, theta).at_most(spec.critical_value);
}

inline bool region_contains(const EstimatingModel& model, const Sample& sample,
                            const RegionSpec& spec, const Vector& theta,
                            const EelOptions& opts = {}) {
    if (spec.method == Method::eel2 && !model.just_determined()) {
        throw UnsupportedConfiguration(
            "second-order extended likelihood requires a just-determined model (q = p)");
    }
    return region_contains(ExtendedLikelihood(model, sample, opts), spec, theta);
}

// ---------------------------------------------------------------------------

struct GridSpec {
    std::array<int, 2> axes{0, 1};
    std::array<double, 2> lower{};
    std::array<double, 2> upper{};
    std::array<int, 2> resolution{2, 2};
};

struct GridTable {
    int p = 0;
    std::vector<Method> methods;
    std::vector<Vector> thetas;
    /// values[node][method]
    std::vector<std::vector<ExtendedReal>> values;
};

/// Evaluates the requested statistics on a rectangular grid over two parameter
/// coordinates; the other coordinates are taken from `fixed`.
inline GridTable contour_grid(const ExtendedLikelihood& el, const std::vector<Method>& methods,
                              const GridSpec& grid, const Vector& fixed) {
    const int p = el.model().p;
    check_theta(el.model(), fixed);
    for (int a : grid.axes) {
        if (a < 0 || a >= p) throw InvalidArgument("grid axis " + std::to_string(a) + " out of range");
    }
    if (p >= 2 && grid.axes[0] == grid.axes[1]) throw InvalidArgument("grid axes must differ");
    const int axis_count = p == 1 ? 1 : 2;
    for (int k = 0; k < axis_count; ++k) {
        if (grid.resolution[k] < 2) throw InvalidArgument("grid resolution must be >= 2 per axis");
    }
    GridTable table;
    table.p = p;
    table.methods = methods;
    const int rows = grid.resolution[0];
    const int cols = axis_count == 2 ? grid.resolution[1] : 1;
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            Vector theta = fixed;
            theta(grid.axes[0]) =
                grid.lower[0] + (grid.upper[0] - grid.lower[0]) * r / (grid.resolution[0] - 1);
            if (axis_count == 2) {
                theta(grid.axes[1]) =
                    grid.lower[1] + (grid.upper[1] - grid.lower[1]) * c / (grid.resolution[1] - 1);
            }
            std::vector<ExtendedReal> row;
            row.reserve(methods.size());
            for (Method m : methods) row.push_back(statistic(el, m, theta));
            table.thetas.push_back(std::move(theta));
            table.values.push_back(std::move(row));
        }
    }
    return table;
}

inline std::string format_number(double v, int precision) {
    std::ostringstream os;
    os << std::setprecision(precision) << v;
    return os.str();
}

inline std::string format_number(const ExtendedReal& v, int precision) {
    return v.is_infinite() ? std::string("inf") : format_number(v.value(), precision);
}

/// Comma-separated grid: header theta_0..theta_{p-1} then one column per method.
inline void write_grid(std::ostream& os, const GridTable& table, int precision = 17) {
    for (int i = 0; i < table.p; ++i) os << (i ? "," : "") << "theta_" << i;
    for (Method m : table.methods) os << ',' << to_string(m);
    os << '\n';
    for (std::size_t k = 0; k < table.thetas.size(); ++k) {
        for (int i = 0; i < table.p; ++i) {
            os << (i ? "," : "") << format_number(table.thetas[k](i), precision);
        }
        for (const ExtendedReal& v : table.values[k]) os << ',' << format_number(v, precision);
        os << '\n';
    }
}

}  // namespace eel
