#pragma once

#include "eel/inference.hpp"
#include "eel/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace eel {

enum class StudyModel { model1, model2, custom };

inline const char* to_string(StudyModel m) {
    switch (m) {
        case StudyModel::model1: return "model1";
        case StudyModel::model2: return "model2";
        case StudyModel::custom: return "custom";
    }
    return "?";
}

/// Rows (y, 1, x1[, x2]) from y = x^T beta + noise_scale * e, e ~ N(0, 1),
/// x1 ~ U[0, 30], x2 ~ U[20, 50]. Covariates come from `design`, errors
/// from `noise`.
inline Sample simulate_regression(StudyModel which, Eigen::Index n, CounterRng& design,
                                  CounterRng& noise, double noise_scale = 1.0) {
    if (n < 3) throw InvalidArgument("simulated sample size must be >= 3");
    const bool two = which == StudyModel::model2;
    if (which == StudyModel::custom) throw InvalidArgument("custom studies supply their own sampler");
    const Eigen::Index d = two ? 4 : 3;
    Matrix cols(d, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double x1 = design.uniform(0.0, 30.0);
        cols(1, i) = 1.0;
        cols(2, i) = x1;
        double mean = 1.0 * 1.0 + 2.0 * x1;
        if (two) {
            const double x2 = design.uniform(20.0, 50.0);
            cols(3, i) = x2;
            mean = 1.0 * 1.0 + 2.0 * x1 + 3.0 * x2;
        }
        cols(0, i) = mean + noise_scale * standard_normal(noise);
    }
    return Sample::from_columns(std::move(cols));
}

/// Model 1: x = (1, x1), beta = (1, 2).
inline Sample simulate_model1(Eigen::Index n, CounterRng& rng, double noise_scale = 1.0) {
    return simulate_regression(StudyModel::model1, n, rng, rng, noise_scale);
}

/// Model 2: x = (1, x1, x2), beta = (1, 2, 3).
inline Sample simulate_model2(Eigen::Index n, CounterRng& rng, double noise_scale = 1.0) {
    return simulate_regression(StudyModel::model2, n, rng, rng, noise_scale);
}

inline Vector true_beta(StudyModel which) {
    if (which == StudyModel::model1) return Vector{{1.0, 2.0}};
    if (which == StudyModel::model2) return Vector{{1.0, 2.0, 3.0}};
    throw InvalidArgument("custom studies supply their own true parameter");
}

struct StudyConfig {
    StudyModel model = StudyModel::model1;
    Eigen::Index n = 20;
    std::vector<double> levels{0.90, 0.95, 0.99};
    std::vector<Method> methods{Method::oel, Method::eel1, Method::bel};
    int replicates = 1000;
    std::uint64_t seed = 1;
    std::uint64_t design_seed = 2;
    /// Draw the covariates once and reuse them in every replicate.
    bool fixed_design = false;
    int workers = 1;
    /// Multiplies the N(0,1) errors; 0 gives noiseless samples.
    double noise_scale = 1.0;
    EelOptions eel;

    /// Used when model == custom.
    std::optional<EstimatingModel> custom_model;
    std::function<Sample(CounterRng& design, CounterRng& noise)> custom_sampler;
    Vector custom_truth;
};

struct CoverageCell {
    Method method = Method::oel;
    double level = 0.0;
    long covered = 0;
    long valid = 0;
    long failures = 0;
    double coverage = 0.0;
    double std_error = 0.0;
};

struct CoverageReport {
    std::string model;
    Eigen::Index n = 0;
    int replicates = 0;
    std::vector<double> levels;
    std::vector<Method> methods;
    std::vector<CoverageCell> cells;  ///< method-major, then level

    const CoverageCell& cell(Method m, double level) const {
        for (const auto& c : cells) {
            if (c.method == m && std::abs(c.level - level) < 1e-12) return c;
        }
        throw InvalidArgument("no coverage cell for the requested method and level");
    }
};

namespace detail {

/// Statistic per method at the true parameter; nullopt marks a solver failure.
using ReplicateOutcome = std::vector<std::optional<ExtendedReal>>;

inline ReplicateOutcome run_replicate(const StudyConfig& cfg, const EstimatingModel& model,
                                      const Vector& truth, int r) {
    ReplicateOutcome out(cfg.methods.size());
    CounterRng design(cfg.design_seed, cfg.fixed_design ? 0 : static_cast<std::uint64_t>(r) + 1);
    CounterRng noise(cfg.seed, static_cast<std::uint64_t>(r));
    Sample sample;
    if (cfg.model == StudyModel::custom) {
        sample = cfg.custom_sampler(design, noise);
    } else {
        sample = simulate_regression(cfg.model, cfg.n, design, noise, cfg.noise_scale);
    }
    std::optional<ExtendedLikelihood> el;
    try {
        el.emplace(model, sample, cfg.eel);
    } catch (const Error&) {
        return out;
    }
    for (std::size_t k = 0; k < cfg.methods.size(); ++k) {
        try {
            out[k] = statistic(*el, cfg.methods[k], truth);
        } catch (const Error&) {
            out[k].reset();
        }
    }
    return out;
}

}  // namespace detail

/// Monte Carlo coverage of the confidence regions at the true parameter.
/// Replicate r draws its errors from stream (seed, r) and its covariates from
/// stream (design_seed, r + 1), or (design_seed, 0) for a fixed design, so the
/// report does not depend on the number of workers.
inline CoverageReport run_coverage(const StudyConfig& cfg) {
    if (cfg.replicates < 1) throw InvalidArgument("replicates must be >= 1");
    for (double lv : cfg.levels) {
        if (!(lv > 0.0 && lv < 1.0)) throw InvalidArgument("confidence levels must lie in (0, 1)");
    }
    EstimatingModel model;
    Vector truth;
    if (cfg.model == StudyModel::custom) {
        if (!cfg.custom_model || !cfg.custom_sampler) {
            throw InvalidArgument("custom study needs a model and a sampler");
        }
        model = *cfg.custom_model;
        truth = cfg.custom_truth;
        check_theta(model, truth);
    } else {
        model = builtin_linear_regression(cfg.model == StudyModel::model1 ? 2 : 3);
        truth = true_beta(cfg.model);
    }
    for (Method m : cfg.methods) {
        if (m == Method::eel2 && !model.just_determined()) {
            throw UnsupportedConfiguration(
                "second-order extended likelihood requires a just-determined model (q = p)");
        }
    }

    std::vector<detail::ReplicateOutcome> outcomes(static_cast<std::size_t>(cfg.replicates));
    const int workers = std::max(1, std::min(cfg.workers, cfg.replicates));
    auto work = [&](int w) {
        for (int r = w; r < cfg.replicates; r += workers) {
            outcomes[static_cast<std::size_t>(r)] = detail::run_replicate(cfg, model, truth, r);
        }
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
        for (auto& t : pool) t.join();
    }

    CoverageReport report;
    report.model = to_string(cfg.model);
    report.n = cfg.n;
    report.replicates = cfg.replicates;
    report.levels = cfg.levels;
    report.methods = cfg.methods;
    for (std::size_t k = 0; k < cfg.methods.size(); ++k) {
        for (double level : cfg.levels) {
            CoverageCell cell;
            cell.method = cfg.methods[k];
            cell.level = level;
            const double crit = chisq_quantile(level, model.q);
            for (const auto& o : outcomes) {
                if (!o[k]) {
                    ++cell.failures;
                    continue;
                }
                ++cell.valid;
                if (o[k]->at_most(crit)) ++cell.covered;
            }
            if (cell.valid > 0) {
                cell.coverage = static_cast<double>(cell.covered) / static_cast<double>(cell.valid);
                cell.std_error = std::sqrt(cell.coverage * (1.0 - cell.coverage) /
                                           static_cast<double>(cell.valid));
            }
            report.cells.push_back(cell);
        }
    }
    return report;
}

// ---------------------------------------------------------------------------

/// One line per (method, level) with full-precision numbers.
inline std::string format_report_csv(const CoverageReport& report) {
    std::ostringstream os;
    os << "model,n,method,level,covered,valid,failures,coverage,std_error\n";
    os << std::setprecision(17);
    for (const auto& c : report.cells) {
        os << report.model << ',' << report.n << ',' << to_string(c.method) << ',' << c.level << ','
           << c.covered << ',' << c.valid << ',' << c.failures << ',' << c.coverage << ','
           << c.std_error << '\n';
    }
    return os.str();
}

/// Percent table: one row per report (sample size), a column group per level
/// and a column per method, one decimal.
inline std::string format_coverage_table(const std::vector<CoverageReport>& reports) {
    if (reports.empty()) return {};
    const auto& first = reports.front();
    std::ostringstream os;
    os << std::fixed << std::setprecision(1);
    const int width = 7;
    os << std::setw(8) << "" << std::setw(6) << "";
    for (double level : first.levels) {
        std::ostringstream head;
        head << std::defaultfloat << level * 100.0 << "% level";
        const int span = width * static_cast<int>(first.methods.size());
        os << std::setw(span) << head.str();
    }
    os << '\n' << std::setw(8) << "model" << std::setw(6) << "n";
    for (std::size_t l = 0; l < first.levels.size(); ++l) {
        for (Method m : first.methods) {
            std::string name = to_string(m);
            std::transform(name.begin(), name.end(), name.begin(), ::toupper);
            os << std::setw(width) << name;
        }
    }
    os << '\n';
    for (const auto& rep : reports) {
        os << std::setw(8) << rep.model << std::setw(6) << rep.n;
        for (double level : rep.levels) {
            for (Method m : rep.methods) os << std::setw(width) << 100.0 * rep.cell(m, level).coverage;
        }
        os << '\n';
    }
    long failures = 0;
    for (const auto& rep : reports) {
        for (const auto& c : rep.cells) failures += c.failures;
    }
    if (failures > 0) os << "solver failures excluded: " << failures << '\n';
    return os.str();
}

}  // namespace eel
