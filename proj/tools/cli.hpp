#pragma once

#include "eel/eel.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace eel::cli {

enum ExitCode : int { kContained = 0, kOk = 0, kNotContained = 1, kError = 2 };

struct Common {
    std::string data;
    std::string model;
    double tol = 1e-8;
    int max_iter = 100;
    bool machine = false;
    std::string output;
};

class Printer {
public:
    Printer(std::ostream& os, bool machine) : os_(os), machine_(machine) {}

    int precision() const { return machine_ ? 17 : 6; }

    std::string num(double v) const { return format_number(v, precision()); }
    std::string num(const ExtendedReal& v) const { return format_number(v, precision()); }
    std::string vec(const Vector& v) const {
        std::string s;
        for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? "," : "") + num(v(i));
        return s;
    }

    void field(const std::string& key, const std::string& value) {
        if (machine_) {
            os_ << key << '=' << value << '\n';
        } else {
            os_ << std::left << std::setw(18) << key << value << '\n';
        }
    }

private:
    std::ostream& os_;
    bool machine_;
};

inline Vector to_vector(const std::vector<double>& v) {
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline std::vector<Method> parse_methods(const std::vector<std::string>& names) {
    std::vector<Method> out;
    for (const auto& s : names) out.push_back(parse_method(s));
    return out;
}

inline EelOptions make_options(const Common& c) {
    EelOptions opts;
    opts.dual.tol = c.tol;
    opts.dual.max_iter = c.max_iter;
    opts.mele.dual = opts.dual;
    return opts;
}

struct Loaded {
    EstimatingModel model;
    Sample sample;
};

inline Loaded load(const Common& c) {
    Sample sample = read_sample(c.data);
    EstimatingModel model = make_model(c.model, static_cast<int>(sample.dim()));
    check_dimensions(model, sample);
    return {std::move(model), std::move(sample)};
}

inline Vector theta_arg(const EstimatingModel& model, const std::vector<double>& theta,
                        const std::string& flag) {
    if (static_cast<int>(theta.size()) != model.p) {
        throw DimensionMismatch(flag + " has " + std::to_string(theta.size()) +
                                " values, model '" + model.name + "' needs p = " +
                                std::to_string(model.p));
    }
    return to_vector(theta);
}

// ---------------------------------------------------------------------------

inline int cmd_eval(const Common& c, const std::vector<double>& theta_in,
                    const std::vector<std::string>& method_names, std::ostream& out) {
    Loaded in = load(c);
    const Vector theta = theta_arg(in.model, theta_in, "--theta");
    const std::vector<Method> methods = parse_methods(method_names);
    ExtendedLikelihood el(in.model, in.sample, make_options(c));
    auto wants = [&](Method m) { return std::find(methods.begin(), methods.end(), m) != methods.end(); };

    Printer pr(out, c.machine);
    pr.field("model", in.model.name);
    pr.field("n", std::to_string(in.sample.n()));
    pr.field("theta", pr.vec(theta));
    pr.field("theta_tilde", pr.vec(el.center()));
    pr.field("bartlett_b", el.bartlett() ? pr.num(*el.bartlett()) : "unavailable");
    const ExtendedReal l = el.oel(theta);
    pr.field("in_domain", l.is_finite() ? "true" : "false");
    if (wants(Method::oel)) pr.field("oel", pr.num(l));
    if (wants(Method::eel1)) {
        const InverseResult inv = el.inverse(theta, ExpansionOrder::first);
        pr.field("eel1", pr.num(inv.loglik));
        pr.field("preimage", pr.vec(inv.preimage));
        pr.field("preimage_residual", pr.num(inv.residual));
    }
    if (wants(Method::eel2)) {
        if (in.model.just_determined() && el.bartlett()) {
            pr.field("eel2", pr.num(el.eel(theta, ExpansionOrder::second)));
        } else {
            pr.field("eel2", "unavailable");
        }
    }
    if (wants(Method::bel)) {
        if (el.bartlett()) {
            const BelValue b = bartlett_scale(l, *el.bartlett(), in.sample.n());
            pr.field("bel", pr.num(b.value));
            if (b.clamped) pr.field("bel_warning", "bartlett factor clamped at 0 (b >= n)");
        } else {
            pr.field("bel", "unavailable");
        }
    }
    return kOk;
}

inline int cmd_region(const Common& c, const std::vector<double>& theta_in,
                      const std::string& method_name, double level, std::ostream& out) {
    Loaded in = load(c);
    const Vector theta = theta_arg(in.model, theta_in, "--theta");
    const Method method = parse_method(method_name);
    const RegionSpec spec = make_region_spec(method, level, in.model.q);
    if (method == Method::eel2 && !in.model.just_determined()) {
        throw UnsupportedConfiguration(
            "second-order extended likelihood requires a just-determined model (q = p)");
    }
    ExtendedLikelihood el(in.model, in.sample, make_options(c));
    const ExtendedReal stat = statistic(el, method, theta);
    const bool inside = stat.at_most(spec.critical_value);

    Printer pr(out, c.machine);
    pr.field("method", to_string(method));
    pr.field("level", pr.num(level));
    pr.field("critical_value", pr.num(spec.critical_value));
    pr.field("statistic", pr.num(stat));
    pr.field("contained", inside ? "true" : "false");
    return inside ? kContained : kNotContained;
}

inline int cmd_contour(const Common& c, const std::vector<std::string>& method_names,
                       const std::vector<int>& axes, const std::vector<double>& lower,
                       const std::vector<double>& upper, const std::vector<int>& resolution,
                       const std::vector<double>& fixed_in, std::ostream& out) {
    Loaded in = load(c);
    const int p = in.model.p;
    const std::size_t naxes = p == 1 ? 1 : 2;
    if (axes.size() != naxes) throw DimensionMismatch("--axes needs " + std::to_string(naxes) + " indices");
    if (lower.size() != naxes) throw DimensionMismatch("--lower needs " + std::to_string(naxes) + " values");
    if (upper.size() != naxes) throw DimensionMismatch("--upper needs " + std::to_string(naxes) + " values");
    if (resolution.empty() || resolution.size() > naxes) {
        throw DimensionMismatch("--resolution needs 1 or " + std::to_string(naxes) + " values");
    }
    ExtendedLikelihood el(in.model, in.sample, make_options(c));
    GridSpec grid;
    for (std::size_t k = 0; k < naxes; ++k) {
        grid.axes[k] = axes[k];
        grid.lower[k] = lower[k];
        grid.upper[k] = upper[k];
        grid.resolution[k] = resolution[std::min(k, resolution.size() - 1)];
    }
    const Vector fixed = fixed_in.empty() ? el.center() : theta_arg(in.model, fixed_in, "--fixed");
    const GridTable table = contour_grid(el, parse_methods(method_names), grid, fixed);

    if (!c.output.empty()) {
        std::ofstream f(c.output);
        if (!f) throw Error("io_error", "cannot write '" + c.output + "'");
        write_grid(f, table, c.machine ? 17 : 10);
    } else {
        write_grid(out, table, c.machine ? 17 : 10);
    }
    return kOk;
}

struct CoverageArgs {
    std::string model = "model1";
    std::vector<int> sizes{20};
    std::vector<double> levels{0.90, 0.95, 0.99};
    std::vector<std::string> methods{"oel", "eel1", "bel"};
    int reps = 1000;
    std::uint64_t seed = 1;
    std::uint64_t design_seed = 2;
    bool fixed_design = false;
    int workers = 1;
};

inline int cmd_coverage(const Common& c, const CoverageArgs& a, std::ostream& out) {
    StudyModel which;
    if (a.model == "model1") {
        which = StudyModel::model1;
    } else if (a.model == "model2") {
        which = StudyModel::model2;
    } else {
        throw InvalidArgument("coverage --model must be model1 or model2");
    }
    std::vector<CoverageReport> reports;
    for (int n : a.sizes) {
        StudyConfig cfg;
        cfg.model = which;
        cfg.n = n;
        cfg.levels = a.levels;
        cfg.methods = parse_methods(a.methods);
        cfg.replicates = a.reps;
        cfg.seed = a.seed;
        cfg.design_seed = a.design_seed;
        cfg.fixed_design = a.fixed_design;
        cfg.workers = a.workers;
        cfg.eel = make_options(c);
        reports.push_back(run_coverage(cfg));
    }
    std::ostringstream text;
    if (c.machine) {
        for (std::size_t k = 0; k < reports.size(); ++k) {
            std::string csv = format_report_csv(reports[k]);
            if (k > 0) csv.erase(0, csv.find('\n') + 1);
            text << csv;
        }
    } else {
        text << format_coverage_table(reports);
        text << "replicates per row: " << a.reps << ", binomial SE <= "
             << std::fixed << std::setprecision(1) << 50.0 / std::sqrt(static_cast<double>(a.reps))
             << " pp\n";
    }
    if (!c.output.empty()) {
        std::ofstream f(c.output);
        if (!f) throw Error("io_error", "cannot write '" + c.output + "'");
        f << text.str();
    } else {
        out << text.str();
    }
    return kOk;
}

// ---------------------------------------------------------------------------

inline void add_common(CLI::App* sub, Common& c, bool needs_data) {
    if (needs_data) {
        sub->add_option("--data", c.data, "comma-separated data file")->required();
        sub->add_option("--model", c.model, "model name (mean, mean_variance, regression, model1, model2)")
            ->required();
    }
    sub->add_option("--tol", c.tol, "dual solver residual tolerance");
    sub->add_option("--max-iter", c.max_iter, "dual solver iteration limit");
    sub->add_flag("--machine", c.machine, "key=value / CSV output at full precision");
}

/// Runs the command line; returns the process exit status.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Empirical likelihood inference for estimating equations"};
    app.require_subcommand(1);

    Common eval_c, region_c, contour_c, coverage_c;
    std::vector<double> eval_theta, region_theta;
    std::vector<std::string> eval_methods{"oel", "eel1", "eel2", "bel"};
    std::string region_method = "oel";
    double region_level = 0.95;
    std::vector<std::string> contour_methods{"oel", "eel1"};
    std::vector<int> axes{0, 1}, resolution{50};
    std::vector<double> lower, upper, fixed;
    CoverageArgs cov;

    auto* eval = app.add_subcommand("eval", "evaluate all statistics at theta");
    add_common(eval, eval_c, true);
    eval->add_option("--theta", eval_theta, "parameter value")->required()->delimiter(',');
    eval->add_option("--methods", eval_methods, "subset of oel,eel1,eel2,bel")->delimiter(',');

    auto* region = app.add_subcommand("region", "confidence-region membership (exit 0 inside, 1 outside)");
    add_common(region, region_c, true);
    region->add_option("--theta", region_theta, "parameter value")->required()->delimiter(',');
    region->add_option("--method", region_method, "oel, eel1, eel2 or bel");
    region->add_option("--level", region_level, "confidence level");

    auto* contour = app.add_subcommand("contour", "statistics on a two-dimensional parameter grid");
    add_common(contour, contour_c, true);
    contour->add_option("--methods", contour_methods, "subset of oel,eel1,eel2,bel")->delimiter(',');
    contour->add_option("--axes", axes, "two parameter indices")->delimiter(',');
    contour->add_option("--lower", lower, "lower bounds per axis")->required()->delimiter(',');
    contour->add_option("--upper", upper, "upper bounds per axis")->required()->delimiter(',');
    contour->add_option("--resolution", resolution, "grid points per axis")->delimiter(',');
    contour->add_option("--fixed", fixed, "values of the remaining coordinates (default: estimate)")
        ->delimiter(',');
    contour->add_option("--output", contour_c.output, "write the grid here instead of stdout");

    auto* coverage = app.add_subcommand("coverage", "Monte Carlo coverage study");
    add_common(coverage, coverage_c, false);
    coverage->add_option("--model", cov.model, "model1 or model2");
    coverage->add_option("--n", cov.sizes, "sample sizes")->delimiter(',');
    coverage->add_option("--levels", cov.levels, "confidence levels")->delimiter(',');
    coverage->add_option("--methods", cov.methods, "subset of oel,eel1,eel2,bel")->delimiter(',');
    coverage->add_option("--reps", cov.reps, "replicates per sample size");
    coverage->add_option("--seed", cov.seed, "seed of the error streams");
    coverage->add_option("--design-seed", cov.design_seed, "seed of the covariate streams");
    coverage->add_flag("--fixed-design", cov.fixed_design, "draw covariates once for all replicates");
    coverage->add_option("--workers", cov.workers, "worker threads");
    coverage->add_option("--output", coverage_c.output, "write the report here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error code=usage message=\"" << e.what() << "\"\n";
        return kError;
    }

    try {
        if (*eval) return cmd_eval(eval_c, eval_theta, eval_methods, out);
        if (*region) return cmd_region(region_c, region_theta, region_method, region_level, out);
        if (*contour) return cmd_contour(contour_c, contour_methods, axes, lower, upper, resolution, fixed, out);
        if (*coverage) return cmd_coverage(coverage_c, cov, out);
    } catch (const Error& e) {
        err << "error code=" << e.code() << " message=\"" << e.what() << "\"\n";
        return kError;
    } catch (const std::exception& e) {
        err << "error code=internal message=\"" << e.what() << "\"\n";
        return kError;
    }
    return kError;
}

}  // namespace eel::cli
