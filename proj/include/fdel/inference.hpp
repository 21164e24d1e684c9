#pragma once

/** @file
 * Estimation and tests built on the profile EL ratio: MELE, parameter and
 * moment tests, constrained and profiled tests, confidence regions and the
 * goodness-of-fit tests.
 *
 * `level` is always a confidence level 1 - gamma (e.g. 0.95); a test rejects
 * when its p-value is below 1 - level.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fdel/distributions.hpp"
#include "fdel/elcore.hpp"
#include "fdel/error.hpp"
#include "fdel/estimating.hpp"
#include "fdel/models.hpp"
#include "fdel/optimize.hpp"
#include "fdel/spectral.hpp"

namespace fdel {

inline constexpr const char* kappa4_warning =
    "estimating system has a nonzero moment target (or an I_n^2 moment): chi-square calibration assumes "
    "Gaussian data (fourth-order innovation cumulant zero)";
inline constexpr const char* infeasible_warning = "zero is outside the convex hull of the constraint vectors";

/// Outer-search settings shared by every procedure that estimates theta.
struct SearchOptions {
    std::optional<Vector> lower;
    std::optional<Vector> upper;
    std::optional<Vector> start;
    /// Coarse grid points before the golden-section refinement (p = 1).
    int scan_points = 41;
    double golden_tolerance = 1e-10;
    NelderMeadOptions nelder_mead;
    ElConfig el;
};

struct MeleResult {
    Vector theta;
    double statistic = std::numeric_limits<double>::infinity();
    Vector multiplier;
    bool converged = false;
    int evaluations = 0;
    Variant variant = Variant::plain;
    std::vector<std::string> warnings;
};

struct TestReport {
    std::string test;
    double statistic = std::numeric_limits<double>::infinity();
    double df = 0.0;
    double p_value = 0.0;
    double level = 0.95;
    bool reject = true;
    bool feasible = true;
    Variant variant = Variant::plain;
    std::vector<std::string> warnings;
    std::optional<Vector> estimate;
    /// Named side quantities (e.g. A_n, B_n, T_n for the simple GOF test).
    std::map<std::string, double> extras;
};

namespace detail {

inline void check_level(double level) {
    if (!(level > 0.0 && level < 1.0)) throw InvalidInput("level must lie in (0, 1)");
}

inline void add_warning(std::vector<std::string>& w, const std::string& msg) {
    if (std::find(w.begin(), w.end(), msg) == w.end()) w.push_back(msg);
}

inline TestReport make_report(std::string name, double statistic, double df, double level, Variant variant,
                              const EstimatingSystem& system) {
    TestReport r;
    r.test = std::move(name);
    r.df = df;
    r.level = level;
    r.variant = variant;
    r.feasible = std::isfinite(statistic);
    // Tiny negative differences are rounding in a likelihood-ratio form.
    r.statistic = std::isfinite(statistic) ? std::max(statistic, 0.0) : std::numeric_limits<double>::infinity();
    r.p_value = chi_square_sf(df, r.statistic);
    r.reject = r.p_value < 1.0 - level;
    if (!r.feasible) add_warning(r.warnings, infeasible_warning);
    if (system.requires_gaussian()) add_warning(r.warnings, kappa4_warning);
    return r;
}

/// l(theta) with inadmissible, infeasible or unsolved points scored +inf.
class ProfileObjective {
public:
    ProfileObjective(const EstimatingSystem& system, const Periodogram& pg, Variant variant, ElConfig el)
        : system_(system), pg_(pg), variant_(variant), el_(el) {}

    double operator()(const Vector& theta) {
        ++evaluations_;
        if (!system_.is_admissible(theta)) return std::numeric_limits<double>::infinity();
        try {
            return log_el_ratio(system_, theta, pg_, variant_, el_).value;
        } catch (const DualSolveFailure&) {
            ++solver_failures_;
            return std::numeric_limits<double>::infinity();
        } catch (const NumericalFailure&) {
            ++solver_failures_;
            return std::numeric_limits<double>::infinity();
        }
    }

    [[nodiscard]] int evaluations() const noexcept { return evaluations_; }
    [[nodiscard]] int solver_failures() const noexcept { return solver_failures_; }

private:
    const EstimatingSystem& system_;
    const Periodogram& pg_;
    Variant variant_;
    ElConfig el_;
    int evaluations_ = 0;
    int solver_failures_ = 0;
};

inline SearchDomain resolve_domain(const EstimatingSystem& system, const Periodogram& pg, const SearchOptions& opt) {
    const auto p = static_cast<Eigen::Index>(system.p);
    SearchDomain d;
    if (system.domain) {
        d = system.domain(pg);
    } else {
        d.lower = Vector::Constant(p, -1.0);
        d.upper = Vector::Constant(p, 1.0);
        d.start = Vector::Zero(p);
    }
    if (opt.lower) d.lower = *opt.lower;
    if (opt.upper) d.upper = *opt.upper;
    if (opt.start) d.start = *opt.start;
    if (d.lower.size() != p || d.upper.size() != p || d.start.size() != p)
        throw InvalidInput("search bounds and start must have " + std::to_string(p) + " entries");
    for (Eigen::Index k = 0; k < p; ++k)
        if (!(d.lower[k] < d.upper[k])) throw InvalidInput("search bounds need lower < upper");
    if (opt.start && ((d.start - d.lower).minCoeff() < 0.0 || (d.upper - d.start).minCoeff() < 0.0))
        throw InvalidInput("start point lies outside the search bounds");
    d.start = d.start.cwiseMax(d.lower).cwiseMin(d.upper);
    return d;
}

/// Minimize f over the box; grid scan plus golden section for one
/// coordinate, Nelder-Mead with restarts otherwise.
inline MinimizeResult minimize_box(const std::function<double(const Vector&)>& f, const SearchDomain& d,
                                   const SearchOptions& opt) {
    const auto p = d.lower.size();
    MinimizeResult out;
    if (p == 0) {
        out.x = Vector(0);
        out.value = f(out.x);
        out.evaluations = 1;
        out.converged = true;
        return out;
    }
    if (p == 1) {
        const int m = std::max(opt.scan_points, 3);
        std::vector<double> xs(static_cast<std::size_t>(m)), fs(static_cast<std::size_t>(m));
        const double lo = d.lower[0], hi = d.upper[0];
        for (int i = 0; i < m; ++i) {
            xs[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (m - 1.0);
            fs[static_cast<std::size_t>(i)] = f(Vector::Constant(1, xs[static_cast<std::size_t>(i)]));
        }
        const double f_start = f(d.start);
        out.evaluations = m + 1;
        std::size_t best = 0;
        for (std::size_t i = 1; i < fs.size(); ++i) {
            const bool closer = std::abs(xs[i] - d.start[0]) < std::abs(xs[best] - d.start[0]);
            if (fs[i] < fs[best] || (fs[i] == fs[best] && closer)) best = i;
        }
        double a = xs[best > 0 ? best - 1 : 0], b = xs[std::min(best + 1, xs.size() - 1)];
        double incumbent_x = xs[best], incumbent_f = fs[best];
        if (f_start < incumbent_f) {
            incumbent_x = d.start[0];
            incumbent_f = f_start;
            a = std::max(lo, incumbent_x - (hi - lo) / (m - 1.0));
            b = std::min(hi, incumbent_x + (hi - lo) / (m - 1.0));
        }
        if (!std::isfinite(incumbent_f)) {
            out.x = d.start;
            out.value = incumbent_f;
            return out;
        }
        const auto g = golden_section([&](double x) { return f(Vector::Constant(1, x)); }, a, b,
                                      opt.golden_tolerance);
        out.evaluations += g.evaluations;
        out.converged = g.converged;
        if (g.value <= incumbent_f) {
            out.x = g.x;
            out.value = g.value;
        } else {
            out.x = Vector::Constant(1, incumbent_x);
            out.value = incumbent_f;
        }
        return out;
    }

    // Find a feasible start when the proposed one is not.
    Vector start = d.start;
    double f_start = f(start);
    int extra = 1;
    if (!std::isfinite(f_start)) {
        auto rng = detail::make_rng(opt.nelder_mead.seed ^ 0x9e3779b97f4a7c15ULL);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        const int tries = p == 2 ? 0 : 400;
        auto consider = [&](const Vector& x) {
            const double v = f(x);
            ++extra;
            if (v < f_start) f_start = v, start = x;
        };
        if (p == 2) {
            constexpr int kSide = 21;
            for (int i = 0; i < kSide; ++i)
                for (int k = 0; k < kSide; ++k) {
                    Vector x(2);
                    x[0] = d.lower[0] + (d.upper[0] - d.lower[0]) * i / (kSide - 1.0);
                    x[1] = d.lower[1] + (d.upper[1] - d.lower[1]) * k / (kSide - 1.0);
                    consider(x);
                }
        }
        for (int i = 0; i < tries; ++i) {
            Vector x(p);
            for (Eigen::Index k = 0; k < p; ++k) x[k] = d.lower[k] + (d.upper[k] - d.lower[k]) * unit(rng);
            consider(x);
        }
    }
    if (!std::isfinite(f_start)) {
        out.x = d.start;
        out.value = f_start;
        out.evaluations = extra;
        return out;
    }
    out = nelder_mead(f, start, d.lower, d.upper, opt.nelder_mead);
    out.evaluations += extra;
    return out;
}

inline bool on_boundary(const Vector& x, const SearchDomain& d) {
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        const double tol = 1e-6 * (d.upper[k] - d.lower[k]);
        if (x[k] - d.lower[k] <= tol || d.upper[k] - x[k] <= tol) return true;
    }
    return false;
}

}  // namespace detail

/// Maximum empirical likelihood estimate: minimizes l(theta) over the box.
/// Throws EstimationFailure when no feasible theta is found.
[[nodiscard]] inline MeleResult mele(const EstimatingSystem& system, const Periodogram& pg, Variant variant,
                                     const SearchOptions& opt = {}) {
    const SearchDomain d = detail::resolve_domain(system, pg, opt);
    detail::ProfileObjective objective(system, pg, variant, opt.el);
    const auto res = detail::minimize_box([&](const Vector& x) { return objective(x); }, d, opt);
    if (!std::isfinite(res.value))
        throw EstimationFailure("no feasible parameter found for system '" + system.name + "' in the search box");

    MeleResult out;
    out.theta = res.x;
    out.variant = variant;
    out.evaluations = objective.evaluations();
    out.converged = res.converged;
    const auto stat = log_el_ratio(system, out.theta, pg, variant, opt.el);
    out.statistic = stat.value;
    out.multiplier = stat.solution.t;
    if (system.p > 0 && detail::on_boundary(out.theta, d))
        detail::add_warning(out.warnings, "estimate lies on the search boundary");
    if (!out.converged) detail::add_warning(out.warnings, "outer search did not meet its tolerance");
    if (objective.solver_failures() > 0)
        detail::add_warning(out.warnings, "dual solver failed at " + std::to_string(objective.solver_failures()) +
                                               " trial points (scored as excluded)");
    return out;
}

/// Convenience overload using the system's natural variant.
[[nodiscard]] inline MeleResult mele(const EstimatingSystem& system, const Periodogram& pg,
                                     const SearchOptions& opt = {}) {
    return mele(system, pg, natural_variant(system), opt);
}

struct ParameterTest {
    /// l(theta0) against chi^2_r.
    TestReport simple;
    /// l(theta0) - l(theta_hat) against chi^2_p; absent when p = 0.
    std::optional<TestReport> ratio;
    std::optional<MeleResult> estimate;
};

/// Tests H0: theta = theta0 in both the simple and the likelihood-ratio form.
[[nodiscard]] inline ParameterTest test_parameter(const EstimatingSystem& system, const Periodogram& pg,
                                                  Variant variant, const Vector& theta0, double level = 0.95,
                                                  const SearchOptions& opt = {}) {
    detail::check_level(level);
    if (static_cast<std::size_t>(theta0.size()) != system.p)
        throw InvalidInput("theta0 must have " + std::to_string(system.p) + " entries");
    if (!system.is_admissible(theta0)) throw InvalidInput("theta0 lies outside the parameter space");
    const auto stat0 = log_el_ratio(system, theta0, pg, variant, opt.el);

    ParameterTest out;
    out.simple = detail::make_report("parameter", stat0.value, static_cast<double>(system.r), level, variant, system);
    if (system.p == 0) return out;

    try {
        auto est = mele(system, pg, variant, opt);
        // theta0 itself is a candidate: keeps the ratio form nonnegative.
        if (stat0.feasible && stat0.value < est.statistic) {
            est.theta = theta0;
            est.statistic = stat0.value;
            est.multiplier = stat0.solution.t;
        }
        out.ratio = detail::make_report("parameter-ratio", stat0.value - est.statistic,
                                        static_cast<double>(system.p), level, variant, system);
        out.ratio->estimate = est.theta;
        out.simple.estimate = est.theta;
        for (const auto& w : est.warnings) detail::add_warning(out.ratio->warnings, w);
        out.estimate = std::move(est);
    } catch (const EstimationFailure& e) {
        out.ratio = detail::make_report("parameter-ratio", std::numeric_limits<double>::infinity(),
                                        static_cast<double>(system.p), level, variant, system);
        detail::add_warning(out.ratio->warnings, e.what());
    }
    return out;
}

/// Overidentification test: l(theta_hat) against chi^2_{r-p}.
[[nodiscard]] inline TestReport test_moment_validity(const EstimatingSystem& system, const Periodogram& pg,
                                                     Variant variant, double level = 0.95,
                                                     const SearchOptions& opt = {}) {
    detail::check_level(level);
    if (system.r <= system.p) throw InvalidRequest("moment validity test needs r > p (df would be 0)");
    const double df = static_cast<double>(system.r - system.p);
    try {
        const auto est = mele(system, pg, variant, opt);
        auto rep = detail::make_report("moment-validity", est.statistic, df, level, variant, system);
        rep.estimate = est.theta;
        for (const auto& w : est.warnings) detail::add_warning(rep.warnings, w);
        return rep;
    } catch (const EstimationFailure& e) {
        auto rep = detail::make_report("moment-validity", std::numeric_limits<double>::infinity(), df, level,
                                       variant, system);
        detail::add_warning(rep.warnings, e.what());
        return rep;
    }
}

/// psi: R^p -> R^q, the null is psi(theta) = 0.
struct Constraint {
    std::size_t q = 0;
    std::function<Vector(const Vector&)> value;
};

struct ConstrainedTest {
    /// l(theta_psi) - l(theta_hat) against chi^2_q.
    TestReport constraint;
    /// l(theta0) - l(theta_psi) against chi^2_{p-q}, when theta0 is given.
    std::optional<TestReport> remaining;
    Vector constrained_estimate;
    MeleResult unconstrained;
};

/// Constrained MELE by a quadratic-penalty path (weights x10 over six stages).
[[nodiscard]] inline ConstrainedTest test_constrained(const EstimatingSystem& system, const Periodogram& pg,
                                                      Variant variant, const Constraint& psi,
                                                      const std::optional<Vector>& theta0 = std::nullopt,
                                                      double level = 0.95, const SearchOptions& opt = {}) {
    detail::check_level(level);
    if (psi.q == 0 || psi.q >= system.p) throw InvalidRequest("constrained test needs 1 <= q < p");
    if (!psi.value) throw InvalidInput("constraint function is empty");
    const SearchDomain d = detail::resolve_domain(system, pg, opt);
    ConstrainedTest out;
    out.unconstrained = mele(system, pg, variant, opt);

    detail::ProfileObjective objective(system, pg, variant, opt.el);
    Vector theta = out.unconstrained.theta;
    double weight = 1e2;
    SearchOptions stage = opt;
    for (int k = 0; k < 6; ++k, weight *= 10.0) {
        const auto penalized = [&](const Vector& x) {
            const double l = objective(x);
            if (!std::isfinite(l)) return l;
            const Vector v = psi.value(x);
            return l + weight * v.squaredNorm();
        };
        SearchDomain sd = d;
        sd.start = theta;
        stage.nelder_mead.restarts = k == 0 ? opt.nelder_mead.restarts : 0;
        const auto res = detail::minimize_box(penalized, sd, stage);
        if (!std::isfinite(res.value)) throw EstimationFailure("constrained search found no feasible parameter");
        theta = res.x;
    }
    out.constrained_estimate = theta;
    const double l_psi = objective(theta);
    const double violation = psi.value(theta).norm();

    out.constraint = detail::make_report("constraint", l_psi - out.unconstrained.statistic,
                                         static_cast<double>(psi.q), level, variant, system);
    out.constraint.estimate = theta;
    out.constraint.extras["constraint_violation"] = violation;
    if (violation > 1e-4) detail::add_warning(out.constraint.warnings, "penalty path left |psi| above 1e-4");
    if (theta0) {
        if (theta0->size() != static_cast<Eigen::Index>(system.p))
            throw InvalidInput("theta0 must have " + std::to_string(system.p) + " entries");
        const double l0 = objective(*theta0);
        out.remaining = detail::make_report("constraint-remaining", l0 - l_psi,
                                            static_cast<double>(system.p - psi.q), level, variant, system);
    }
    return out;
}

/// Profile test of H0: theta_k = value_k for the given coordinates, the
/// others re-estimated: l(theta1_0, theta2_hat) - l(theta_hat) against chi^2_q.
[[nodiscard]] inline TestReport test_profile(const EstimatingSystem& system, const Periodogram& pg, Variant variant,
                                             const std::vector<std::size_t>& fixed, const Vector& values,
                                             double level = 0.95, const SearchOptions& opt = {}) {
    detail::check_level(level);
    const std::size_t q = fixed.size();
    if (q == 0 || q >= system.p) throw InvalidRequest("profile test needs 1 <= q < p fixed coordinates");
    if (static_cast<std::size_t>(values.size()) != q) throw InvalidInput("one value per fixed coordinate");
    std::vector<bool> is_fixed(system.p, false);
    for (std::size_t k : fixed) {
        if (k >= system.p || is_fixed[k]) throw InvalidInput("fixed coordinates must be distinct and < p");
        is_fixed[k] = true;
    }
    std::vector<std::size_t> free;
    for (std::size_t k = 0; k < system.p; ++k)
        if (!is_fixed[k]) free.push_back(k);

    const SearchDomain d = detail::resolve_domain(system, pg, opt);
    auto assemble = [&](const Vector& u) {
        Vector theta(static_cast<Eigen::Index>(system.p));
        for (std::size_t i = 0; i < q; ++i) theta[static_cast<Eigen::Index>(fixed[i])] = values[static_cast<Eigen::Index>(i)];
        for (std::size_t i = 0; i < free.size(); ++i)
            theta[static_cast<Eigen::Index>(free[i])] = u[static_cast<Eigen::Index>(i)];
        return theta;
    };
    SearchDomain rd;
    const auto nf = static_cast<Eigen::Index>(free.size());
    rd.lower.resize(nf);
    rd.upper.resize(nf);
    rd.start.resize(nf);
    for (Eigen::Index i = 0; i < nf; ++i) {
        const auto k = static_cast<Eigen::Index>(free[static_cast<std::size_t>(i)]);
        rd.lower[i] = d.lower[k];
        rd.upper[i] = d.upper[k];
        rd.start[i] = d.start[k];
    }

    const auto full = mele(system, pg, variant, opt);
    detail::ProfileObjective objective(system, pg, variant, opt.el);
    const auto res = detail::minimize_box([&](const Vector& u) { return objective(assemble(u)); }, rd, opt);
    double l_fixed = res.value;
    Vector theta_fixed = assemble(res.x);
    // The fixed value at the full estimate's free coordinates is also a candidate.
    {
        Vector u(nf);
        for (Eigen::Index i = 0; i < nf; ++i) u[i] = full.theta[static_cast<Eigen::Index>(free[static_cast<std::size_t>(i)])];
        const double v = objective(assemble(u));
        if (v < l_fixed) l_fixed = v, theta_fixed = assemble(u);
    }
    const double full_stat = std::min(full.statistic, l_fixed);
    auto rep = detail::make_report("profile", l_fixed - full_stat, static_cast<double>(q), level, variant, system);
    rep.estimate = theta_fixed;
    if (!std::isfinite(l_fixed)) detail::add_warning(rep.warnings, "no feasible parameter with the fixed coordinates");
    return rep;
}

struct RegionInterval {
    double lower = 0.0;
    double upper = 0.0;
    bool lower_at_bound = false;
    bool upper_at_bound = false;
    /// The endpoint borders infeasible parameters rather than the cutoff.
    bool lower_at_infeasible = false;
    bool upper_at_infeasible = false;
};

struct ConfidenceRegion {
    double level = 0.95;
    double df = 0.0;
    /// l(theta_hat) + chi^2_{p, level}.
    double cutoff = 0.0;
    MeleResult estimate;
    /// p = 1: every bracketing interval found at the scan resolution.
    std::vector<RegionInterval> intervals;
    /// p = 2: grid axes and l on the grid (rows follow axis0).
    std::vector<double> axis0;
    std::vector<double> axis1;
    Matrix grid;
    std::vector<std::string> warnings;

    [[nodiscard]] std::optional<RegionInterval> outermost() const {
        if (intervals.empty()) return std::nullopt;
        RegionInterval r = intervals.front();
        r.upper = intervals.back().upper;
        r.upper_at_bound = intervals.back().upper_at_bound;
        r.upper_at_infeasible = intervals.back().upper_at_infeasible;
        return r;
    }
};

struct RegionOptions {
    SearchOptions search;
    /// Scan points per axis.
    int resolution = 201;
    double tolerance = 1e-6;
};

/// Level-(1 - gamma) region {theta : l(theta) - l(theta_hat) <= chi^2_{p, level}}.
[[nodiscard]] inline ConfidenceRegion confidence_region(const EstimatingSystem& system, const Periodogram& pg,
                                                        Variant variant, double level = 0.95,
                                                        const RegionOptions& opt = {}) {
    detail::check_level(level);
    if (system.p == 0 || system.p > 2)
        throw InvalidRequest("region output needs p in {1, 2}; use test_parameter for membership");
    const SearchDomain d = detail::resolve_domain(system, pg, opt.search);
    ConfidenceRegion out;
    out.level = level;
    out.df = static_cast<double>(system.p);
    out.estimate = mele(system, pg, variant, opt.search);
    out.cutoff = out.estimate.statistic + chi_square_quantile(out.df, level);
    detail::ProfileObjective objective(system, pg, variant, opt.search.el);
    const int m = std::max(opt.resolution, 3);

    if (system.p == 2) {
        out.axis0.resize(static_cast<std::size_t>(m));
        out.axis1.resize(static_cast<std::size_t>(m));
        for (int i = 0; i < m; ++i) {
            out.axis0[static_cast<std::size_t>(i)] = d.lower[0] + (d.upper[0] - d.lower[0]) * i / (m - 1.0);
            out.axis1[static_cast<std::size_t>(i)] = d.lower[1] + (d.upper[1] - d.lower[1]) * i / (m - 1.0);
        }
        out.grid.resize(m, m);
        bool touches = false;
        for (int i = 0; i < m; ++i)
            for (int k = 0; k < m; ++k) {
                Vector x(2);
                x << out.axis0[static_cast<std::size_t>(i)], out.axis1[static_cast<std::size_t>(k)];
                const double v = objective(x);
                out.grid(i, k) = v;
                if (v <= out.cutoff && (i == 0 || k == 0 || i == m - 1 || k == m - 1)) touches = true;
            }
        if (touches) detail::add_warning(out.warnings, "region reaches the search bounds");
        return out;
    }

    auto f = [&](double x) { return objective(Vector::Constant(1, x)); };
    std::vector<double> xs;
    for (int i = 0; i < m; ++i) xs.push_back(d.lower[0] + (d.upper[0] - d.lower[0]) * i / (m - 1.0));
    xs.push_back(out.estimate.theta[0]);
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    std::vector<double> fs(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) fs[i] = f(xs[i]);
    auto inside = [&](double v) { return v <= out.cutoff; };

    // Crossing between an inside point a and an outside point b.
    auto crossing = [&](double a, double b, bool& at_infeasible) {
        while (std::abs(b - a) > opt.tolerance) {
            const double mid = 0.5 * (a + b);
            (inside(f(mid)) ? a : b) = mid;
        }
        at_infeasible = !std::isfinite(f(b));
        return a;
    };

    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!inside(fs[i]) || (i > 0 && inside(fs[i - 1]))) continue;
        RegionInterval iv;
        if (i == 0) {
            iv.lower = xs[0];
            iv.lower_at_bound = true;
        } else {
            iv.lower = crossing(xs[i], xs[i - 1], iv.lower_at_infeasible);
        }
        std::size_t j = i;
        while (j + 1 < xs.size() && inside(fs[j + 1])) ++j;
        if (j + 1 == xs.size()) {
            iv.upper = xs[j];
            iv.upper_at_bound = true;
        } else {
            iv.upper = crossing(xs[j], xs[j + 1], iv.upper_at_infeasible);
        }
        out.intervals.push_back(iv);
    }
    if (out.intervals.size() > 1) detail::add_warning(out.warnings, "region is a union of several intervals");
    for (const auto& iv : out.intervals)
        if (iv.lower_at_bound || iv.upper_at_bound) detail::add_warning(out.warnings, "region reaches the search bounds");
    return out;
}

/// Simple goodness of fit of a fixed density f0 with l_{n,F} against chi^2_1.
/// Also reports A_n, B_n and T_n = pi A_n / B_n^2.
[[nodiscard]] inline TestReport test_gof_simple(const SpectralModel& f0, const Periodogram& pg, double level = 0.95,
                                                const ElConfig& el = {}) {
    detail::check_level(level);
    const auto system = gof_simple_system(f0);
    const auto stat = log_el_ratio(system, Vector(0), pg, Variant::mean_corrected, el);
    auto rep = detail::make_report("gof-simple", stat.value, 1.0, level, Variant::mean_corrected, system);

    double a = 0.0, b = 0.0;
    for (std::size_t j = 0; j < pg.size(); ++j) {
        const double ratio = pg.ordinates[j] / density(f0, pg.frequencies[j]);
        a += ratio * ratio;
        b += ratio;
    }
    const double scale = two_pi / static_cast<double>(pg.n);
    a *= scale;
    b *= scale;
    rep.extras["A_n"] = a;
    rep.extras["B_n"] = b;
    rep.extras["T_n"] = pi * a / (b * b);
    rep.extras["expansion"] = static_cast<double>(pg.n) * (b - pi) * (b - pi) / (pi * a);
    return rep;
}

/// Composite goodness of fit of a Whittle family: l_{I^2,F}(theta_hat) against chi^2_1.
[[nodiscard]] inline TestReport test_gof_composite(const WhittleFamily& family, const Periodogram& pg,
                                                   double level = 0.95, const SearchOptions& opt = {}) {
    detail::check_level(level);
    const auto system = gof_composite_system(family);
    TestReport rep;
    try {
        const auto est = mele(system, pg, Variant::squared_moment, opt);
        rep = detail::make_report("gof-composite", est.statistic, 1.0, level, Variant::squared_moment, system);
        rep.estimate = est.theta;
        for (const auto& w : est.warnings) detail::add_warning(rep.warnings, w);
    } catch (const EstimationFailure& e) {
        rep = detail::make_report("gof-composite", std::numeric_limits<double>::infinity(), 1.0, level,
                                  Variant::squared_moment, system);
        detail::add_warning(rep.warnings, e.what());
    }
    rep.extras["statistic_per_n"] = rep.statistic / static_cast<double>(pg.n);
    return rep;
}

}  // namespace fdel
