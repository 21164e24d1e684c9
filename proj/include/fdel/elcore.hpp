#pragma once

/** @file
 * Inner empirical-likelihood problem on periodogram ordinates.
 *
 * For constraint vectors z_1..z_N in R^r the profile EL ratio is
 * R = prod_j (N p_j) with p_j = 1 / (N (1 + t'z_j)), where t maximizes the
 * concave function q(t) = sum_j log(1 + t'z_j). The solver minimizes the
 * convex dual D(t) = -q(t) by damped Newton steps over the open polytope
 * {t : 1 + t'z_j > 0 for all j}; -log R = q(t) >= 0.
 *
 * Weights here sum to one; the frequency-domain masses are w_j = pi p_j.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fdel/detail/simplex.hpp"
#include "fdel/error.hpp"
#include "fdel/estimating.hpp"
#include "fdel/spectral.hpp"

namespace fdel {

enum class Variant { plain, mean_corrected, squared_moment };

[[nodiscard]] inline std::string_view to_string(Variant v) noexcept {
    switch (v) {
        case Variant::plain: return "plain";
        case Variant::mean_corrected: return "mean_corrected";
        case Variant::squared_moment: return "squared_moment";
    }
    return "plain";
}

[[nodiscard]] inline Variant parse_variant(std::string_view s) {
    if (s == "plain") return Variant::plain;
    if (s == "mean_corrected" || s == "mean-corrected" || s == "model") return Variant::mean_corrected;
    if (s == "squared_moment" || s == "squared-moment" || s == "squared") return Variant::squared_moment;
    throw InvalidInput("unknown variant '" + std::string(s) + "'");
}

/// Variant a system is meant to be used with when the caller does not choose.
[[nodiscard]] inline Variant natural_variant(const EstimatingSystem& s) {
    if (s.squared_moment) return Variant::squared_moment;
    if (s.has_model_density() && s.requires_gaussian()) return Variant::mean_corrected;
    return Variant::plain;
}

/// Solver tolerances.
struct ElConfig {
    /// Stop when ||grad D|| <= stationarity * N * max_j ||z_j||.
    double stationarity = 1e-10;
    /// Line search keeps every 1 + t'z_j at or above this.
    double min_denominator = 1e-10;
    /// Hessian condition number beyond which a damped gradient step is used.
    double max_condition = 1e12;
    int max_iterations = 100;
    /// ||t|| max_j ||z_j|| beyond this means the iterate is escaping to infinity.
    double divergence = 1e12;
};

/// Rows z_j' of the constraint vectors, j = 1..N.
using ConstraintMatrix = Matrix;

struct ElSolution {
    Vector t;
    /// q(t) = -log R.
    double log_ratio = 0.0;
    Vector weights;
    bool feasible = false;
    int iterations = 0;
    double grad_norm = 0.0;
};

/// Non-convergence of the dual solve; carries the best iterate.
class DualSolveFailure : public NumericalFailure {
public:
    DualSolveFailure(const std::string& what, ElSolution best)
        : NumericalFailure(what), best_(std::move(best)) {}
    [[nodiscard]] const ElSolution& best() const noexcept { return best_; }

private:
    ElSolution best_;
};

/// z_j for one of the three variants:
///   plain           pi G(lambda_j) I_j - M
///   mean_corrected  pi G(lambda_j) (I_j - f_j)
///   squared_moment  (pi G_1 (I_j^2 / 2 - f_j^2), pi G_{2..r} (I_j - f_j))
[[nodiscard]] inline ConstraintMatrix build_constraints(const EstimatingSystem& system, const Vector& theta,
                                                        const Periodogram& pg, Variant variant) {
    if (variant == Variant::plain && system.squared_moment)
        throw ConfigurationError("system '" + system.name + "' requires the squared_moment variant");
    if (variant == Variant::mean_corrected && system.squared_moment)
        throw ConfigurationError("system '" + system.name + "' requires the squared_moment variant");
    if (variant == Variant::squared_moment && !system.squared_moment)
        throw ConfigurationError("squared_moment variant needs a system with an I_n^2 moment");
    if (variant != Variant::plain && !system.has_model_density())
        throw ConfigurationError("variant " + std::string(to_string(variant)) + " needs a model density; system '" +
                                 system.name + "' has none");

    const auto N = static_cast<Eigen::Index>(pg.size());
    const Eigen::Map<const Vector> I(pg.ordinates.data(), N);
    Matrix z = system.values(theta, pg.frequencies);
    if (z.rows() != N || z.cols() != static_cast<Eigen::Index>(system.r))
        throw ConfigurationError("system '" + system.name + "' returned a matrix of the wrong shape");

    switch (variant) {
        case Variant::plain:
            z = pi * (z.array().colwise() * I.array()).matrix();
            z.rowwise() -= system.target.transpose();
            break;
        case Variant::mean_corrected: {
            const Vector f = system.model_density(theta, pg.frequencies);
            z = pi * (z.array().colwise() * (I - f).array()).matrix();
            break;
        }
        case Variant::squared_moment: {
            const Vector f = system.model_density(theta, pg.frequencies);
            const Vector resid = I - f;
            const Vector sq = (I.array().square() / 2.0 - f.array().square()).matrix();
            z.col(0) = pi * z.col(0).cwiseProduct(sq);
            for (Eigen::Index k = 1; k < z.cols(); ++k) z.col(k) = pi * z.col(k).cwiseProduct(resid);
            break;
        }
    }
    if (!z.allFinite()) throw NumericalFailure("non-finite constraint vector for system '" + system.name + "'");
    return z;
}

/// Necessary condition for 0 in the interior of conv{z_j}: no candidate
/// direction u (coordinate axes and the mean direction, both signs) with
/// u'z_j >= 0 for all j and > 0 for some j. Exact when r = 1.
[[nodiscard]] inline bool hull_precheck(const ConstraintMatrix& z) {
    const Eigen::Index N = z.rows(), r = z.cols();
    if (r == 0) return true;
    if (N <= r) return z.isZero(0.0);
    if (z.isZero(0.0)) return true;
    auto separates = [&](const Vector& u) {
        const Vector proj = z * u;
        return proj.minCoeff() >= 0.0 && proj.maxCoeff() > 0.0;
    };
    for (Eigen::Index k = 0; k < r; ++k) {
        const Vector e = Vector::Unit(r, k);
        if (separates(e) || separates(-e)) return false;
    }
    const Vector mean = z.colwise().mean().transpose();
    if (mean.norm() > 0.0 && (separates(mean) || separates(-mean))) return false;
    return true;
}

namespace detail {

/// Columns of z that are not identically zero. A zero column is a constraint
/// every weight vector meets, so it is dropped from the dual.
inline std::vector<Eigen::Index> active_columns(const ConstraintMatrix& z) {
    std::vector<Eigen::Index> cols;
    for (Eigen::Index k = 0; k < z.cols(); ++k)
        if (!z.col(k).isZero(0.0)) cols.push_back(k);
    return cols;
}

inline ConstraintMatrix select_columns(const ConstraintMatrix& z, const std::vector<Eigen::Index>& cols) {
    ConstraintMatrix out(z.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = z.col(cols[k]);
    return out;
}

}  // namespace detail

/// Exact test that 0 is interior to conv{z_j} (zero columns dropped): the
/// columns have full rank and some strictly positive weights w, sum w = 1,
/// satisfy sum w_j z_j = 0. The LP maximizes the smallest weight.
[[nodiscard]] inline bool hull_interior(const ConstraintMatrix& z) {
    const auto cols = detail::active_columns(z);
    if (cols.empty()) return true;
    ConstraintMatrix y = detail::select_columns(z, cols);
    const Eigen::Index N = y.rows(), r = y.cols();
    if (N <= r) return false;
    for (Eigen::Index k = 0; k < r; ++k) y.col(k) /= y.col(k).cwiseAbs().maxCoeff();
    Eigen::ColPivHouseholderQR<Matrix> qr(y);
    qr.setThreshold(1e-10);
    if (qr.rank() < r) return false;

    // Variables (v_1..v_N, s) >= 0 with w_j = v_j + s.
    Matrix a(r + 1, N + 1);
    a.topLeftCorner(r, N) = y.transpose();
    a.block(0, N, r, 1) = y.colwise().sum().transpose();
    a.row(r).head(N).setOnes();
    a(r, N) = static_cast<double>(N);
    Vector b = Vector::Zero(r + 1);
    b[r] = 1.0;
    Vector c = Vector::Zero(N + 1);
    c[N] = 1.0;
    const auto best = detail::DenseSimplex(a, b).maximize(c);
    return best && *best > 1e-12 / static_cast<double>(N);
}

namespace detail {

/// D(t) = -sum log(1 + t'z_j); +inf outside the domain.
inline double dual_objective(const ConstraintMatrix& z, const Vector& t, double floor) {
    const Vector a = z * t;
    double s = 0.0;
    for (Eigen::Index j = 0; j < a.size(); ++j) {
        if (!(1.0 + a[j] >= floor)) return std::numeric_limits<double>::infinity();
        s -= std::log1p(a[j]);
    }
    return s;
}

}  // namespace detail

/// Convex dual objective -q(t); exposed for property checks.
[[nodiscard]] inline double dual_objective(const ConstraintMatrix& z, const Vector& t) {
    return detail::dual_objective(z, t, 0.0);
}

namespace detail {

inline ElSolution newton_dual(const ConstraintMatrix& z, const ElConfig& config) {
    const Eigen::Index N = z.rows(), r = z.cols();

    double zmax = 0.0;
    for (Eigen::Index j = 0; j < N; ++j) zmax = std::max(zmax, z.row(j).norm());
    const double tol = config.stationarity * static_cast<double>(N) * zmax;

    ElSolution sol;
    sol.t = Vector::Zero(r);
    double value = 0.0;  // D(0)
    Vector grad(r);
    auto finish = [&](int iterations, double gnorm) {
        const Vector a = (z * sol.t).array() + 1.0;
        sol.weights = (1.0 / (static_cast<double>(N) * a.array())).matrix();
        sol.log_ratio = -value;
        sol.iterations = iterations;
        sol.grad_norm = gnorm;
        sol.feasible = true;
        return sol;
    };

    for (int it = 0; it <= config.max_iterations; ++it) {
        const Vector inv = ((z * sol.t).array() + 1.0).inverse().matrix();
        grad = -(z.transpose() * inv);
        const double gnorm = grad.norm();
        if (it == config.max_iterations && gnorm <= tol) return finish(it, gnorm);
        if (it == config.max_iterations) break;

        const Matrix zw = z.array().colwise() * inv.array();
        const Matrix hess = zw.transpose() * zw;
        Eigen::SelfAdjointEigenSolver<Matrix> es(hess);
        const double lmax = es.eigenvalues().maxCoeff();
        const double lmin = es.eigenvalues().minCoeff();
        Vector step;
        double decrement2 = 0.0;
        if (lmin > 0.0 && lmax / lmin <= config.max_condition) {
            step = -(es.eigenvectors() *
                     (es.eigenvalues().cwiseInverse().asDiagonal() * (es.eigenvectors().transpose() * grad)));
            decrement2 = -grad.dot(step);
        } else {
            step = -grad / lmax;
        }
        // Stationary with a vanishing Newton decrement; the decrement alone also
        // ends the solve once it is below working precision.
        if (gnorm <= tol && decrement2 <= 1e-20 * std::max(1.0, std::abs(value))) return finish(it, gnorm);
        if (decrement2 > 0.0 && decrement2 < 1e-28 * std::max(1.0, std::abs(value))) return finish(it, gnorm);

        // D is self-concordant: a decrement below 1/4 means the full step is
        // in the quadratic region, where rounding in D would mislead the search.
        if (decrement2 > 0.0 && decrement2 < 0.0625) {
            const Vector trial = sol.t + step;
            const double v = detail::dual_objective(z, trial, config.min_denominator);
            if (std::isfinite(v)) {
                sol.t = trial;
                value = v;
                continue;
            }
        }

        double s = 1.0;
        bool accepted = false;
        for (int halving = 0; halving < 60; ++halving, s *= 0.5) {
            const Vector trial = sol.t + s * step;
            const double v = detail::dual_objective(z, trial, config.min_denominator);
            if (v <= value) {
                sol.t = trial;
                value = v;
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            sol.iterations = it;
            sol.grad_norm = gnorm;
            sol.log_ratio = -value;
            throw DualSolveFailure("dual line search stalled", sol);
        }
        if (sol.t.norm() * zmax > config.divergence)
            throw Infeasible("dual iterate diverges: zero is on or outside the hull boundary");
    }
    sol.log_ratio = -value;
    sol.iterations = config.max_iterations;
    sol.grad_norm = grad.norm();
    throw DualSolveFailure("dual Newton iteration did not converge", sol);
}

}  // namespace detail

/// Solve for the Lagrange multiplier t. Throws Infeasible when 0 is not
/// interior to the hull and DualSolveFailure on non-convergence.
[[nodiscard]] inline ElSolution solve_dual(const ConstraintMatrix& z, const ElConfig& config = {}) {
    if (!hull_precheck(z) || !hull_interior(z))
        throw Infeasible("zero is not interior to the convex hull of the constraint vectors");
    const auto cols = detail::active_columns(z);
    if (static_cast<Eigen::Index>(cols.size()) == z.cols()) return detail::newton_dual(z, config);

    ElSolution sol;
    if (cols.empty()) {
        sol.t = Vector::Zero(z.cols());
        sol.weights = Vector::Constant(z.rows(), 1.0 / static_cast<double>(z.rows()));
        sol.feasible = true;
        return sol;
    }
    ElSolution reduced = detail::newton_dual(detail::select_columns(z, cols), config);
    sol = reduced;
    sol.t = Vector::Zero(z.cols());
    for (std::size_t k = 0; k < cols.size(); ++k) sol.t[cols[k]] = reduced.t[static_cast<Eigen::Index>(k)];
    return sol;
}

/// Operational feasibility: pre-check, then a converged dual solve.
[[nodiscard]] inline bool feasible(const ConstraintMatrix& z, const ElConfig& config = {}) {
    if (!hull_precheck(z) || !hull_interior(z)) return false;
    try {
        return solve_dual(z, config).feasible;
    } catch (const Infeasible&) {
        return false;
    } catch (const DualSolveFailure&) {
        return false;
    }
}

/// Scaled log-ratio statistic: 4 q for the plain variant, 2 q otherwise.
struct ElStatistic {
    double value = std::numeric_limits<double>::infinity();
    bool feasible = false;
    Variant variant = Variant::plain;
    ElSolution solution;
};

[[nodiscard]] constexpr double statistic_scale(Variant v) noexcept { return v == Variant::plain ? 4.0 : 2.0; }

/// l(theta). An infeasible theta gives value = +inf and feasible = false;
/// solver non-convergence propagates as DualSolveFailure.
[[nodiscard]] inline ElStatistic log_el_ratio(const EstimatingSystem& system, const Vector& theta,
                                              const Periodogram& pg, Variant variant,
                                              const ElConfig& config = {}) {
    ElStatistic out;
    out.variant = variant;
    const ConstraintMatrix z = build_constraints(system, theta, pg, variant);
    try {
        out.solution = solve_dual(z, config);
    } catch (const Infeasible&) {
        return out;
    }
    out.feasible = true;
    out.value = statistic_scale(variant) * std::max(out.solution.log_ratio, 0.0);
    return out;
}

}  // namespace fdel
