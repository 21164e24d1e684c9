#pragma once

/** @file
 * Derivative-free minimizers used by the outer parameter searches. Objectives
 * may return +inf (infeasible points); both methods treat that as "worse than
 * any finite value".
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "fdel/detail/random.hpp"

namespace fdel {

struct MinimizeResult {
    Eigen::VectorXd x;
    double value = std::numeric_limits<double>::infinity();
    int evaluations = 0;
    bool converged = false;
};

using Objective = std::function<double(const Eigen::VectorXd&)>;

/// Golden-section search on [lo, hi] until the bracket is narrower than tol.
[[nodiscard]] inline MinimizeResult golden_section(const std::function<double(double)>& f, double lo, double hi,
                                                   double tol = 1e-10, int max_iterations = 200) {
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    MinimizeResult out;
    double a = lo, b = hi;
    double c = b - invphi * (b - a), d = a + invphi * (b - a);
    double fc = f(c), fd = f(d);
    out.evaluations = 2;
    int it = 0;
    for (; it < max_iterations && b - a > tol; ++it) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
        ++out.evaluations;
    }
    out.x = Eigen::VectorXd::Constant(1, fc <= fd ? c : d);
    out.value = std::min(fc, fd);
    out.converged = b - a <= tol;
    return out;
}

struct NelderMeadOptions {
    /// Stop when the simplex diameter falls below tolerance * (1 + ||x_best||).
    double tolerance = 1e-7;
    int max_evaluations = 4000;
    /// Extra runs from random points of the box after the first.
    int restarts = 3;
    std::uint64_t seed = 0x6e6d5eedULL;
    /// Initial edge length as a fraction of each box side.
    double initial_step = 0.1;
};

namespace detail {

/// One Nelder-Mead run in the unit cube; points are clipped to [0, 1]^p.
inline MinimizeResult nelder_mead_unit(const Objective& g, const Eigen::VectorXd& start, const Eigen::VectorXd& span,
                                       const NelderMeadOptions& opt, int budget) {
    const auto p = start.size();
    MinimizeResult out;
    auto clip = [](Eigen::VectorXd u) { return Eigen::VectorXd(u.cwiseMax(0.0).cwiseMin(1.0)); };
    auto eval = [&](const Eigen::VectorXd& u) {
        ++out.evaluations;
        return g(u);
    };

    std::vector<Eigen::VectorXd> simplex(static_cast<std::size_t>(p + 1), clip(start));
    std::vector<double> values(static_cast<std::size_t>(p + 1));
    for (Eigen::Index k = 0; k < p; ++k) {
        auto& v = simplex[static_cast<std::size_t>(k + 1)];
        v[k] += v[k] + opt.initial_step <= 1.0 ? opt.initial_step : -opt.initial_step;
    }
    for (std::size_t i = 0; i < simplex.size(); ++i) values[i] = eval(simplex[i]);

    std::vector<std::size_t> order(simplex.size());
    while (true) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        const auto best = order.front(), worst = order.back(), second = order[order.size() - 2];

        double diameter = 0.0;
        for (const auto& v : simplex)
            diameter = std::max(diameter, (v - simplex[best]).cwiseProduct(span).norm());
        const double scale = 1.0 + simplex[best].cwiseProduct(span).norm();
        if (diameter < opt.tolerance * scale && std::isfinite(values[best])) {
            out.converged = true;
            break;
        }
        if (out.evaluations >= budget) break;

        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(p);
        for (std::size_t i : order)
            if (i != worst) centroid += simplex[i];
        centroid /= static_cast<double>(p);

        const Eigen::VectorXd xr = clip(centroid + (centroid - simplex[worst]));
        const double fr = eval(xr);
        if (fr < values[best]) {
            const Eigen::VectorXd xe = clip(centroid + 2.0 * (centroid - simplex[worst]));
            const double fe = eval(xe);
            if (fe < fr) {
                simplex[worst] = xe;
                values[worst] = fe;
            } else {
                simplex[worst] = xr;
                values[worst] = fr;
            }
            continue;
        }
        if (fr < values[second]) {
            simplex[worst] = xr;
            values[worst] = fr;
            continue;
        }
        const bool outside = fr < values[worst];
        const Eigen::VectorXd xc =
            outside ? clip(centroid + 0.5 * (xr - centroid)) : clip(centroid + 0.5 * (simplex[worst] - centroid));
        const double fc = eval(xc);
        if (fc < (outside ? fr : values[worst])) {
            simplex[worst] = xc;
            values[worst] = fc;
            continue;
        }
        for (std::size_t i = 0; i < simplex.size(); ++i) {
            if (i == best) continue;
            simplex[i] = simplex[best] + 0.5 * (simplex[i] - simplex[best]);
            values[i] = eval(simplex[i]);
        }
    }
    const auto best = static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
    out.x = simplex[best];
    out.value = values[best];
    return out;
}

}  // namespace detail

/// Bounded Nelder-Mead: the search runs in the unit cube mapped onto
/// [lower, upper], restarted from random points; the best run wins, ties
/// going to the point closest to start.
[[nodiscard]] inline MinimizeResult nelder_mead(const Objective& f, const Eigen::VectorXd& start,
                                                const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                                                const NelderMeadOptions& opt = {}) {
    const Eigen::VectorXd span = upper - lower;
    auto to_theta = [&](const Eigen::VectorXd& u) { return Eigen::VectorXd(lower + u.cwiseProduct(span)); };
    const Objective g = [&](const Eigen::VectorXd& u) { return f(to_theta(u)); };
    const Eigen::VectorXd u0 = ((start - lower).array() / span.array()).matrix().cwiseMax(0.0).cwiseMin(1.0);

    auto rng = detail::make_rng(opt.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    MinimizeResult best;
    int total = 0;
    bool any_converged = false;
    const int runs = 1 + std::max(0, opt.restarts);
    for (int run = 0; run < runs; ++run) {
        Eigen::VectorXd u = u0;
        if (run > 0) {
            for (Eigen::Index k = 0; k < u.size(); ++k) u[k] = unit(rng);
        }
        auto res = detail::nelder_mead_unit(g, u, span, opt, opt.max_evaluations);
        total += res.evaluations;
        // Polish from the run's best point with a fresh simplex.
        if (std::isfinite(res.value)) {
            NelderMeadOptions polish = opt;
            polish.initial_step = std::max(opt.initial_step * 1e-2, 1e-6);
            auto again = detail::nelder_mead_unit(g, res.x, span, polish, opt.max_evaluations);
            total += again.evaluations;
            if (again.value <= res.value) res = again;
        }
        any_converged = any_converged || res.converged;
        const double dist_new = (to_theta(res.x) - start).norm();
        const double dist_old = best.x.size() ? (to_theta(best.x) - start).norm() : 0.0;
        if (res.value < best.value || (res.value == best.value && best.x.size() && dist_new < dist_old) ||
            best.x.size() == 0)
            best = res;
    }
    best.x = to_theta(best.x);
    best.evaluations = total;
    best.converged = any_converged && std::isfinite(best.value);
    return best;
}

}  // namespace fdel
