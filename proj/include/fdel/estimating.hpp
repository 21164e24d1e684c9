#pragma once

/** @file
 * Spectral estimating systems (G_theta, M): a vector of even functions of
 * frequency whose f-weighted integral over (0, pi] equals M at the true
 * parameter. Systems are built on [0, pi] only, which makes every component
 * even by construction.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "fdel/error.hpp"
#include "fdel/model_spec.hpp"
#include "fdel/models.hpp"
#include "fdel/spectral.hpp"

namespace fdel {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Box bounds and starting point for an outer parameter search.
struct SearchDomain {
    Vector lower;
    Vector upper;
    Vector start;
};

struct EstimatingSystem {
    using ValuesFn = std::function<Matrix(const Vector& theta, std::span<const double> lambdas)>;
    using GradientFn = std::function<Matrix(const Vector& theta, double lambda)>;
    using DensityFn = std::function<Vector(const Vector& theta, std::span<const double> lambdas)>;

    std::string name;
    std::size_t r = 0;
    std::size_t p = 0;
    /// Row j holds G_theta(lambda_j)'.
    ValuesFn values;
    Vector target;
    /// r x p matrix dG/dtheta; empty means central differences.
    GradientFn gradient;
    /// f_theta(lambda_j) for the mean-corrected and squared-moment variants.
    DensityFn model_density;
    /// First component is the I_n^2 moment (composite goodness of fit).
    bool squared_moment = false;
    std::function<bool(const Vector&)> admissible;
    std::function<SearchDomain(const Periodogram&)> domain;
    std::vector<std::string> parameter_names;

    [[nodiscard]] Vector evaluate(const Vector& theta, double lambda) const {
        const double l[1] = {lambda};
        return values(theta, l).row(0).transpose();
    }

    [[nodiscard]] bool has_model_density() const noexcept { return static_cast<bool>(model_density); }

    /// M != 0 (or an I_n^2 moment): chi-square calibration needs kappa4 = 0.
    [[nodiscard]] bool requires_gaussian() const {
        return squared_moment || (target.size() > 0 && target.cwiseAbs().maxCoeff() > 0.0);
    }

    [[nodiscard]] bool is_admissible(const Vector& theta) const {
        if (static_cast<std::size_t>(theta.size()) != p) return false;
        if (!theta.allFinite()) return false;
        return !admissible || admissible(theta);
    }

    /// dG/dtheta at one frequency; analytic when available, else central differences
    /// with step 1e-6 max(1, |theta_k|).
    [[nodiscard]] Matrix jacobian(const Vector& theta, double lambda) const {
        if (gradient) return gradient(theta, lambda);
        Matrix jac(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(p));
        for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(p); ++k) {
            const double h = 1e-6 * std::max(1.0, std::abs(theta[k]));
            Vector up = theta, down = theta;
            up[k] += h;
            down[k] -= h;
            jac.col(k) = (evaluate(up, lambda) - evaluate(down, lambda)) / (2.0 * h);
        }
        return jac;
    }
};

namespace detail {

inline void finish_system(EstimatingSystem& s) {
    if (s.p > s.r) throw InvalidInput("estimating system needs r >= p");
    if (static_cast<std::size_t>(s.target.size()) != s.r)
        throw InvalidInput("estimating system target must have r entries");
    if (s.parameter_names.size() != s.p) {
        s.parameter_names.clear();
        for (std::size_t k = 0; k < s.p; ++k) s.parameter_names.push_back("theta" + std::to_string(k + 1));
    }
}

inline double ratio_estimate(const Periodogram& pg, const std::function<double(double)>& g) {
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < pg.size(); ++j) {
        num += g(pg.frequencies[j]) * pg.ordinates[j];
        den += pg.ordinates[j];
    }
    return den > 0.0 ? num / den : 0.0;
}

}  // namespace detail

/// G_theta(lambda) = (cos(m_1 lambda), ..., cos(m_p lambda))' - theta, M = 0.
[[nodiscard]] inline EstimatingSystem autocorrelation_system(std::vector<int> lags) {
    if (lags.empty()) throw InvalidInput("acf system needs at least one lag");
    for (int m : lags)
        if (m <= 0) throw InvalidInput("acf lags must be positive integers");
    {
        auto sorted = lags;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw InvalidInput("acf lags must be distinct");
    }
    const std::size_t p = lags.size();
    EstimatingSystem s;
    s.name = "acf";
    s.r = s.p = p;
    s.target = Vector::Zero(static_cast<Eigen::Index>(p));
    s.values = [lags](const Vector& theta, std::span<const double> lambdas) {
        Matrix out(static_cast<Eigen::Index>(lambdas.size()), static_cast<Eigen::Index>(lags.size()));
        for (std::size_t j = 0; j < lambdas.size(); ++j)
            for (std::size_t k = 0; k < lags.size(); ++k)
                out(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) =
                    std::cos(lags[k] * lambdas[j]) - theta[static_cast<Eigen::Index>(k)];
        return out;
    };
    s.gradient = [p](const Vector&, double) {
        return Matrix(-Matrix::Identity(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p)));
    };
    s.admissible = [](const Vector& theta) { return theta.cwiseAbs().maxCoeff() <= 1.0; };
    s.domain = [lags](const Periodogram& pg) {
        const auto p = static_cast<Eigen::Index>(lags.size());
        SearchDomain d{Vector::Constant(p, -0.999), Vector::Constant(p, 0.999), Vector(p)};
        for (Eigen::Index k = 0; k < p; ++k) {
            const int m = lags[static_cast<std::size_t>(k)];
            d.start[k] = std::clamp(
                detail::ratio_estimate(pg, [m](double l) { return std::cos(m * l); }), -0.99, 0.99);
        }
        return d;
    };
    for (int m : lags) s.parameter_names.push_back("rho(" + std::to_string(m) + ")");
    detail::finish_system(s);
    return s;
}

/// Over-identified AR(1) autocorrelation system: G(lambda) = (cos(k lambda) - theta^k)_{k=1..K}.
[[nodiscard]] inline EstimatingSystem geometric_acf_system(int max_lag) {
    if (max_lag < 1) throw InvalidInput("geometric acf system needs max_lag >= 1");
    const auto K = static_cast<Eigen::Index>(max_lag);
    EstimatingSystem s;
    s.name = "acf-ar1";
    s.r = static_cast<std::size_t>(max_lag);
    s.p = 1;
    s.target = Vector::Zero(K);
    s.values = [K](const Vector& theta, std::span<const double> lambdas) {
        Matrix out(static_cast<Eigen::Index>(lambdas.size()), K);
        for (std::size_t j = 0; j < lambdas.size(); ++j) {
            double power = 1.0;
            for (Eigen::Index k = 0; k < K; ++k) {
                power *= theta[0];
                out(static_cast<Eigen::Index>(j), k) = std::cos(static_cast<double>(k + 1) * lambdas[j]) - power;
            }
        }
        return out;
    };
    s.gradient = [K](const Vector& theta, double) {
        Matrix g(K, 1);
        double power = 1.0;
        for (Eigen::Index k = 0; k < K; ++k) {
            g(k, 0) = -static_cast<double>(k + 1) * power;
            power *= theta[0];
        }
        return g;
    };
    s.admissible = [](const Vector& theta) { return std::abs(theta[0]) <= 1.0; };
    s.domain = [](const Periodogram& pg) {
        SearchDomain d{Vector::Constant(1, -0.999), Vector::Constant(1, 0.999), Vector(1)};
        d.start[0] = std::clamp(detail::ratio_estimate(pg, [](double l) { return std::cos(l); }), -0.99, 0.99);
        return d;
    };
    s.parameter_names = {"phi"};
    detail::finish_system(s);
    return s;
}

/// G_theta(lambda) = (1{lambda <= tau_1}, ..., 1{lambda <= tau_p})' - theta, M = 0.
[[nodiscard]] inline EstimatingSystem spectral_cdf_system(std::vector<double> taus) {
    if (taus.empty()) throw InvalidInput("cdf system needs at least one tau");
    for (std::size_t k = 0; k < taus.size(); ++k) {
        if (!(taus[k] > 0.0 && taus[k] < pi)) throw InvalidInput("cdf taus must lie in (0, pi)");
        if (k > 0 && !(taus[k] > taus[k - 1])) throw InvalidInput("cdf taus must be strictly increasing");
    }
    const std::size_t p = taus.size();
    EstimatingSystem s;
    s.name = "cdf";
    s.r = s.p = p;
    s.target = Vector::Zero(static_cast<Eigen::Index>(p));
    s.values = [taus](const Vector& theta, std::span<const double> lambdas) {
        Matrix out(static_cast<Eigen::Index>(lambdas.size()), static_cast<Eigen::Index>(taus.size()));
        for (std::size_t j = 0; j < lambdas.size(); ++j)
            for (std::size_t k = 0; k < taus.size(); ++k)
                out(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) =
                    (lambdas[j] <= taus[k] ? 1.0 : 0.0) - theta[static_cast<Eigen::Index>(k)];
        return out;
    };
    s.gradient = [p](const Vector&, double) {
        return Matrix(-Matrix::Identity(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p)));
    };
    s.admissible = [](const Vector& theta) { return theta.minCoeff() >= 0.0 && theta.maxCoeff() <= 1.0; };
    s.domain = [taus](const Periodogram& pg) {
        const auto p = static_cast<Eigen::Index>(taus.size());
        SearchDomain d{Vector::Constant(p, 1e-6), Vector::Constant(p, 1.0 - 1e-6), Vector(p)};
        for (Eigen::Index k = 0; k < p; ++k) {
            const double tau = taus[static_cast<std::size_t>(k)];
            d.start[k] = std::clamp(
                detail::ratio_estimate(pg, [tau](double l) { return l <= tau ? 1.0 : 0.0; }), 0.01, 0.99);
        }
        return d;
    };
    for (double t : taus) s.parameter_names.push_back("F(" + std::to_string(t) + ")/F(pi)");
    detail::finish_system(s);
    return s;
}

/// Scale family f_theta = sigma^2 k_shape(lambda) for Whittle-type systems.
struct WhittleFamily {
    std::string name;
    std::size_t shape_dim = 0;
    std::vector<std::string> shape_names;
    std::function<double(const Vector& shape, double lambda)> kernel;
    /// d k^{-1} / d shape.
    std::function<Vector(const Vector& shape, double lambda)> inverse_kernel_gradient;
    /// d^2 k^{-1} / d shape d shape'; empty when only numerical derivatives exist.
    std::function<Matrix(const Vector& shape, double lambda)> inverse_kernel_hessian;
    std::function<bool(const Vector& shape)> admissible;
    Vector shape_lower;
    Vector shape_upper;
    /// Spectral model with scale sigma^2 and the given shape.
    std::function<SpectralModel(double scale, const Vector& shape)> model;

    [[nodiscard]] double inverse_kernel(const Vector& shape, double lambda) const {
        return 1.0 / kernel(shape, lambda);
    }
};

[[nodiscard]] inline WhittleFamily white_family() {
    WhittleFamily f;
    f.name = "white";
    f.kernel = [](const Vector&, double) { return 1.0 / two_pi; };
    f.inverse_kernel_gradient = [](const Vector&, double) { return Vector(0); };
    f.inverse_kernel_hessian = [](const Vector&, double) { return Matrix(0, 0); };
    f.admissible = [](const Vector&) { return true; };
    f.shape_lower = f.shape_upper = Vector(0);
    f.model = [](double scale, const Vector&) { return SpectralModel{WhiteNoise{scale}}; };
    return f;
}

/// AR(1) kernel k_phi = |1 - phi e^{i lambda}|^{-2} / (2 pi); sigma^2 is the innovation variance.
[[nodiscard]] inline WhittleFamily ar1_family() {
    WhittleFamily f;
    f.name = "ar1";
    f.shape_dim = 1;
    f.shape_names = {"phi"};
    f.kernel = [](const Vector& s, double l) {
        return 1.0 / (two_pi * (1.0 + s[0] * s[0] - 2.0 * s[0] * std::cos(l)));
    };
    f.inverse_kernel_gradient = [](const Vector& s, double l) {
        return Vector::Constant(1, two_pi * (2.0 * s[0] - 2.0 * std::cos(l)));
    };
    f.inverse_kernel_hessian = [](const Vector&, double) { return Matrix::Constant(1, 1, 2.0 * two_pi); };
    f.admissible = [](const Vector& s) { return std::abs(s[0]) < 1.0; };
    f.shape_lower = Vector::Constant(1, -0.99);
    f.shape_upper = Vector::Constant(1, 0.99);
    f.model = [](double scale, const Vector& s) { return SpectralModel{Ar1{s[0], scale}}; };
    return f;
}

/// FARIMA(0,d,0) kernel k_d = |1 - e^{i lambda}|^{-2d} / (2 pi).
[[nodiscard]] inline WhittleFamily farima_family() {
    WhittleFamily f;
    f.name = "farima";
    f.shape_dim = 1;
    f.shape_names = {"d"};
    f.kernel = [](const Vector& s, double l) {
        return std::pow(2.0 * std::sin(l / 2.0), -2.0 * s[0]) / two_pi;
    };
    f.inverse_kernel_gradient = [](const Vector& s, double l) {
        const double a = 2.0 * std::sin(l / 2.0);
        return Vector::Constant(1, two_pi * std::pow(a, 2.0 * s[0]) * 2.0 * std::log(a));
    };
    f.inverse_kernel_hessian = [](const Vector& s, double l) {
        const double a = 2.0 * std::sin(l / 2.0);
        const double la = 2.0 * std::log(a);
        return Matrix::Constant(1, 1, two_pi * std::pow(a, 2.0 * s[0]) * la * la);
    };
    f.admissible = [](const Vector& s) { return s[0] > 0.0 && s[0] < 0.5; };
    f.shape_lower = Vector::Constant(1, 0.01);
    f.shape_upper = Vector::Constant(1, 0.49);
    f.model = [](double scale, const Vector& s) { return SpectralModel{Farima{{}, s[0], {}, scale}}; };
    return f;
}

namespace detail {

struct FgnScale {
    double variance;
    /// d log(variance) / dH.
    double dlog;
};

/// Innovation variance v(H) = 2 pi exp((1/pi) int_0^pi log f dlambda) of
/// unit-variance fGn and its log-derivative. lambda = pi u^2 removes the
/// logarithmic singularity at the origin.
inline FgnScale fgn_innovation_scale(double hurst) {
    thread_local double cached_h = std::numeric_limits<double>::quiet_NaN();
    thread_local FgnScale cached{0.0, 0.0};
    if (hurst == cached_h) return cached;
    const SpectralModel m{Fgn{hurst, 1.0}};
    using Quad = boost::math::quadrature::gauss_kronrod<double, 61>;
    auto log_f = [&](double u) { return u <= 0.0 ? 0.0 : std::log(density(m, pi * u * u)) * 2.0 * pi * u; };
    auto dlog_f = [&](double u) {
        return u <= 0.0 ? 0.0 : fgn_log_density_dh(pi * u * u, hurst) * 2.0 * pi * u;
    };
    const double mean_log = Quad::integrate(log_f, 0.0, 1.0, 8, 1e-13) / pi;
    const double mean_dlog = Quad::integrate(dlog_f, 0.0, 1.0, 8, 1e-13) / pi;
    cached_h = hurst;
    cached = {two_pi * std::exp(mean_log), mean_dlog};
    return cached;
}

}  // namespace detail

/// Fractional Gaussian noise kernel scaled to unit innovation variance, so
/// sigma^2 is the innovation variance and int_0^pi log k does not move with H.
[[nodiscard]] inline WhittleFamily fgn_family() {
    WhittleFamily f;
    f.name = "fgn";
    f.shape_dim = 1;
    f.shape_names = {"H"};
    f.kernel = [](const Vector& s, double l) {
        return density(SpectralModel{Fgn{s[0], 1.0}}, l) / detail::fgn_innovation_scale(s[0]).variance;
    };
    f.inverse_kernel_gradient = [k = f.kernel](const Vector& s, double l) {
        const double dlog_v = detail::fgn_innovation_scale(s[0]).dlog;
        return Vector::Constant(1, (dlog_v - detail::fgn_log_density_dh(l, s[0])) / k(s, l));
    };
    f.admissible = [](const Vector& s) { return s[0] > 0.5 && s[0] < 1.0; };
    f.shape_lower = Vector::Constant(1, 0.51);
    f.shape_upper = Vector::Constant(1, 0.99);
    f.model = [](double scale, const Vector& s) {
        return SpectralModel{Fgn{s[0], scale / detail::fgn_innovation_scale(s[0]).variance}};
    };
    return f;
}

[[nodiscard]] inline WhittleFamily whittle_family(std::string_view name) {
    if (name == "white") return white_family();
    if (name == "ar1") return ar1_family();
    if (name == "farima" || name == "farima0") return farima_family();
    if (name == "fgn") return fgn_family();
    throw InvalidInput("unknown model family '" + std::string(name) + "'");
}

namespace detail {

/// Concentrated-Whittle start: grid over one shape coordinate (or the box
/// centre), then sigma^2 = mean_j I_j / k(lambda_j).
inline Vector whittle_start(const WhittleFamily& fam, const Periodogram& pg) {
    auto scale_for = [&](const Vector& shape) {
        double s = 0.0;
        for (std::size_t j = 0; j < pg.size(); ++j) s += pg.ordinates[j] / fam.kernel(shape, pg.frequencies[j]);
        return s / static_cast<double>(pg.size());
    };
    auto objective = [&](const Vector& shape) {
        double lk = 0.0;
        for (std::size_t j = 0; j < pg.size(); ++j) lk += std::log(fam.kernel(shape, pg.frequencies[j]));
        return std::log(scale_for(shape)) + lk / static_cast<double>(pg.size());
    };
    Vector shape = (fam.shape_lower + fam.shape_upper) / 2.0;
    if (fam.shape_dim == 1) {
        constexpr int kGrid = 41;
        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i < kGrid; ++i) {
            Vector s(1);
            s[0] = fam.shape_lower[0] + (fam.shape_upper[0] - fam.shape_lower[0]) * i / (kGrid - 1.0);
            const double v = objective(s);
            if (v < best) best = v, shape = s;
        }
    }
    Vector start(static_cast<Eigen::Index>(fam.shape_dim + 1));
    start[0] = scale_for(shape);
    start.tail(static_cast<Eigen::Index>(fam.shape_dim)) = shape;
    return start;
}

inline std::function<SearchDomain(const Periodogram&)> whittle_domain(const WhittleFamily& fam,
                                                                     bool include_scale) {
    return [fam, include_scale](const Periodogram& pg) {
        const Vector full = whittle_start(fam, pg);
        const auto sd = static_cast<Eigen::Index>(fam.shape_dim);
        if (!include_scale) return SearchDomain{fam.shape_lower, fam.shape_upper, full.tail(sd)};
        SearchDomain d{Vector(sd + 1), Vector(sd + 1), full};
        d.lower[0] = full[0] / 5.0;
        d.upper[0] = full[0] * 5.0;
        d.lower.tail(sd) = fam.shape_lower;
        d.upper.tail(sd) = fam.shape_upper;
        return d;
    };
}

inline bool whittle_admissible(const WhittleFamily& fam, const Vector& theta) {
    return theta[0] > 0.0 && fam.admissible(theta.tail(static_cast<Eigen::Index>(fam.shape_dim)));
}

/// f_theta(lambda_j) with theta = (sigma^2, shape).
inline EstimatingSystem::DensityFn whittle_density(const WhittleFamily& fam) {
    return [fam](const Vector& theta, std::span<const double> lambdas) {
        const Vector shape = theta.tail(static_cast<Eigen::Index>(fam.shape_dim));
        Vector out(static_cast<Eigen::Index>(lambdas.size()));
        for (std::size_t j = 0; j < lambdas.size(); ++j)
            out[static_cast<Eigen::Index>(j)] = theta[0] * fam.kernel(shape, lambdas[j]);
        return out;
    };
}

/// Whittle functions (f^{-1}, d f^{-1}/d shape) at one frequency, theta = (sigma^2, shape).
inline Vector whittle_row(const WhittleFamily& fam, const Vector& theta, double lambda) {
    const auto sd = static_cast<Eigen::Index>(fam.shape_dim);
    const Vector shape = theta.tail(sd);
    Vector g(sd + 1);
    g[0] = 1.0 / (theta[0] * fam.kernel(shape, lambda));
    if (sd > 0) g.tail(sd) = fam.inverse_kernel_gradient(shape, lambda) / theta[0];
    return g;
}

/// Jacobian of whittle_row in (sigma^2, shape).
inline Matrix whittle_row_jacobian(const WhittleFamily& fam, const Vector& theta, double lambda) {
    const auto sd = static_cast<Eigen::Index>(fam.shape_dim);
    const Vector shape = theta.tail(sd);
    const double s2 = theta[0];
    const double kinv = fam.inverse_kernel(shape, lambda);
    Matrix j(sd + 1, sd + 1);
    j(0, 0) = -kinv / (s2 * s2);
    if (sd > 0) {
        const Vector dk = fam.inverse_kernel_gradient(shape, lambda);
        const Matrix hk = fam.inverse_kernel_hessian(shape, lambda);
        j.block(0, 1, 1, sd) = dk.transpose() / s2;
        j.block(1, 0, sd, 1) = -dk / (s2 * s2);
        j.block(1, 1, sd, sd) = hk / s2;
    }
    return j;
}

}  // namespace detail

/// Whittle functions G^w = (f^{-1}, d f^{-1}/d shape) with M_w = (pi, 0, ..., 0), theta = (sigma^2, shape).
[[nodiscard]] inline EstimatingSystem whittle_full_system(const WhittleFamily& fam) {
    const std::size_t p = fam.shape_dim + 1;
    EstimatingSystem s;
    s.name = "whittle:" + fam.name;
    s.r = s.p = p;
    s.target = Vector::Zero(static_cast<Eigen::Index>(p));
    s.target[0] = pi;
    s.values = [fam, p](const Vector& theta, std::span<const double> lambdas) {
        Matrix out(static_cast<Eigen::Index>(lambdas.size()), static_cast<Eigen::Index>(p));
        for (std::size_t j = 0; j < lambdas.size(); ++j)
            out.row(static_cast<Eigen::Index>(j)) = detail::whittle_row(fam, theta, lambdas[j]).transpose();
        return out;
    };
    if (fam.inverse_kernel_hessian)
        s.gradient = [fam](const Vector& theta, double l) { return detail::whittle_row_jacobian(fam, theta, l); };
    s.model_density = detail::whittle_density(fam);
    s.admissible = [fam](const Vector& theta) { return detail::whittle_admissible(fam, theta); };
    s.domain = detail::whittle_domain(fam, true);
    s.parameter_names.push_back("sigma2");
    for (const auto& n : fam.shape_names) s.parameter_names.push_back(n);
    detail::finish_system(s);
    return s;
}

/// Scale-free Whittle functions G^{w*} = d k^{-1}/d shape, M = 0.
[[nodiscard]] inline EstimatingSystem whittle_nuisance_free_system(const WhittleFamily& fam) {
    if (fam.shape_dim == 0) throw InvalidInput("family '" + fam.name + "' has no shape parameters");
    const auto sd = static_cast<Eigen::Index>(fam.shape_dim);
    EstimatingSystem s;
    s.name = "whittle-nf:" + fam.name;
    s.r = s.p = fam.shape_dim;
    s.target = Vector::Zero(sd);
    s.values = [fam, sd](const Vector& theta, std::span<const double> lambdas) {
        Matrix out(static_cast<Eigen::Index>(lambdas.size()), sd);
        for (std::size_t j = 0; j < lambdas.size(); ++j)
            out.row(static_cast<Eigen::Index>(j)) = fam.inverse_kernel_gradient(theta, lambdas[j]).transpose();
        return out;
    };
    if (fam.inverse_kernel_hessian) s.gradient = fam.inverse_kernel_hessian;
    s.admissible = fam.admissible;
    s.domain = detail::whittle_domain(fam, false);
    s.parameter_names = fam.shape_names;
    detail::finish_system(s);
    return s;
}

/// Simple goodness of fit against a fixed density f0: G = 1/f0, M = pi, p = 0.
[[nodiscard]] inline EstimatingSystem gof_simple_system(const SpectralModel& f0) {
    validate(f0);
    EstimatingSystem s;
    s.name = "gof:" + describe(f0);
    s.r = 1;
    s.p = 0;
    s.target = Vector::Constant(1, pi);
    s.values = [f0](const Vector&, std::span<const double> lambdas) {
        Matrix out(static_cast<Eigen::Index>(lambdas.size()), 1);
        for (std::size_t j = 0; j < lambdas.size(); ++j) {
            const double f = density(f0, lambdas[j]);
            if (!(f > 0.0)) throw InvalidInput("gof: f0 must be positive at every Fourier frequency");
            out(static_cast<Eigen::Index>(j), 0) = 1.0 / f;
        }
        return out;
    };
    s.gradient = [](const Vector&, double) { return Matrix(1, 0); };
    s.model_density = [f0](const Vector&, std::span<const double> lambdas) {
        Vector out(static_cast<Eigen::Index>(lambdas.size()));
        for (std::size_t j = 0; j < lambdas.size(); ++j) out[static_cast<Eigen::Index>(j)] = density(f0, lambdas[j]);
        return out;
    };
    s.domain = [](const Periodogram&) { return SearchDomain{Vector(0), Vector(0), Vector(0)}; };
    detail::finish_system(s);
    return s;
}

/// White-noise portmanteau system G = (cos lambda, ..., cos m lambda)', M = 0, p = 0.
[[nodiscard]] inline EstimatingSystem white_noise_autocorrelation_system(int max_lag) {
    if (max_lag < 1) throw InvalidInput("portmanteau system needs max_lag >= 1");
    const auto m = static_cast<Eigen::Index>(max_lag);
    EstimatingSystem s;
    s.name = "portmanteau:" + std::to_string(max_lag);
    s.r = static_cast<std::size_t>(max_lag);
    s.p = 0;
    s.target = Vector::Zero(m);
    s.values = [m](const Vector&, std::span<const double> lambdas) {
        Matrix out(static_cast<Eigen::Index>(lambdas.size()), m);
        for (std::size_t j = 0; j < lambdas.size(); ++j)
            for (Eigen::Index k = 0; k < m; ++k)
                out(static_cast<Eigen::Index>(j), k) = std::cos(static_cast<double>(k + 1) * lambdas[j]);
        return out;
    };
    s.gradient = [m](const Vector&, double) { return Matrix(m, 0); };
    s.domain = [](const Periodogram&) { return SearchDomain{Vector(0), Vector(0), Vector(0)}; };
    detail::finish_system(s);
    return s;
}

/// Composite goodness of fit: (f_theta^{-2}, G^w)' with target (pi, M_w), r = p + 1.
/// The first component is paired with I_n^2 / 2 by the squared-moment variant.
[[nodiscard]] inline EstimatingSystem gof_composite_system(const WhittleFamily& fam) {
    const std::size_t p = fam.shape_dim + 1;
    const auto pe = static_cast<Eigen::Index>(p);
    EstimatingSystem s;
    s.name = "gof-composite:" + fam.name;
    s.p = p;
    s.r = p + 1;
    s.target = Vector::Zero(pe + 1);
    s.target[0] = pi;
    s.target[1] = pi;
    s.squared_moment = true;
    s.values = [fam, pe](const Vector& theta, std::span<const double> lambdas) {
        Matrix out(static_cast<Eigen::Index>(lambdas.size()), pe + 1);
        for (std::size_t j = 0; j < lambdas.size(); ++j) {
            const Vector g = detail::whittle_row(fam, theta, lambdas[j]);
            const auto row = static_cast<Eigen::Index>(j);
            out(row, 0) = g[0] * g[0];
            out.block(row, 1, 1, pe) = g.transpose();
        }
        return out;
    };
    if (fam.inverse_kernel_hessian)
        s.gradient = [fam, pe](const Vector& theta, double l) {
            const Vector g = detail::whittle_row(fam, theta, l);
            const Matrix jw = detail::whittle_row_jacobian(fam, theta, l);
            Matrix jac(pe + 1, pe);
            jac.row(0) = 2.0 * g[0] * jw.row(0);
            jac.bottomRows(pe) = jw;
            return jac;
        };
    s.model_density = detail::whittle_density(fam);
    s.admissible = [fam](const Vector& theta) { return detail::whittle_admissible(fam, theta); };
    s.domain = detail::whittle_domain(fam, true);
    s.parameter_names.push_back("sigma2");
    for (const auto& n : fam.shape_names) s.parameter_names.push_back(n);
    detail::finish_system(s);
    return s;
}

/** Parse the command-line system grammar:
 *
 *     acf:1,2,5            autocorrelations at the listed lags
 *     acf-ar1:K            (cos k lambda - theta^k)_{k=1..K}, one parameter
 *     cdf:0.5,1.0          normalized spectral distribution at the listed taus
 *     whittle:FAMILY       G^w with theta = (sigma^2, shape)
 *     whittle-nf:FAMILY    scale-free G^{w*}
 *     gof:MODEL            simple goodness of fit against MODEL (model grammar)
 *     portmanteau:m        white-noise test pooling lags 1..m
 *     gof-composite:FAMILY composite goodness of fit
 *
 * FAMILY is one of white, ar1, farima, fgn.
 */
[[nodiscard]] inline EstimatingSystem parse_system(std::string_view text) {
    const auto spec = detail::trim(text);
    const auto colon = spec.find(':');
    if (colon == std::string_view::npos) throw InvalidInput("system '" + std::string(spec) + "' lacks ':'");
    const auto kind = detail::trim(spec.substr(0, colon));
    const auto args = detail::trim(spec.substr(colon + 1));
    auto integers = [&](std::string_view a) {
        std::vector<int> out;
        for (double v : detail::parse_numbers(a, spec)) {
            if (v != std::floor(v)) throw InvalidInput("expected integers in '" + std::string(spec) + "'");
            out.push_back(static_cast<int>(v));
        }
        return out;
    };
    if (kind == "acf") return autocorrelation_system(integers(args));
    if (kind == "acf-ar1") {
        const auto k = integers(args);
        if (k.size() != 1) throw InvalidInput("acf-ar1 expects a single max lag");
        return geometric_acf_system(k[0]);
    }
    if (kind == "cdf") return spectral_cdf_system(detail::parse_numbers(args, spec));
    if (kind == "whittle") return whittle_full_system(whittle_family(args));
    if (kind == "whittle-nf") return whittle_nuisance_free_system(whittle_family(args));
    if (kind == "gof") return gof_simple_system(parse_model(args));
    if (kind == "portmanteau") {
        const auto k = integers(args);
        if (k.size() != 1) throw InvalidInput("portmanteau expects a single max lag");
        return white_noise_autocorrelation_system(k[0]);
    }
    if (kind == "gof-composite") return gof_composite_system(whittle_family(args));
    throw InvalidInput("unknown system kind '" + std::string(kind) + "'");
}

}  // namespace fdel
