#pragma once

/** @file
 * Parametric spectral densities, their autocovariances, and Gaussian /
 * linear-process simulators.
 *
 * Conventions. Densities live on [-pi, pi] and integrate to the process
 * variance: r(k) = int_{-pi}^{pi} cos(k lambda) f(lambda) d lambda.
 * ARMA-type models are written
 *
 *     (1 - sum_k ar_k B^k) (1 - B)^d X_t = (1 + sum_k ma_k B^k) eps_t,
 *
 * with innovation variance `variance`, so
 * f(lambda) = variance / (2 pi) |1 - e^{i lambda}|^{-2d} |ma(e^{i lambda})|^2 / |ar(e^{i lambda})|^2.
 * White noise and fractional Gaussian noise are parametrized by the process
 * variance r(0) instead.
 */

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/special_functions/digamma.hpp>

#include "fdel/detail/fft.hpp"
#include "fdel/detail/random.hpp"
#include "fdel/error.hpp"
#include "fdel/spectral.hpp"

namespace fdel {

struct WhiteNoise {
    double variance = 1.0;
};

struct Ar1 {
    double phi = 0.0;
    double variance = 1.0;
};

struct Arma {
    std::vector<double> ar;
    std::vector<double> ma;
    double variance = 1.0;
};

struct Farima {
    std::vector<double> ar;
    double d = 0.0;
    std::vector<double> ma;
    double variance = 1.0;
};

struct Fgn {
    double hurst = 0.5;
    double variance = 1.0;
};

struct SpectralModel {
    std::variant<WhiteNoise, Ar1, Arma, Farima, Fgn> kind;
    /// Fourth-order innovation cumulant; metadata only, 0 for Gaussian paths.
    double kappa4 = 0.0;
};

/// r(0..K) of a stationary model.
struct AutocovarianceSequence {
    std::vector<double> values;

    [[nodiscard]] double operator[](std::size_t k) const { return values[k]; }
    [[nodiscard]] std::size_t max_lag() const noexcept { return values.empty() ? 0 : values.size() - 1; }
};

namespace detail {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

/// Largest root modulus of z^m + c_1 z^{m-1} + ... + c_m.
inline double max_root_modulus(std::span<const double> c) {
    const auto m = static_cast<Eigen::Index>(c.size());
    if (m == 0) return 0.0;
    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index j = 0; j < m; ++j) comp(0, j) = -c[static_cast<std::size_t>(j)];
    for (Eigen::Index i = 1; i < m; ++i) comp(i, i - 1) = 1.0;
    Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

inline void check_finite_positive(double v, const char* what) {
    if (!std::isfinite(v) || v <= 0.0) throw InvalidInput(std::string(what) + " must be positive");
}

inline void check_arma_polynomials(std::span<const double> ar, std::span<const double> ma) {
    for (double a : ar)
        if (!std::isfinite(a)) throw InvalidInput("non-finite AR coefficient");
    for (double b : ma)
        if (!std::isfinite(b)) throw InvalidInput("non-finite MA coefficient");
    // Roots of 1 - sum ar_k z^k lie outside the unit circle iff the reciprocal
    // polynomial z^p - ar_1 z^{p-1} - ... - ar_p has all roots inside it.
    std::vector<double> neg_ar(ar.size());
    std::transform(ar.begin(), ar.end(), neg_ar.begin(), [](double a) { return -a; });
    if (max_root_modulus(neg_ar) >= 1.0 - 1e-12)
        throw InvalidInput("AR polynomial is not stationary (root on or inside the unit circle)");
    if (max_root_modulus(ma) >= 1.0 - 1e-12)
        throw InvalidInput("MA polynomial is not invertible (root on or inside the unit circle)");
}

/// |1 + sum_k c_k s e^{i k lambda}|^2 with s = +1 (MA) or -1 (AR).
inline double poly_gain(std::span<const double> coeffs, double sign, double lambda) {
    std::complex<double> acc{1.0, 0.0};
    for (std::size_t k = 0; k < coeffs.size(); ++k)
        acc += sign * coeffs[k] * std::polar(1.0, static_cast<double>(k + 1) * lambda);
    return std::norm(acc);
}

/// MA(infinity) weights psi_0..psi_{count-1} of ma(B)/ar(B).
inline std::vector<double> arma_psi(std::span<const double> ar, std::span<const double> ma,
                                    std::size_t count) {
    std::vector<double> psi(count, 0.0);
    if (count == 0) return psi;
    psi[0] = 1.0;
    for (std::size_t j = 1; j < count; ++j) {
        double v = j <= ma.size() ? ma[j - 1] : 0.0;
        for (std::size_t i = 1; i <= std::min(j, ar.size()); ++i) v += ar[i - 1] * psi[j - i];
        psi[j] = v;
    }
    return psi;
}

/// Number of psi weights needed before the geometric tail drops below ~1e-17.
inline std::size_t arma_psi_length(std::span<const double> ar, std::span<const double> ma) {
    std::vector<double> neg_ar(ar.size());
    std::transform(ar.begin(), ar.end(), neg_ar.begin(), [](double a) { return -a; });
    const double rho = max_root_modulus(neg_ar);
    std::size_t len = ma.size() + ar.size() + 1;
    if (rho > 0.0) {
        const double steps = std::log(1e-17) / std::log(rho);
        len += static_cast<std::size_t>(std::min(steps, 2.0e5)) + 32;
    }
    return len;
}

/// Unit-innovation ARMA autocovariance c(0..max_lag).
inline std::vector<double> arma_unit_acvf(std::span<const double> ar, std::span<const double> ma,
                                          std::size_t max_lag) {
    const std::size_t len = arma_psi_length(ar, ma);
    const auto psi = arma_psi(ar, ma, len + max_lag + 1);
    std::vector<double> c(max_lag + 1, 0.0);
    for (std::size_t k = 0; k <= max_lag; ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i + k < psi.size(); ++i) s += psi[i] * psi[i + k];
        c[k] = s;
    }
    return c;
}

/// FARIMA(0,d,0) autocovariance with unit innovation variance.
inline std::vector<double> fractional_acvf(double d, std::size_t max_lag) {
    std::vector<double> r(max_lag + 1);
    r[0] = std::exp(std::lgamma(1.0 - 2.0 * d) - 2.0 * std::lgamma(1.0 - d));
    for (std::size_t k = 0; k < max_lag; ++k) {
        const double kk = static_cast<double>(k);
        r[k + 1] = r[k] * (kk + d) / (kk + 1.0 - d);
    }
    return r;
}

/// sin^2(lambda/2) sum_{k in Z} |x + k|^{-1-2H}, x = lambda / (2 pi) in (0, 1/2].
/// The sum is truncated at |k| <= 200 with a midpoint-rule integral for the
/// two tails; the k = 0 term is formed in logs so tiny lambda does not give 0 * inf.
inline double fgn_aliased_sum(double lambda, double hurst) {
    constexpr int kTerms = 200;
    const double x = lambda / two_pi;
    const double e = -1.0 - 2.0 * hurst;
    const double s = std::sin(lambda / 2.0);
    double rest = 0.0;
    for (int k = 1; k <= kTerms; ++k) rest += std::pow(k + x, e) + std::pow(k - x, e);
    const double edge = kTerms + 0.5;
    rest += (std::pow(edge + x, -2.0 * hurst) + std::pow(edge - x, -2.0 * hurst)) / (2.0 * hurst);
    return std::exp(2.0 * std::log(s) + e * std::log(x)) + s * s * rest;
}

}  // namespace detail

[[nodiscard]] inline bool is_long_memory(const SpectralModel& model) {
    return std::holds_alternative<Farima>(model.kind) || std::holds_alternative<Fgn>(model.kind);
}

/// Throws InvalidInput unless the parameters describe a stationary model.
inline void validate(const SpectralModel& model) {
    std::visit(detail::overloaded{
                   [](const WhiteNoise& m) { detail::check_finite_positive(m.variance, "variance"); },
                   [](const Ar1& m) {
                       detail::check_finite_positive(m.variance, "variance");
                       if (!(std::abs(m.phi) < 1.0)) throw InvalidInput("ar1 requires |phi| < 1");
                   },
                   [](const Arma& m) {
                       detail::check_finite_positive(m.variance, "variance");
                       detail::check_arma_polynomials(m.ar, m.ma);
                   },
                   [](const Farima& m) {
                       detail::check_finite_positive(m.variance, "variance");
                       if (!(m.d > 0.0 && m.d < 0.5)) throw InvalidInput("farima requires 0 < d < 1/2");
                       detail::check_arma_polynomials(m.ar, m.ma);
                   },
                   [](const Fgn& m) {
                       detail::check_finite_positive(m.variance, "variance");
                       if (!(m.hurst > 0.5 && m.hurst < 1.0)) throw InvalidInput("fgn requires 1/2 < H < 1");
                   }},
               model.kind);
    if (!std::isfinite(model.kappa4)) throw InvalidInput("kappa4 must be finite");
}

/// Spectral density f(lambda) for |lambda| <= pi.
[[nodiscard]] inline double density(const SpectralModel& model, double lambda) {
    lambda = std::abs(lambda);
    if (!(lambda <= pi + 1e-12)) throw InvalidInput("density: frequency outside [-pi, pi]");
    if (lambda == 0.0 && is_long_memory(model))
        throw PoleError("density: long-memory spectral density diverges at frequency 0");
    return std::visit(
        detail::overloaded{
            [](const WhiteNoise& m) { return m.variance / two_pi; },
            [lambda](const Ar1& m) {
                return m.variance / two_pi / (1.0 + m.phi * m.phi - 2.0 * m.phi * std::cos(lambda));
            },
            [lambda](const Arma& m) {
                return m.variance / two_pi * detail::poly_gain(m.ma, 1.0, lambda) /
                       detail::poly_gain(m.ar, -1.0, lambda);
            },
            [lambda](const Farima& m) {
                const double diff = 2.0 * std::sin(lambda / 2.0);  // |1 - e^{i lambda}|
                return m.variance / two_pi * std::pow(diff, -2.0 * m.d) *
                       detail::poly_gain(m.ma, 1.0, lambda) / detail::poly_gain(m.ar, -1.0, lambda);
            },
            [lambda](const Fgn& m) {
                // Normalized so that the density integrates to the variance of
                // the increments; the Gamma(2H+1) constant is what makes that so.
                const double h = m.hurst;
                const double c = 4.0 * m.variance * std::tgamma(2.0 * h + 1.0) * std::sin(pi * h) /
                                 std::pow(two_pi, 2.0 * h + 2.0);
                return c * detail::fgn_aliased_sum(lambda, h);
            }},
        model.kind);
}

/// Autocovariances r(0..max_lag).
[[nodiscard]] inline AutocovarianceSequence autocovariance(const SpectralModel& model,
                                                           std::size_t max_lag) {
    validate(model);
    std::vector<double> r(max_lag + 1, 0.0);
    std::visit(
        detail::overloaded{
            [&](const WhiteNoise& m) { r[0] = m.variance; },
            [&](const Ar1& m) {
                double v = m.variance / (1.0 - m.phi * m.phi);
                for (std::size_t k = 0; k <= max_lag; ++k, v *= m.phi) r[k] = v;
            },
            [&](const Arma& m) {
                const auto c = detail::arma_unit_acvf(m.ar, m.ma, max_lag);
                for (std::size_t k = 0; k <= max_lag; ++k) r[k] = m.variance * c[k];
            },
            [&](const Farima& m) {
                if (m.ar.empty() && m.ma.empty()) {
                    const auto f = detail::fractional_acvf(m.d, max_lag);
                    for (std::size_t k = 0; k <= max_lag; ++k) r[k] = m.variance * f[k];
                    return;
                }
                // Filter the fractional part with the ARMA kernel:
                // r(k) = sum_h c(h) r_d(k + h), c the unit ARMA autocovariance.
                const std::size_t width = detail::arma_psi_length(m.ar, m.ma);
                const auto c = detail::arma_unit_acvf(m.ar, m.ma, width);
                const auto f = detail::fractional_acvf(m.d, max_lag + width);
                for (std::size_t k = 0; k <= max_lag; ++k) {
                    double s = c[0] * f[k];
                    for (std::size_t h = 1; h <= width; ++h) {
                        const std::size_t below = k >= h ? k - h : h - k;
                        s += c[h] * (f[k + h] + f[below]);
                    }
                    r[k] = m.variance * s;
                }
            },
            [&](const Fgn& m) {
                const double two_h = 2.0 * m.hurst;
                for (std::size_t k = 0; k <= max_lag; ++k) {
                    const double kk = static_cast<double>(k);
                    r[k] = 0.5 * m.variance *
                           (std::pow(kk + 1.0, two_h) - 2.0 * std::pow(kk, two_h) +
                            std::pow(std::abs(kk - 1.0), two_h));
                }
            }},
        model.kind);
    return AutocovarianceSequence{std::move(r)};
}

/// MA(infinity) weights b_0..b_m (b_0 = 1) for models with a linear representation.
[[nodiscard]] inline std::vector<double> ma_weights(const SpectralModel& model, std::size_t m) {
    validate(model);
    return std::visit(
        detail::overloaded{
            [&](const WhiteNoise&) { return std::vector<double>{1.0}; },
            [&](const Ar1& a) {
                std::vector<double> b(m + 1);
                double v = 1.0;
                for (auto& x : b) x = v, v *= a.phi;
                return b;
            },
            [&](const Arma& a) { return detail::arma_psi(a.ar, a.ma, m + 1); },
            [&](const Farima& a) {
                std::vector<double> frac(m + 1);
                frac[0] = 1.0;
                for (std::size_t k = 1; k <= m; ++k)
                    frac[k] = frac[k - 1] * (static_cast<double>(k) - 1.0 + a.d) / static_cast<double>(k);
                const auto psi = detail::arma_psi(a.ar, a.ma, m + 1);
                std::vector<double> b(m + 1, 0.0);
                for (std::size_t k = 0; k <= m; ++k)
                    for (std::size_t i = 0; i <= k; ++i) b[k] += psi[i] * frac[k - i];
                return b;
            },
            [&](const Fgn&) -> std::vector<double> {
                throw InvalidRequest("fgn has no closed-form moving-average representation");
            }},
        model.kind);
}

namespace detail {

/// d log f / d H for fractional Gaussian noise at fixed variance, lambda in (0, pi].
inline double fgn_log_density_dh(double lambda, double hurst) {
    constexpr int kTerms = 200;
    const double x = lambda / two_pi;
    const double e = -1.0 - 2.0 * hurst;
    // Work relative to the k = 0 term so small lambda stays finite.
    double sum = 1.0, dsum = -2.0 * std::log(x);
    auto add = [&](double a) {
        const double w = std::exp(e * (std::log(a) - std::log(x)));
        sum += w;
        dsum += -2.0 * std::log(a) * w;
    };
    for (int k = 1; k <= kTerms; ++k) {
        add(k + x);
        add(k - x);
    }
    for (double a : {kTerms + 0.5 + x, kTerms + 0.5 - x}) {
        const double g = std::exp(-2.0 * hurst * std::log(a) - e * std::log(x)) / (2.0 * hurst);
        sum += g;
        dsum -= g * (2.0 * std::log(a) + 1.0 / hurst);
    }
    const double dlogc = 2.0 * boost::math::digamma(2.0 * hurst + 1.0) + pi / std::tan(pi * hurst) -
                         2.0 * std::log(two_pi);
    return dlogc + dsum / sum;
}

}  // namespace detail

/// Innovation variance of the linear representation (models with ma_weights).
[[nodiscard]] inline double innovation_variance(const SpectralModel& model) {
    return std::visit(detail::overloaded{[](const Fgn&) -> double {
                                             throw InvalidRequest("fgn has no innovation variance");
                                         },
                                         [](const auto& m) { return m.variance; }},
                      model.kind);
}

/// Exact stationary Gaussian sampler by circulant embedding of r(0..n).
///
/// The embedding size starts at 2n and doubles (up to 16n) until the
/// circulant eigenvalues are nonnegative to within 1e-10 of the largest.
class GaussianSampler {
public:
    GaussianSampler(const SpectralModel& model, std::size_t n) : n_(n) {
        if (n < 4) throw InvalidInput("simulate: n must be >= 4");
        validate(model);
        for (std::size_t m = 2 * n; m <= 16 * n; m *= 2) {
            const auto r = autocovariance(model, m / 2);
            std::vector<std::complex<double>> row(m);
            for (std::size_t k = 0; k < m; ++k) row[k] = r[std::min(k, m - k)];
            const auto eig = detail::fft(row, FFTW_FORWARD);
            double top = 0.0, low = 0.0;
            for (const auto& e : eig) top = std::max(top, e.real()), low = std::min(low, e.real());
            if (low < -1e-10 * top) continue;
            scale_.resize(m);
            for (std::size_t k = 0; k < m; ++k)
                scale_[k] = std::sqrt(std::max(eig[k].real(), 0.0) / static_cast<double>(m));
            return;
        }
        throw EmbeddingFailure("circulant embedding has negative eigenvalues up to size 16n");
    }

    [[nodiscard]] std::size_t embedding_size() const noexcept { return scale_.size(); }

    [[nodiscard]] TimeSeries sample(std::uint64_t seed) const {
        auto rng = detail::make_rng(seed);
        std::normal_distribution<double> normal;
        std::vector<std::complex<double>> w(scale_.size());
        for (std::size_t k = 0; k < w.size(); ++k) {
            const double re = normal(rng);
            const double im = normal(rng);
            w[k] = scale_[k] * std::complex<double>(re, im);
        }
        const auto y = detail::fft(w, FFTW_BACKWARD);
        std::vector<double> x(n_);
        for (std::size_t t = 0; t < n_; ++t) x[t] = y[t].real();
        return TimeSeries(std::move(x));
    }

private:
    std::size_t n_;
    std::vector<double> scale_;
};

[[nodiscard]] inline TimeSeries simulate_gaussian(const SpectralModel& model, std::size_t n,
                                                  std::uint64_t seed) {
    return GaussianSampler(model, n).sample(seed);
}

enum class InnovationKind { gaussian, chi_square };

/// Innovation law for linear simulation. The chi-square family is chi2(1)
/// centered and rescaled to the requested variance (kappa4 = 12 variance^2).
struct InnovationSpec {
    double variance = 1.0;
    InnovationKind kind = InnovationKind::gaussian;

    [[nodiscard]] double kappa4() const noexcept {
        return kind == InnovationKind::chi_square ? 12.0 * variance * variance : 0.0;
    }
};

/// X_t = sum_{j=0}^m b_j eps_{t-j}; the first m innovations only feed the filter.
[[nodiscard]] inline TimeSeries simulate_linear(std::span<const double> coeffs,
                                                const InnovationSpec& innovations, std::size_t n,
                                                std::uint64_t seed) {
    if (coeffs.empty() || coeffs[0] != 1.0) throw InvalidInput("simulate_linear: b_0 must equal 1");
    if (!(innovations.variance > 0.0)) throw InvalidInput("simulate_linear: variance must be positive");
    if (n < 4) throw InvalidInput("simulate_linear: n must be >= 4");
    const std::size_t m = coeffs.size() - 1;
    auto rng = detail::make_rng(seed);
    const double sd = std::sqrt(innovations.variance);
    std::vector<double> eps(n + m);
    if (innovations.kind == InnovationKind::gaussian) {
        std::normal_distribution<double> normal(0.0, sd);
        for (double& e : eps) e = normal(rng);
    } else {
        std::normal_distribution<double> normal;
        for (double& e : eps) {
            const double z = normal(rng);
            e = sd * (z * z - 1.0) / std::sqrt(2.0);
        }
    }
    std::vector<double> x(n, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
        double s = 0.0;
        for (std::size_t j = 0; j <= m; ++j) s += coeffs[j] * eps[t + m - j];
        x[t] = s;
    }
    return TimeSeries(std::move(x));
}

}  // namespace fdel
