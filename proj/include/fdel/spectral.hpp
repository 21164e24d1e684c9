#pragma once

/** @file
 * Fourier-frequency grid, discrete Fourier transform and periodogram.
 *
 * Only the ordinates at lambda_j = 2*pi*j/n for j = 1..N, N = floor((n-1)/2),
 * are ever formed. The zero frequency and (for even n) the Nyquist frequency
 * are excluded, so the periodogram is blind to the sample mean and no
 * explicit mean correction is applied.
 */

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fdel/detail/fft.hpp"
#include "fdel/error.hpp"

namespace fdel {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Number of usable Fourier frequencies for a series of length n.
[[nodiscard]] constexpr std::size_t fourier_count(std::size_t n) noexcept {
    return n >= 1 ? (n - 1) / 2 : 0;
}

/// Real-valued observations x_1..x_n with n >= 4 and every value finite.
class TimeSeries {
public:
    explicit TimeSeries(std::vector<double> values) : values_(std::move(values)) {
        if (values_.size() < 4)
            throw InvalidInput("time series needs at least 4 observations, got " +
                               std::to_string(values_.size()));
        for (std::size_t i = 0; i < values_.size(); ++i)
            if (!std::isfinite(values_[i]))
                throw InvalidInput("non-finite observation at index " + std::to_string(i));
        double s = 0.0;
        for (double v : values_) s += v;
        mean_ = s / static_cast<double>(values_.size());
    }

    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    [[nodiscard]] double mean() const noexcept { return mean_; }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }

private:
    std::vector<double> values_;
    double mean_ = 0.0;
};

/// Periodogram ordinates I_n(lambda_j), j = 1..N.
struct Periodogram {
    std::size_t n = 0;
    std::vector<double> frequencies;
    std::vector<double> ordinates;

    [[nodiscard]] std::size_t size() const noexcept { return ordinates.size(); }
};

[[nodiscard]] inline std::vector<double> fourier_frequencies(std::size_t n) {
    if (n < 4) throw InvalidInput("fourier_frequencies: n must be >= 4, got " + std::to_string(n));
    const std::size_t count = fourier_count(n);
    std::vector<double> out(count);
    for (std::size_t j = 1; j <= count; ++j)
        out[j - 1] = two_pi * static_cast<double>(j) / static_cast<double>(n);
    return out;
}

/// Sum_{t=1}^n x_t exp(-i t lambda), evaluated directly.
[[nodiscard]] inline std::complex<double> dft(std::span<const double> x, double lambda) {
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t t = 1; t <= x.size(); ++t) {
        const double arg = static_cast<double>(t) * lambda;
        acc += x[t - 1] * std::complex<double>(std::cos(arg), -std::sin(arg));
    }
    return acc;
}

/// I_n(lambda_j) = |sum_t x_t e^{-i t lambda_j}|^2 / (2 pi n), via FFT.
[[nodiscard]] inline Periodogram periodogram(const TimeSeries& x) {
    const std::size_t n = x.size();
    const auto bins = detail::rfft(x.values());
    Periodogram out;
    out.n = n;
    out.frequencies = fourier_frequencies(n);
    out.ordinates.resize(out.frequencies.size());
    const double scale = 1.0 / (two_pi * static_cast<double>(n));
    for (std::size_t j = 1; j <= out.ordinates.size(); ++j) {
        const double v = std::norm(bins[j]) * scale;
        out.ordinates[j - 1] = v < 0.0 ? 0.0 : v;
    }
    return out;
}

/// Periodogram from externally supplied ordinates (constructed inputs, tests).
[[nodiscard]] inline Periodogram periodogram_from_ordinates(std::size_t n,
                                                            std::vector<double> ordinates) {
    Periodogram out;
    out.n = n;
    out.frequencies = fourier_frequencies(n);
    if (ordinates.size() != out.frequencies.size())
        throw InvalidInput("expected " + std::to_string(out.frequencies.size()) +
                           " ordinates for n = " + std::to_string(n));
    for (double& v : ordinates) {
        if (!std::isfinite(v) || v < -1e-12) throw InvalidInput("ordinates must be finite and >= 0");
        if (v < 0.0) v = 0.0;
    }
    out.ordinates = std::move(ordinates);
    return out;
}

}  // namespace fdel
