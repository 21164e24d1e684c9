#pragma once

// Thin RAII layer over FFTW. The FFTW planner is not reentrant, so plan
// creation and destruction are serialized; execution is not.

#include <complex>
#include <mutex>
#include <span>
#include <vector>

#include <fftw3.h>

namespace fdel::detail {

inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

class FftPlan {
public:
    FftPlan(const FftPlan&) = delete;
    FftPlan& operator=(const FftPlan&) = delete;
    ~FftPlan() {
        if (plan_) {
            std::lock_guard lock(fftw_planner_mutex());
            fftw_destroy_plan(plan_);
        }
    }

    void execute() const { fftw_execute(plan_); }

    static FftPlan real_forward(std::span<double> in, std::span<std::complex<double>> out) {
        std::lock_guard lock(fftw_planner_mutex());
        return FftPlan(fftw_plan_dft_r2c_1d(static_cast<int>(in.size()), in.data(),
                                            reinterpret_cast<fftw_complex*>(out.data()),
                                            FFTW_ESTIMATE));
    }

    static FftPlan complex(std::span<std::complex<double>> in,
                           std::span<std::complex<double>> out, int sign) {
        std::lock_guard lock(fftw_planner_mutex());
        return FftPlan(fftw_plan_dft_1d(static_cast<int>(in.size()),
                                        reinterpret_cast<fftw_complex*>(in.data()),
                                        reinterpret_cast<fftw_complex*>(out.data()), sign,
                                        FFTW_ESTIMATE));
    }

private:
    explicit FftPlan(fftw_plan p) : plan_(p) {}
    fftw_plan plan_ = nullptr;
};

/// Unnormalized forward transform of a real sequence; returns bins 0..n/2.
inline std::vector<std::complex<double>> rfft(std::span<const double> x) {
    std::vector<double> in(x.begin(), x.end());
    std::vector<std::complex<double>> out(x.size() / 2 + 1);
    auto plan = FftPlan::real_forward(in, out);
    plan.execute();
    return out;
}

/// Unnormalized complex transform; sign = FFTW_FORWARD (e^{-i..}) or FFTW_BACKWARD.
inline std::vector<std::complex<double>> fft(std::span<const std::complex<double>> x, int sign) {
    std::vector<std::complex<double>> in(x.begin(), x.end());
    std::vector<std::complex<double>> out(x.size());
    auto plan = FftPlan::complex(in, out, sign);
    plan.execute();
    return out;
}

}  // namespace fdel::detail
