#pragma once

#include <cmath>
#include <limits>

#include <boost/math/special_functions/gamma.hpp>

#include "fdel/error.hpp"

namespace fdel {

/// P(X <= x) for X ~ chi^2_df.
[[nodiscard]] inline double chi_square_cdf(double df, double x) {
    if (!(df > 0.0)) throw InvalidRequest("chi-square needs df > 0");
    if (!(x > 0.0)) return 0.0;
    if (std::isinf(x)) return 1.0;
    return boost::math::gamma_p(df / 2.0, x / 2.0);
}

/// P(X > x); exact in the upper tail rather than 1 - cdf.
[[nodiscard]] inline double chi_square_sf(double df, double x) {
    if (!(df > 0.0)) throw InvalidRequest("chi-square needs df > 0");
    if (std::isnan(x)) return std::numeric_limits<double>::quiet_NaN();
    if (!(x > 0.0)) return 1.0;
    if (std::isinf(x)) return 0.0;
    return boost::math::gamma_q(df / 2.0, x / 2.0);
}

/// q with P(X <= q) = prob.
[[nodiscard]] inline double chi_square_quantile(double df, double prob) {
    if (!(df > 0.0)) throw InvalidRequest("chi-square needs df > 0");
    if (!(prob >= 0.0 && prob <= 1.0)) throw InvalidInput("probability must lie in [0, 1]");
    if (prob == 0.0) return 0.0;
    if (prob == 1.0) return std::numeric_limits<double>::infinity();
    return 2.0 * boost::math::gamma_p_inv(df / 2.0, prob);
}

}  // namespace fdel
