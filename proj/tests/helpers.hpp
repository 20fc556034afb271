#pragma once

#include <cmath>
#include <functional>

#include "coex/distributions.hpp"
#include "coex/market.hpp"

namespace testutil {

/// Adaptive Simpson quadrature, the independent oracle for distribution
/// integrals. Never touches the cdf under test.
inline double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa,
                          double fm, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-11) {
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_rec(f, a, b, fa, fm, fb, whole, tol, 40);
}

/// Raw (unnormalized) standard normal density for truncated-normal oracles.
inline double normal_density(double x, double mean, double stdev) {
    const double z = (x - mean) / stdev;
    return std::exp(-0.5 * z * z) / (stdev * std::sqrt(2.0 * M_PI));
}

inline double rel_diff(double a, double b) {
    return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

inline coex::MarketParams baseline_params(double Q = 30, double alpha = 0.5, double c = 50,
                                       double beta = 0, double V2 = 3000) {
    return coex::MarketParams(1e5, 3000, V2, 1000, Q, alpha, c, beta);
}

}  // namespace testutil
