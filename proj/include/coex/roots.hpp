#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

namespace coex {

inline constexpr double kRootTol = 1e-13;

/// Bisection on [lo, hi]. Requires f(lo) and f(hi) of opposite (or zero) sign.
/// Returns the midpoint of the final bracket of width <= xtol.
template <typename F>
double bisect(F&& f, double lo, double hi, double xtol = kRootTol) {
    double flo = f(lo);
    if (flo == 0.0) return lo;
    double fhi = f(hi);
    if (fhi == 0.0) return hi;
    for (int it = 0; it < 200 && hi - lo > xtol; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

/// Sign-scan root isolation: evaluates f on a uniform grid of the given step
/// and returns one bracket per sign change. NaN evaluations break the chain
/// (used for points where a candidate family is infeasible).
template <typename F>
std::vector<std::pair<double, double>> scan_sign_changes(F&& f, double lo, double hi, double step) {
    std::vector<std::pair<double, double>> brackets;
    double xprev = lo;
    double fprev = f(lo);
    const long n = static_cast<long>(std::ceil((hi - lo) / step));
    for (long i = 1; i <= n; ++i) {
        const double x = (i == n) ? hi : lo + static_cast<double>(i) * step;
        const double fx = f(x);
        if (std::isnan(fprev) || std::isnan(fx)) {
            xprev = x;
            fprev = fx;
            continue;
        }
        if (fprev == 0.0)
            brackets.emplace_back(xprev, xprev);
        else if ((fprev < 0.0 && fx > 0.0) || (fprev > 0.0 && fx < 0.0))
            brackets.emplace_back(xprev, x);
        xprev = x;
        fprev = fx;
    }
    if (!std::isnan(fprev) && fprev == 0.0) brackets.emplace_back(xprev, xprev);
    return brackets;
}

/// Golden-section maximization of a unimodal function on [lo, hi].
/// Returns (argmax, max).
template <typename F>
std::pair<double, double> golden_max(F&& f, double lo, double hi, double xtol) {
    static const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double x1 = b - invphi * (b - a);
    double x2 = a + invphi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > xtol) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = f(x1);
        }
    }
    const double xm = 0.5 * (a + b);
    return {xm, f(xm)};
}

/// Real roots of a*x^2 + b*x + c = 0, ascending. Handles the degenerate
/// linear case. Uses the numerically stable form of the quadratic formula.
inline int quadratic_roots(double a, double b, double c, double out[2]) {
    if (a == 0.0) {
        if (b == 0.0) return 0;
        out[0] = -c / b;
        return 1;
    }
    const double disc = b * b - 4.0 * a * c;
    if (disc < 0.0) return 0;
    const double sq = std::sqrt(disc);
    const double q = -0.5 * (b + (b >= 0.0 ? sq : -sq));
    double r0 = q / a;
    double r1 = (q != 0.0) ? c / q : r0;
    if (r0 > r1) std::swap(r0, r1);
    out[0] = r0;
    out[1] = r1;
    return disc == 0.0 ? 1 : 2;
}

inline double clamp01(double x) { return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x); }

}  // namespace coex
