#pragma once

#include <cmath>
#include <limits>
#include <utility>

#include "coex/market.hpp"
#include "coex/stage2.hpp"

namespace coex::propositions {

/// Sustainable add-on price at the interior branch's local maximum when the
/// 5G load is pinned at S: the right-hand side shared by the entry-cost
/// threshold and the small-capacity cost interval. NaN when 3*alpha*S > 1
/// (no interior local maximum).
inline double interior_peak_price(const MarketParams& p, double s) {
    const double disc = 1.0 - 3.0 * p.alpha * s;
    if (disc < 0.0 || !(p.alpha > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    const double r = std::sqrt(disc);
    const double x_lo = (1.0 - r) / (3.0 * p.alpha);
    return ((1.0 - r) / 3.0) * p.congestion_unit() * s * (s - x_lo * (1.0 - (1.0 - r) / 3.0));
}

/// Entry-cost threshold: with the 5G price held at its pre-entry optimum and
/// Q < 3N/(V1-u_bar), the add-on attracts users whenever c is at or below
/// this value. Non-decreasing in alpha on its domain.
inline double entry_cost_threshold(const MarketParams& p) {
    const double s1 = std::sqrt((p.V1 - p.u_bar) / (3.0 * p.congestion_unit()));
    return interior_peak_price(p, s1);
}

/// Cost interval of the small-capacity price-cut result (open interval).
inline std::pair<double, double> small_capacity_cost_window(const MarketParams& p) {
    const double s1 = std::sqrt((p.V1 - p.u_bar) / (3.0 * p.congestion_unit()));
    const double s2 = std::sqrt((p.V1 - p.u_bar) / p.congestion_unit());
    return {interior_peak_price(p, s1), interior_peak_price(p, s2)};
}

/// Cost threshold of the large-capacity results: the peak of the full-market
/// boundary curve.
inline double full_market_price_cap(const MarketParams& p) {
    return boundary_branch_price(p, solve_x2_hat(p.alpha));
}

/// Coverage threshold of the medium-capacity price-raise result.
inline double medium_capacity_coverage_floor(const MarketParams& p) {
    const double s1 = std::sqrt((p.V1 - p.u_bar) / (3.0 * p.congestion_unit()));
    const double num = 2.0 * std::sqrt(1.0 - s1) * (1.0 - 2.0 * s1);
    const double den = 2.0 - 3.0 * s1;
    const double ratio = num / den;
    return ratio * ratio;
}

inline double q_small_threshold(const MarketParams& p) { return p.N / (p.V1 - p.u_bar); }

inline double q_medium_threshold(const MarketParams& p) {
    const double k = (std::sqrt(17.0) + 23.0) / 32.0;
    return 3.0 * k * k * p.N / (p.V1 - p.u_bar);
}

inline double q_large_threshold(const MarketParams& p) { return 3.0 * p.N / (p.V1 - p.u_bar); }

/// Positive add-on demand at the held-fixed pre-entry 5G price.
inline bool addon_entry_condition(const MarketParams& p) {
    const double rhs = entry_cost_threshold(p);
    return p.Q < q_large_threshold(p) && std::isfinite(rhs) && p.c <= rhs;
}

/// Strict profit gain, small/medium capacity.
inline bool strict_gain_condition_small_q(const MarketParams& p) { return addon_entry_condition(p); }

/// Price raise, large capacity.
inline bool price_raise_condition_large_q(const MarketParams& p) {
    return p.Q >= q_large_threshold(p) && p.c <= full_market_price_cap(p);
}

/// Strict profit gain, large capacity.
inline bool strict_gain_condition_large_q(const MarketParams& p) { return price_raise_condition_large_q(p); }

/// Price raise, medium capacity.
inline bool price_raise_condition_medium_q(const MarketParams& p) {
    return p.Q > q_medium_threshold(p) && p.Q < q_large_threshold(p) &&
           p.alpha > medium_capacity_coverage_floor(p) && p.c <= full_market_price_cap(p);
}

/// Price cut, small capacity.
inline bool price_cut_condition_small_q(const MarketParams& p) {
    if (!(p.Q < q_small_threshold(p))) return false;
    const double cov_cap = 1.0 - std::sqrt((p.V1 - p.u_bar) / p.congestion_unit());
    if (!(p.alpha < cov_cap)) return false;
    const auto [lo, hi] = small_capacity_cost_window(p);
    return std::isfinite(lo) && std::isfinite(hi) && p.c > lo && p.c < hi;
}

}  // namespace coex::propositions
