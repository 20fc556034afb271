#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "coex/market.hpp"
#include "coex/roots.hpp"

namespace coex {

enum class BenchmarkBranch { Interior, FullMarket, Empty };

inline const char* to_string(BenchmarkBranch b) {
    switch (b) {
        case BenchmarkBranch::Interior: return "interior";
        case BenchmarkBranch::FullMarket: return "full_market";
        case BenchmarkBranch::Empty: return "empty";
    }
    return "?";
}

/// Pre-entry Stackelberg outcome: the 5G price, induced subscription
/// fraction and cutoff, and the operator profit.
struct BenchmarkEquilibrium {
    double p1_bar = 0.0;
    double x1_bar = 0.0;
    double theta_cut = 0.0;
    double profit = 0.0;
    BenchmarkBranch branch = BenchmarkBranch::Empty;
    std::string method;  ///< "closed_form" or "numeric"
};

struct BenchmarkSubscription {
    double x1_bar = 0.0;
    double theta_cut = 0.0;
    BenchmarkBranch branch = BenchmarkBranch::Empty;
};

/// Stage II of the pre-entry game: the subscription fraction induced by a
/// 5G price. Full market at or below V1 - u_bar - N/Q, empty at or above
/// V1 - u_bar; in between the cutoff solves
///   V1 - (N/Q) F(theta) theta - p1 - u_bar = 0,
/// whose left side is strictly decreasing, so bisection applies.
inline BenchmarkSubscription subscription_given_price(const MarketParams& p,
                                                      const SensitivityDistribution& dist,
                                                      double p1_bar) {
    if (p1_bar < 0.0) throw std::domain_error("subscription_given_price: negative price");
    const double nq = p.congestion_unit();
    BenchmarkSubscription out;
    if (p1_bar <= p.V1 - p.u_bar - nq) {
        out.x1_bar = 1.0;
        out.theta_cut = 1.0;
        out.branch = BenchmarkBranch::FullMarket;
        return out;
    }
    if (p1_bar >= p.V1 - p.u_bar) {
        out.x1_bar = 0.0;
        out.theta_cut = 0.0;
        out.branch = BenchmarkBranch::Empty;
        return out;
    }
    const double gap = p.V1 - p.u_bar - p1_bar;
    auto g = [&](double t) { return gap - nq * dist.cdf(t) * t; };
    out.theta_cut = bisect(g, 0.0, 1.0, 1e-13);
    out.x1_bar = dist.cdf(out.theta_cut);
    out.branch = BenchmarkBranch::Interior;
    return out;
}

inline double benchmark_profit_at(const MarketParams& p, const SensitivityDistribution& dist,
                                  double p1_bar) {
    return p.N * subscription_given_price(p, dist, p1_bar).x1_bar * p1_bar;
}

/// Numeric Stage I: grid search over [0, V1 - u_bar] followed by
/// golden-section refinement inside the winning grid cell. Works for any
/// distribution; grid step defaults to (V1 - u_bar) / 2000.
inline BenchmarkEquilibrium optimal_price_numeric(const MarketParams& p,
                                                  const SensitivityDistribution& dist,
                                                  double grid_step = 0.0) {
    const double top = p.V1 - p.u_bar;
    if (grid_step <= 0.0) grid_step = top / 2000.0;
    double best_p = 0.0, best_profit = 0.0;
    const long n = static_cast<long>(std::ceil(top / grid_step));
    for (long i = 0; i <= n; ++i) {
        const double price = (i == n) ? top : static_cast<double>(i) * grid_step;
        const double profit = benchmark_profit_at(p, dist, price);
        if (profit > best_profit) {
            best_profit = profit;
            best_p = price;
        }
    }
    const double lo = std::max(0.0, best_p - grid_step);
    const double hi = std::min(top, best_p + grid_step);
    auto [pm, fm] = golden_max([&](double q) { return benchmark_profit_at(p, dist, q); }, lo, hi,
                               1e-8 * top);
    if (fm > best_profit) {
        best_p = pm;
        best_profit = fm;
    }

    BenchmarkEquilibrium eq;
    const auto sub = subscription_given_price(p, dist, best_p);
    eq.p1_bar = best_p;
    eq.x1_bar = sub.x1_bar;
    eq.theta_cut = sub.theta_cut;
    eq.profit = best_profit;
    eq.branch = sub.branch;
    eq.method = "numeric";
    return eq;
}

/// Stage I of the pre-entry game. With a continuous non-increasing density
/// the closed-form characterization applies: full market when
/// Q >= (2 + 1/f(1)) N/(V1-u_bar), otherwise the interior cutoff solves the
/// first-order condition
///   f(t)(V1 - u_bar - (2N/Q) F(t) t) - (N/Q) F(t)^2 = 0.
/// For the uniform distribution the explicit two-branch formulas are used.
/// Distributions without a non-increasing density (or with f(1) = 0, where
/// the threshold degenerates) fall back to the numeric path.
inline BenchmarkEquilibrium optimal_price(const MarketParams& p,
                                          const SensitivityDistribution& dist) {
    const double nq = p.congestion_unit();
    const double margin = p.V1 - p.u_bar;

    if (dist.kind() == SensitivityDistribution::Kind::Uniform) {
        BenchmarkEquilibrium eq;
        eq.method = "closed_form";
        if (p.Q < 3.0 * p.N / margin) {
            eq.p1_bar = (2.0 / 3.0) * margin;
            eq.x1_bar = std::sqrt(margin / (3.0 * nq));
            eq.theta_cut = eq.x1_bar;
            eq.profit = p.N * eq.x1_bar * eq.p1_bar;
            eq.branch = BenchmarkBranch::Interior;
        } else {
            eq.p1_bar = margin - nq;
            eq.x1_bar = 1.0;
            eq.theta_cut = 1.0;
            eq.profit = p.N * eq.p1_bar;
            eq.branch = BenchmarkBranch::FullMarket;
        }
        return eq;
    }

    if (!dist.has_nonincreasing_pdf() || dist.pdf(1.0) <= 1e-12)
        return optimal_price_numeric(p, dist);

    BenchmarkEquilibrium eq;
    eq.method = "closed_form";
    const double f1 = dist.pdf(1.0);
    if (p.Q >= (2.0 + 1.0 / f1) * p.N / margin) {
        eq.p1_bar = margin - nq;
        eq.x1_bar = 1.0;
        eq.theta_cut = 1.0;
        eq.profit = p.N * eq.p1_bar;
        eq.branch = BenchmarkBranch::FullMarket;
        return eq;
    }
    auto foc = [&](double t) {
        const double F = dist.cdf(t);
        return dist.pdf(t) * (margin - 2.0 * nq * F * t) - nq * F * F;
    };
    // foc(0) = f(0)(V1 - u_bar) > 0; locate the first sign change.
    const auto brackets = scan_sign_changes(foc, 0.0, 1.0, 1e-3);
    if (brackets.empty()) return optimal_price_numeric(p, dist);
    const double theta = bisect(foc, brackets.front().first, brackets.front().second, 1e-13);
    eq.theta_cut = theta;
    eq.x1_bar = dist.cdf(theta);
    eq.p1_bar = margin - nq * theta * eq.x1_bar;
    eq.profit = p.N * eq.x1_bar * eq.p1_bar;
    eq.branch = BenchmarkBranch::Interior;
    return eq;
}

}  // namespace coex
