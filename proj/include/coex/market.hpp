#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "coex/distributions.hpp"

namespace coex {

/// Signals a solver or formula being invoked outside the regime it is
/// derived for (e.g. the closed-form region map with a non-uniform
/// distribution).
class unsupported_config : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// All exogenous constants of the game. Validated at construction so the
/// solvers can assume a well-posed market.
struct MarketParams {
    double N;      ///< user population
    double V1;     ///< 5G access benefit
    double V2;     ///< WiFi access benefit
    double u_bar;  ///< reservation payoff
    double Q;      ///< 5G capacity
    double alpha;  ///< WiFi coverage addition per AP
    double c;      ///< WiFi deployment cost per user/AP
    double beta;   ///< WiFi congestion factor (0 = congestion-free WiFi)

    MarketParams(double N_, double V1_, double V2_, double u_bar_, double Q_, double alpha_,
                 double c_, double beta_ = 0.0)
        : N(N_), V1(V1_), V2(V2_), u_bar(u_bar_), Q(Q_), alpha(alpha_), c(c_), beta(beta_) {
        if (!(N > 0.0)) throw std::invalid_argument("MarketParams: N must be > 0");
        if (!(V1 >= 0.0)) throw std::invalid_argument("MarketParams: V1 must be >= 0");
        if (!(V2 >= 0.0)) throw std::invalid_argument("MarketParams: V2 must be >= 0");
        if (!(u_bar >= 0.0)) throw std::invalid_argument("MarketParams: u_bar must be >= 0");
        if (!(Q > 0.0)) throw std::invalid_argument("MarketParams: Q must be > 0");
        if (!(alpha >= 0.0 && alpha < 1.0))
            throw std::invalid_argument("MarketParams: alpha must be in [0,1)");
        if (!(c >= 0.0)) throw std::invalid_argument("MarketParams: c must be >= 0");
        if (!(beta >= 0.0)) throw std::invalid_argument("MarketParams: beta must be >= 0");
        if (!(V1 >= V2)) throw std::invalid_argument("MarketParams: V1 must be >= V2");
        if (!(V1 > u_bar)) throw std::invalid_argument("MarketParams: V1 must exceed u_bar");
    }

    double congestion_unit() const { return N / Q; }

    MarketParams with(double Q_, double alpha_, double c_, double beta_) const {
        return MarketParams(N, V1, V2, u_bar, Q_, alpha_, c_, beta_);
    }
};

/// Stage II aggregate state: fractions choosing 5G-only and 5G+WiFi.
struct SubscriptionState {
    double x1 = 0.0;
    double x2 = 0.0;

    SubscriptionState() = default;
    SubscriptionState(double x1_, double x2_) : x1(x1_), x2(x2_) {
        if (!(x1 >= 0.0 && x1 <= 1.0)) throw std::invalid_argument("SubscriptionState: x1 outside [0,1]");
        if (!(x2 >= 0.0 && x2 <= 1.0)) throw std::invalid_argument("SubscriptionState: x2 outside [0,1]");
        if (x1 + x2 > 1.0 + 1e-12) throw std::invalid_argument("SubscriptionState: x1 + x2 > 1");
    }

    double total() const { return x1 + x2; }
};

enum class ChoiceLabel : int { Neither = 0, FiveGOnly = 1, FiveGPlusWiFi = 2 };

/// Fraction of users loading the 5G capacity at any moment: add-on users
/// offload while inside the WiFi coverage alpha*x2.
inline double effective_load(const MarketParams& p, double x1, double x2) {
    return x1 + x2 * (1.0 - p.alpha * x2);
}

inline double effective_load(const MarketParams& p, const SubscriptionState& s) {
    return effective_load(p, s.x1, s.x2);
}

/// Pre-entry payoff of a 5G subscriber with sensitivity theta.
inline double payoff_benchmark(const MarketParams& p, double theta, double x1_bar, double p1_bar) {
    if (!(theta >= 0.0 && theta <= 1.0)) throw std::domain_error("payoff_benchmark: theta outside [0,1]");
    return p.V1 - (p.N * x1_bar / p.Q) * theta - p1_bar;
}

/// Post-entry payoff of a 5G-only subscriber.
inline double payoff_5g_only(const MarketParams& p, double theta, const SubscriptionState& s,
                             double p1) {
    if (!(theta >= 0.0 && theta <= 1.0)) throw std::domain_error("payoff_5g_only: theta outside [0,1]");
    return p.V1 - (p.N * effective_load(p, s) / p.Q) * theta - p1;
}

/// Post-entry payoff of a 5G+WiFi subscriber. With beta = 0 this is the
/// congestion-free add-on payoff; with V1 = V2 and beta > 0 it is the
/// congested-WiFi variant. The combined form superposes the two.
inline double payoff_5g_wifi(const MarketParams& p, double theta, const SubscriptionState& s,
                             double p1, double p2) {
    if (!(theta >= 0.0 && theta <= 1.0)) throw std::domain_error("payoff_5g_wifi: theta outside [0,1]");
    const double cov = p.alpha * s.x2;
    const double load = effective_load(p, s);
    return (1.0 - cov) * p.V1 + cov * p.V2 - p1 - p2 -
           (1.0 - cov) * (p.N * load / p.Q) * theta - cov * p.beta * theta;
}

inline double profit_5g(const MarketParams& p, const SubscriptionState& s, double p1) {
    return p.N * (s.x1 + s.x2) * p1;
}

inline double profit_wifi(const MarketParams& p, const SubscriptionState& s, double p2) {
    if (p2 < p.c) throw std::invalid_argument("profit_wifi: p2 below deployment cost c");
    return p.N * s.x2 * (p2 - p.c);
}

enum class WelfareRegime { PreWifi, PostWifi };

/// Operator profits plus the population integral of realized user payoffs.
/// Composite trapezoid on a 10^4-point grid; the integrand is piecewise
/// affine in theta with kinks only at the subscription cutoffs, so those two
/// points are inserted as extra nodes (making the rule exact for uniform F).
inline double social_welfare(const MarketParams& p, const SensitivityDistribution& dist,
                             const SubscriptionState& s, double p1, double p2,
                             WelfareRegime regime) {
    std::vector<double> nodes;
    nodes.reserve(10003);
    const int n = 10000;
    for (int i = 0; i <= n; ++i) nodes.push_back(static_cast<double>(i) / n);
    const double cut_a = dist.inverse_cdf(clamp01(s.x1));
    const double cut_b = dist.inverse_cdf(clamp01(s.x1 + s.x2));
    nodes.push_back(cut_a);
    nodes.push_back(cut_b);
    std::sort(nodes.begin(), nodes.end());

    auto realized = [&](double theta) {
        if (regime == WelfareRegime::PreWifi)
            return std::max(payoff_benchmark(p, theta, s.x1, p1), p.u_bar);
        const double u1 = payoff_5g_only(p, theta, s, p1);
        const double u2 = payoff_5g_wifi(p, theta, s, p1, p2);
        return std::max({u1, u2, p.u_bar});
    };

    double integral = 0.0;
    double prev_t = nodes.front();
    double prev_g = realized(prev_t) * dist.pdf(prev_t);
    for (std::size_t i = 1; i < nodes.size(); ++i) {
        const double t = nodes[i];
        if (t == prev_t) continue;
        const double g = realized(t) * dist.pdf(t);
        integral += 0.5 * (g + prev_g) * (t - prev_t);
        prev_t = t;
        prev_g = g;
    }

    double profits = profit_5g(p, s, p1);
    if (regime == WelfareRegime::PostWifi) profits += profit_wifi(p, s, p2);
    return profits + p.N * integral;
}

}  // namespace coex
