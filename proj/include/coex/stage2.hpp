#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "coex/benchmark.hpp"
#include "coex/market.hpp"
#include "coex/roots.hpp"

namespace coex {

enum class Regime { FullMarketSplit, InteriorSplit, FiveGOnlyFull, FiveGOnlyInterior, Empty };

inline const char* to_string(Regime r) {
    switch (r) {
        case Regime::FullMarketSplit: return "full_market_split";
        case Regime::InteriorSplit: return "interior_split";
        case Regime::FiveGOnlyFull: return "fiveg_only_full";
        case Regime::FiveGOnlyInterior: return "fiveg_only_interior";
        case Regime::Empty: return "empty";
    }
    return "?";
}

enum class CandidateFamily { Interior, Boundary, NoWifi };

inline const char* to_string(CandidateFamily f) {
    switch (f) {
        case CandidateFamily::Interior: return "interior";
        case CandidateFamily::Boundary: return "boundary";
        case CandidateFamily::NoWifi: return "no_wifi";
    }
    return "?";
}

/// One admissible solution of a candidate family, recorded for diagnostics
/// even when it loses the selection rule.
struct StageTwoCandidate {
    double x1 = 0.0;
    double x2 = 0.0;
    CandidateFamily family = CandidateFamily::NoWifi;
};

/// Stage II outcome for a given price pair.
struct SubscriptionEquilibrium {
    SubscriptionState state;
    double cut_low = 0.0;   ///< F^{-1}(x1): 5G-only / add-on indifference point
    double cut_high = 0.0;  ///< F^{-1}(x1 + x2): participation cutoff
    Regime regime = Regime::Empty;
    double residual = 0.0;  ///< max absolute defect of the defining equations
    std::vector<StageTwoCandidate> candidates;
};

/// Closed-form thresholds of the five-region price map (uniform F, V1 = V2,
/// beta = 0). p1_hat is NaN when the defining equation has no root in the
/// stated interval for these parameters.
struct RegionThresholds {
    double x2_hat = 0.0;
    double p2_hat = 0.0;
    double p2_hat_prime = std::numeric_limits<double>::quiet_NaN();
    double p1_hat = std::numeric_limits<double>::quiet_NaN();
};

/// Unique root in [0, 1] of 4*a*x^3 - 3*a*x^2 - 2*x + 1 = 0. The polynomial
/// is positive below the root and negative above it, so a sign scan at step
/// 1e-3 followed by bisection suffices.
inline double solve_x2_hat(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("solve_x2_hat: alpha outside (0,1)");
    auto h = [alpha](double x) { return ((4.0 * alpha * x - 3.0 * alpha) * x - 2.0) * x + 1.0; };
    const auto brackets = scan_sign_changes(h, 0.0, 1.0, 1e-3);
    if (brackets.empty()) throw std::runtime_error("solve_x2_hat: no sign change found");
    return bisect(h, brackets.front().first, brackets.front().second, 1e-12);
}

/// Full-market boundary curve: the add-on price an x2-fraction split market
/// can sustain, alpha*x2*(N/Q)*(1-alpha*x2^2)*(1-x2). Its derivative is
/// proportional to the x2_hat quartic, so it rises on [0, x2_hat] and falls
/// on [x2_hat, 1].
inline double boundary_branch_price(const MarketParams& p, double x2) {
    return p.alpha * x2 * p.congestion_unit() * (1.0 - p.alpha * x2 * x2) * (1.0 - x2);
}

/// Interior-branch counterpart at 5G effective load S:
/// alpha*x2*(N/Q)*S*(S - x2 + alpha*x2^2).
inline double interior_branch_price(const MarketParams& p, double s, double x2) {
    return p.alpha * x2 * p.congestion_unit() * s * (s - x2 + p.alpha * x2 * x2);
}

namespace detail {

inline constexpr double kAdmissSlack = 1e-9;

struct RawCandidate {
    double x1, x2;
    CandidateFamily family;
};

/// Shared selection rule: the equilibrium is the admissible candidate with
/// the largest x2; ties in x2 break toward larger x1 (more total
/// subscription). Returns index or -1.
inline int select_candidate(const std::vector<RawCandidate>& cands) {
    int best = -1;
    for (std::size_t i = 0; i < cands.size(); ++i) {
        if (best < 0) {
            best = static_cast<int>(i);
            continue;
        }
        const auto& a = cands[i];
        const auto& b = cands[static_cast<std::size_t>(best)];
        if (a.x2 > b.x2 + 1e-9 || (std::abs(a.x2 - b.x2) <= 1e-9 && a.x1 > b.x1))
            best = static_cast<int>(i);
    }
    return best;
}

inline SubscriptionEquilibrium finalize(const MarketParams& p, const SensitivityDistribution& dist,
                                        double p1, double p2,
                                        const std::vector<RawCandidate>& cands, int selected,
                                        const BenchmarkSubscription& pre_entry) {
    SubscriptionEquilibrium eq;
    for (const auto& c : cands) eq.candidates.push_back({c.x1, c.x2, c.family});

    if (selected < 0) {
        eq.state = SubscriptionState(pre_entry.x1_bar, 0.0);
        eq.cut_low = eq.cut_high = pre_entry.theta_cut;
        eq.regime = pre_entry.branch == BenchmarkBranch::FullMarket ? Regime::FiveGOnlyFull
                    : pre_entry.branch == BenchmarkBranch::Empty    ? Regime::Empty
                                                                 : Regime::FiveGOnlyInterior;
        eq.candidates.push_back({pre_entry.x1_bar, 0.0, CandidateFamily::NoWifi});
        if (pre_entry.branch == BenchmarkBranch::Interior)
            eq.residual = std::abs(payoff_5g_only(p, eq.cut_low, eq.state, p1) - p.u_bar);
        return eq;
    }

    const auto& sel = cands[static_cast<std::size_t>(selected)];
    const double x1 = std::max(0.0, sel.x1);
    const double x2 = sel.x2;
    eq.state = SubscriptionState(x1, std::min(x2, 1.0 - x1));
    eq.cut_low = dist.inverse_cdf(clamp01(x1));
    eq.cut_high = dist.inverse_cdf(clamp01(x1 + x2));
    eq.regime = sel.family == CandidateFamily::Boundary ? Regime::FullMarketSplit
                                                        : Regime::InteriorSplit;

    const double u1 = payoff_5g_only(p, eq.cut_low, eq.state, p1);
    const double u2 = payoff_5g_wifi(p, eq.cut_low, eq.state, p1, p2);
    double res = std::abs(u1 - u2);
    if (sel.family == CandidateFamily::Interior) {
        const double ub = payoff_5g_wifi(p, eq.cut_high, eq.state, p1, p2);
        res = std::max(res, std::abs(ub - p.u_bar));
    } else {
        res = std::max(res, std::abs(x1 + x2 - 1.0));
    }
    eq.residual = res;
    return eq;
}

/// Admissibility of a boundary-family root: the marginal user at theta = 1
/// keeps at least the reservation payoff.
inline bool boundary_admissible(const MarketParams& p, double x2, double p1, double p2) {
    if (!(x2 > 0.0 && x2 < 1.0 - 1e-12)) return false;
    const SubscriptionState s(1.0 - x2, x2);
    return payoff_5g_wifi(p, 1.0, s, p1, p2) >= p.u_bar - kAdmissSlack;
}

}  // namespace detail

/// Stage II equilibrium for the uniform distribution with V1 = V2 and
/// beta = 0, where every candidate family reduces to a low-degree polynomial
/// whose monotone segments are known in closed form. Root isolation is exact
/// (segment endpoints come from the quartic/quadratic critical points), with
/// bisection on each monotone piece.
inline SubscriptionEquilibrium equilibrium_uniform(const MarketParams& p, double p1, double p2) {
    if (p.V1 != p.V2 || p.beta != 0.0)
        throw unsupported_config("equilibrium_uniform: requires V1 == V2 and beta == 0");
    if (p1 < 0.0 || p2 < 0.0) throw std::domain_error("equilibrium_uniform: negative price");

    const auto dist = SensitivityDistribution::uniform();
    const double nq = p.congestion_unit();
    const double margin = p.V1 - p.u_bar;
    const auto pre_entry = subscription_given_price(p, dist, p1);

    std::vector<detail::RawCandidate> cands;
    if (p.alpha > 0.0) {
        // Boundary family: roots of boundary_branch_price(x2) = p2 on the
        // two monotone segments split by x2_hat.
        const double x2h = solve_x2_hat(p.alpha);
        auto phi = [&](double x) { return boundary_branch_price(p, x) - p2; };
        const double peak = boundary_branch_price(p, x2h);
        if (p2 <= peak) {
            for (const auto& seg : {std::pair{0.0, x2h}, std::pair{x2h, 1.0}}) {
                const double flo = phi(seg.first), fhi = phi(seg.second);
                if ((flo <= 0.0 && fhi >= 0.0) || (flo >= 0.0 && fhi <= 0.0)) {
                    const double r = bisect(phi, seg.first, seg.second, 1e-13);
                    if (detail::boundary_admissible(p, r, p1, p2))
                        cands.push_back({1.0 - r, r, CandidateFamily::Boundary});
                }
            }
        }

        // Interior family: roots of interior_branch_price(S, x2) = p2; the
        // cubic's critical points (1 -/+ sqrt(1-3*alpha*S))/(3*alpha) split
        // [0, 1] into monotone segments.
        if (p1 < margin) {
            const double s = std::sqrt((margin - p1) / nq);
            auto psi = [&](double x) { return interior_branch_price(p, s, x) - p2; };
            std::vector<double> knots{0.0, 1.0};
            const double disc = 1.0 - 3.0 * p.alpha * s;
            if (disc >= 0.0) {
                const double r = std::sqrt(disc);
                for (double k : {(1.0 - r) / (3.0 * p.alpha), (1.0 + r) / (3.0 * p.alpha)})
                    if (k > 0.0 && k < 1.0) knots.push_back(k);
            }
            std::sort(knots.begin(), knots.end());
            for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
                const double lo = knots[i], hi = knots[i + 1];
                if (hi - lo < 1e-15) continue;
                const double flo = psi(lo), fhi = psi(hi);
                if ((flo <= 0.0 && fhi >= 0.0) || (flo >= 0.0 && fhi <= 0.0)) {
                    const double r = bisect(psi, lo, hi, 1e-13);
                    const double x1 = s - r + p.alpha * r * r;
                    const double total = s + p.alpha * r * r;
                    if (r > 0.0 && r < 1.0 && x1 >= -1e-12 && total < 1.0 - 1e-9)
                        cands.push_back({std::max(0.0, x1), r, CandidateFamily::Interior});
                }
            }
        }
    }

    // Deduplicate near-identical roots from adjacent segments.
    std::vector<detail::RawCandidate> uniq;
    for (const auto& c : cands) {
        bool dup = false;
        for (const auto& u : uniq)
            if (std::abs(u.x1 - c.x1) < 1e-10 && std::abs(u.x2 - c.x2) < 1e-10) dup = true;
        if (!dup) uniq.push_back(c);
    }

    return detail::finalize(p, dist, p1, p2, uniq, detail::select_candidate(uniq), pre_entry);
}

namespace detail {

/// Inner fixed point of the interior family: the 5G-only fraction x1
/// consistent with the indifference cutoff at given x2. R(x1) is strictly
/// increasing, so the root is unique when it exists. `fast` switches between
/// the interpolated cdf (scan) and the exact cdf (polish).
struct InnerSolver {
    const MarketParams& p;
    const SensitivityDistribution& dist;
    double p1, p2;

    double indiff_theta(double x1, double x2) const {
        const double load = effective_load(p, x1, x2);
        const double dm = p.congestion_unit() * load - p.beta;
        if (dm <= 0.0) return std::numeric_limits<double>::infinity();
        const double lift = p2 + p.alpha * x2 * (p.V1 - p.V2);
        return lift / (p.alpha * x2 * dm);
    }

    double residual_fast(double x1, double x2) const {
        const double ta = indiff_theta(x1, x2);
        const double fv = ta >= 1.0 ? 1.0 : dist.cdf_fast(ta);
        return x1 - fv;
    }

    double residual_exact(double x1, double x2) const {
        const double ta = indiff_theta(x1, x2);
        const double fv = ta >= 1.0 ? 1.0 : dist.cdf(ta);
        return x1 - fv;
    }

    /// Warm-started guarded Newton on the interpolated cdf; falls back to
    /// bisection. Returns NaN when no root exists in [0, 1 - x2].
    double solve_fast(double x2, double warm) const {
        const double hi = 1.0 - x2;
        if (residual_fast(hi, x2) < 0.0) return std::numeric_limits<double>::quiet_NaN();
        double x = std::clamp(warm, 0.0, hi);
        for (int it = 0; it < 8; ++it) {
            const double ta = indiff_theta(x, x2);
            const double fv = ta >= 1.0 ? 1.0 : dist.cdf_fast(ta);
            const double r = x - fv;
            if (std::abs(r) < 1e-10) return x;
            double deriv = 1.0;
            if (ta < 1.0 && std::isfinite(ta)) {
                const double load = effective_load(p, x, x2);
                const double dm = p.congestion_unit() * load - p.beta;
                deriv += dist.pdf_fast(ta) * ta * p.congestion_unit() / dm;
            }
            const double step = r / deriv;
            x = std::clamp(x - step, 0.0, hi);
            if (std::abs(step) < 1e-12) return x;
        }
        return bisect([&](double v) { return residual_fast(v, x2); }, 0.0, hi, 1e-11);
    }

    double solve_exact(double x2) const {
        const double hi = 1.0 - x2;
        if (residual_exact(hi, x2) < 0.0) return std::numeric_limits<double>::quiet_NaN();
        return bisect([&](double v) { return residual_exact(v, x2); }, 0.0, hi, 1e-13);
    }
};

}  // namespace detail

namespace detail {

/// True when a positive add-on fraction is arithmetically possible at all:
/// the indifference condition caps the sustainable add-on price at
/// alpha*(N/Q - beta).
inline bool wifi_possible(const MarketParams& p, double p2) {
    const double nq = p.congestion_unit();
    return p.alpha > 0.0 && p.beta < nq && p2 <= p.alpha * (nq - p.beta) + kAdmissSlack;
}

/// Boundary-family roots (x1 = 1 - x2), polished against the exact cdf but
/// not yet filtered for admissibility. Independent of p1, which lets Stage I
/// scans over the 5G price reuse them.
inline std::vector<double> boundary_family_roots(const MarketParams& p,
                                                 const SensitivityDistribution& dist, double p2,
                                                 double eps0) {
    std::vector<double> roots;
    if (!wifi_possible(p, p2)) return roots;
    const double nq = p.congestion_unit();
    auto bd = [&](double x2, bool fast) {
        const double dm = nq * (1.0 - p.alpha * x2 * x2) - p.beta;
        if (dm <= 0.0) return std::numeric_limits<double>::quiet_NaN();
        const double ta = (p2 + p.alpha * x2 * (p.V1 - p.V2)) / (p.alpha * x2 * dm);
        return (1.0 - x2) - (ta >= 1.0 ? 1.0 : (fast ? dist.cdf_fast(ta) : dist.cdf(ta)));
    };
    auto bd_fast = [&](double x2) { return bd(x2, true); };
    auto bd_exact = [&](double x2) { return bd(x2, false); };
    for (const auto& br : scan_sign_changes(bd_fast, eps0, 1.0, eps0)) {
        const double lo = std::max(0.25 * eps0, br.first - eps0);
        const double hi = std::min(1.0, br.second + eps0);
        const double flo = bd_exact(lo), fhi = bd_exact(hi);
        if (std::isnan(flo) || std::isnan(fhi)) continue;
        if ((flo > 0.0) == (fhi > 0.0) && flo != 0.0 && fhi != 0.0) continue;
        roots.push_back(bisect(bd_exact, lo, hi, 1e-13));
    }
    return roots;
}

inline SubscriptionEquilibrium equilibrium_general_impl(const MarketParams& p,
                                                        const SensitivityDistribution& dist,
                                                        double p1, double p2, double eps0,
                                                        const std::vector<double>& boundary_roots) {
    if (p1 < 0.0 || p2 < 0.0) throw std::domain_error("equilibrium_general: negative price");
    const double nq = p.congestion_unit();
    const auto pre_entry = subscription_given_price(p, dist, p1);

    std::vector<RawCandidate> cands;
    if (wifi_possible(p, p2)) {
        for (double r : boundary_roots)
            if (boundary_admissible(p, r, p1, p2))
                cands.push_back({1.0 - r, r, CandidateFamily::Boundary});

        // Family (a): inner fixed point for x1, outer defect
        // x1 + x2 - F(theta_b) where theta_b solves u2(theta_b) = u_bar.
        InnerSolver inner{p, dist, p1, p2};
        double warm = pre_entry.x1_bar;
        auto defect = [&](double x2, bool fast) {
            const double x1 = fast ? inner.solve_fast(x2, warm) : inner.solve_exact(x2);
            if (std::isnan(x1)) return std::numeric_limits<double>::quiet_NaN();
            if (fast) warm = x1;
            const double load = effective_load(p, x1, x2);
            const double cov = p.alpha * x2;
            const double m2 = (1.0 - cov) * nq * load + cov * p.beta;
            if (m2 <= 0.0) return std::numeric_limits<double>::quiet_NaN();
            const double v_mix = (1.0 - cov) * p.V1 + cov * p.V2;
            const double tb = (v_mix - p1 - p2 - p.u_bar) / m2;
            const double fv =
                tb <= 0.0 ? 0.0 : (tb >= 1.0 ? 1.0 : (fast ? dist.cdf_fast(tb) : dist.cdf(tb)));
            return x1 + x2 - fv;
        };
        auto d_fast = [&](double x2) { return defect(x2, true); };
        auto d_exact = [&](double x2) { return defect(x2, false); };
        for (const auto& br : scan_sign_changes(d_fast, eps0, 1.0 - eps0, eps0)) {
            double lo = std::max(0.25 * eps0, br.first - eps0);
            double hi = std::min(1.0 - 0.25 * eps0, br.second + eps0);
            const double flo = d_exact(lo), fhi = d_exact(hi);
            if (std::isnan(flo) || std::isnan(fhi)) continue;
            if ((flo > 0.0) == (fhi > 0.0) && flo != 0.0 && fhi != 0.0) continue;
            const double x2r = bisect(d_exact, lo, hi, 1e-13);
            const double x1r = inner.solve_exact(x2r);
            if (std::isnan(x1r)) continue;
            const double total = x1r + x2r;
            if (x2r > 0.0 && x2r < 1.0 && x1r >= -1e-12 && total < 1.0 - 1e-9)
                cands.push_back({std::max(0.0, x1r), x2r, CandidateFamily::Interior});
        }
    }

    std::vector<RawCandidate> uniq;
    for (const auto& c : cands) {
        bool dup = false;
        for (const auto& u : uniq)
            if (std::abs(u.x1 - c.x1) < 1e-9 && std::abs(u.x2 - c.x2) < 1e-9) dup = true;
        if (!dup) uniq.push_back(c);
    }

    return finalize(p, dist, p1, p2, uniq, select_candidate(uniq), pre_entry);
}

}  // namespace detail

/// Stage II equilibrium for any supported distribution, any V1 >= V2 and any
/// beta >= 0. Candidate families:
///   (a) interior split  -- indifference at F^{-1}(x1), reservation at
///       F^{-1}(x1+x2), x1+x2 < 1;
///   (b) boundary split  -- indifference at F^{-1}(x1), x1+x2 = 1, with the
///       theta = 1 user at or above the reservation payoff;
///   (c) no WiFi         -- the pre-entry subscription at p1.
/// Families (a) and (b) are located by a sign scan over x2 at step eps0 with
/// bisection per bracket (defects evaluated through the cdf written as
/// "fraction minus F(cutoff)", which keeps quantile calls out of the hot
/// loop), then polished against the exact cdf. Among admissible candidates
/// the largest x2 wins. With beta >= N/Q no user adds WiFi and the pre-entry
/// outcome is returned exactly.
inline SubscriptionEquilibrium equilibrium_general(const MarketParams& p,
                                                   const SensitivityDistribution& dist, double p1,
                                                   double p2, double eps0 = 1e-4) {
    return detail::equilibrium_general_impl(p, dist, p1, p2, eps0,
                                            detail::boundary_family_roots(p, dist, p2, eps0));
}

/// Routes to the exact uniform solver when its hypotheses hold, otherwise to
/// the general solver.
inline SubscriptionEquilibrium solve_stage2(const MarketParams& p,
                                            const SensitivityDistribution& dist, double p1,
                                            double p2, double eps0 = 1e-4) {
    if (dist.kind() == SensitivityDistribution::Kind::Uniform && p.V1 == p.V2 && p.beta == 0.0)
        return equilibrium_uniform(p, p1, p2);
    return equilibrium_general(p, dist, p1, p2, eps0);
}

/// Closed-form thresholds of the five-region map. p1_hat is the price at
/// which the interior branch's sustainable add-on price meets the
/// full-market boundary's; it is found by bisection over the stated interval
/// (in load space S = sqrt((V1-u_bar-p1)/(N/Q))) and left NaN when the
/// equation has no root there.
inline RegionThresholds region_thresholds(const MarketParams& p) {
    if (!(p.alpha > 0.0)) throw unsupported_config("region_thresholds: alpha must be positive");
    RegionThresholds th;
    th.x2_hat = solve_x2_hat(p.alpha);
    th.p2_hat = boundary_branch_price(p, th.x2_hat);

    const double nq = p.congestion_unit();
    const double margin = p.V1 - p.u_bar;
    auto p4 = [&](double s) {
        const double disc = 1.0 - 3.0 * p.alpha * s;
        if (disc < 0.0) return std::numeric_limits<double>::quiet_NaN();
        const double x_lo = (1.0 - std::sqrt(disc)) / (3.0 * p.alpha);
        const double x_star = std::sqrt((1.0 - s) / p.alpha);
        return x_star * x_star + x_lo * (s - x_lo * (1.0 - p.alpha * x_lo)) - x_star;
    };
    const double s_lo = 1.0 - p.alpha;
    const double s_hi = std::min(1.0 - p.alpha * th.x2_hat * th.x2_hat, 1.0 / (3.0 * p.alpha));
    if (s_hi > s_lo) {
        const auto brackets = scan_sign_changes(p4, s_lo + 1e-9, s_hi, (s_hi - s_lo) / 4096.0);
        if (!brackets.empty()) {
            const double s = bisect(p4, brackets.front().first, brackets.front().second, 1e-13);
            th.p1_hat = margin - nq * s * s;
            const double x_star = std::sqrt((1.0 - s) / p.alpha);
            th.p2_hat_prime = p.alpha * x_star * nq * s * (1.0 - x_star);
        }
    }
    return th;
}

/// Regime label plus thresholds for a price pair; derived only for the
/// uniform / V1 = V2 / beta = 0 setting, like the closed-form map itself.
/// The label comes from the solver, not from interpolated boundary curves.
inline std::pair<Regime, RegionThresholds> region_classify(const MarketParams& p,
                                                           const SensitivityDistribution& dist,
                                                           double p1, double p2) {
    if (dist.kind() != SensitivityDistribution::Kind::Uniform || p.V1 != p.V2 || p.beta != 0.0)
        throw unsupported_config("region_classify: derived only for uniform F, V1 == V2, beta == 0");
    return {equilibrium_uniform(p, p1, p2).regime, region_thresholds(p)};
}

/// Per-user service decision at an equilibrium. Ties resolve to the cheaper
/// option: 5G-only over the add-on, joining over staying out at exactly
/// u_bar.
inline ChoiceLabel choice_of(const MarketParams& p, double theta, const SubscriptionEquilibrium& eq,
                             double p1, double p2) {
    if (!(theta >= 0.0 && theta <= 1.0)) throw std::domain_error("choice_of: theta outside [0,1]");
    if (theta <= eq.cut_low) {
        if (payoff_5g_only(p, theta, eq.state, p1) >= p.u_bar) return ChoiceLabel::FiveGOnly;
        return ChoiceLabel::Neither;
    }
    if (eq.state.x2 > 0.0 && theta <= eq.cut_high) {
        if (payoff_5g_wifi(p, theta, eq.state, p1, p2) >= p.u_bar) return ChoiceLabel::FiveGPlusWiFi;
        return ChoiceLabel::Neither;
    }
    return ChoiceLabel::Neither;
}

}  // namespace coex
