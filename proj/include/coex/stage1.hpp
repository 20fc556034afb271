#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <unordered_map>
#include <vector>

#include "coex/benchmark.hpp"
#include "coex/market.hpp"
#include "coex/propositions.hpp"
#include "coex/stage2.hpp"

namespace coex {

/// Search tolerances of the two-stage solver. eps0 drives Stage II root
/// isolation, eps1/eps2 the Stage I price grids.
struct SolverConfig {
    double eps0 = 1e-4;
    double eps1 = 1.5;
    double eps2 = 1.5;
    int max_br_iterations = 200;
    double fixed_point_tol = 3.0;

    static SolverConfig defaults(const MarketParams& p) {
        SolverConfig c;
        c.eps1 = p.V1 / 2000.0;
        c.eps2 = p.V2 > 0.0 ? p.V2 / 2000.0 : c.eps1;
        c.fixed_point_tol = 2.0 * std::max(c.eps1, c.eps2);
        return c;
    }
};

struct BestResponse {
    double price = 0.0;
    double profit = 0.0;
};

struct NashCandidate {
    double p1 = 0.0;
    double p2 = 0.0;
    double profit_5g = 0.0;
    double profit_wifi = 0.0;
    bool converged = false;
};

/// Stage I outcome: the simultaneous-pricing fixed point, its induced Stage
/// II state, and every distinct near-fixed-point found across starts.
struct PricingEquilibrium {
    double p1_star = 0.0;
    double p2_star = 0.0;
    SubscriptionEquilibrium stage2;
    double profit_5g = 0.0;
    double profit_wifi = 0.0;
    bool converged = false;
    int iterations = 0;
    std::vector<NashCandidate> candidates;
};

namespace detail {

inline std::uint64_t price_key(double v) {
    std::uint64_t k;
    std::memcpy(&k, &v, sizeof k);
    return k;
}

}  // namespace detail

/// 5G best response: argmax of pi1 over the price grid {0, eps1, ..., V1},
/// Stage II re-solved per point, ties toward the lower price, then
/// golden-section refinement inside the winning grid cell. Grid points that
/// provably cannot win (pi1 <= N*p1 below the incumbent, or prices emptying
/// the market) are skipped without changing the argmax.
inline BestResponse best_response_5g(const MarketParams& p, const SensitivityDistribution& dist,
                                     double p2, const SolverConfig& cfg) {
    if (p2 < p.c - 1e-9 * (1.0 + p.c)) throw std::domain_error("best_response_5g: p2 below c");
    p2 = std::max(p2, p.c);  // absorb one-ulp rounding from price combinations
    const bool fast_uniform =
        dist.kind() == SensitivityDistribution::Kind::Uniform && p.V1 == p.V2 && p.beta == 0.0;

    // Boundary-family roots are independent of p1; solve them once for the
    // whole grid scan.
    std::vector<double> boundary_roots;
    if (!fast_uniform) boundary_roots = detail::boundary_family_roots(p, dist, p2, cfg.eps0);

    auto profit_at = [&](double p1) {
        const SubscriptionEquilibrium eq =
            fast_uniform ? equilibrium_uniform(p, p1, p2)
                         : detail::equilibrium_general_impl(p, dist, p1, p2, cfg.eps0,
                                                            boundary_roots);
        return profit_5g(p, eq.state, p1);
    };

    const long n = std::lround(p.V1 / cfg.eps1);
    auto grid_price = [&](long i) { return (i == n) ? p.V1 : static_cast<double>(i) * cfg.eps1; };
    const double empty_above = p.V1 - p.u_bar;  // no subscriber of either kind beyond this

    double lb = 0.0;
    for (long i = 0; i <= n; i += 16) {
        const double p1 = grid_price(i);
        if (p1 > empty_above) break;
        lb = std::max(lb, profit_at(p1));
    }

    double best_p = 0.0, best_profit = -1.0;
    for (long i = 0; i <= n; ++i) {
        const double p1 = grid_price(i);
        double profit = 0.0;
        if (p1 <= empty_above && p.N * p1 >= lb) profit = profit_at(p1);
        if (profit > best_profit) {
            best_profit = profit;
            best_p = p1;
        }
    }

    const double lo = std::max(0.0, best_p - cfg.eps1);
    const double hi = std::min(p.V1, best_p + cfg.eps1);
    auto [pm, fm] = golden_max(profit_at, lo, hi, 1e-9 * p.V1);
    if (fm > best_profit) {
        best_profit = fm;
        best_p = std::clamp(pm, lo, hi);  // midpoint rounding can leave the bracket by one ulp
    }
    return {best_p, best_profit};
}

/// WiFi best response: argmax of pi2 = N*x2*(p2-c) over {c, c+eps2, ..., V2}.
/// Prices above alpha*(N/Q - beta) cannot attract any add-on user and are
/// skipped; if no price earns a positive profit the response is p2 = c.
inline BestResponse best_response_wifi(const MarketParams& p, const SensitivityDistribution& dist,
                                       double p1, const SolverConfig& cfg) {
    if (p1 < 0.0) throw std::domain_error("best_response_wifi: negative p1");
    auto x2_at = [&](double p2) { return solve_stage2(p, dist, p1, p2, cfg.eps0).state.x2; };
    auto profit_at = [&](double p2) { return p.N * x2_at(p2) * (p2 - p.c); };

    const double cap = p.alpha * std::max(p.congestion_unit() - p.beta, 0.0) + 1e-9;
    double best_p = p.c, best_profit = 0.0;
    if (p.V2 > p.c && cap > p.c) {
        const long n = std::lround((p.V2 - p.c) / cfg.eps2);
        auto grid_price = [&](long i) {
            return (i == n) ? p.V2 : p.c + static_cast<double>(i) * cfg.eps2;
        };
        double lb = 0.0;
        for (long i = 0; i <= n; i += 16) {
            const double p2 = grid_price(i);
            if (p2 > cap) break;
            lb = std::max(lb, profit_at(p2));
        }
        for (long i = 0; i <= n; ++i) {
            const double p2 = grid_price(i);
            if (p2 > cap) break;
            if (p.N * (p2 - p.c) < lb) continue;
            const double profit = profit_at(p2);
            if (profit > best_profit) {
                best_profit = profit;
                best_p = p2;
            }
        }
        const double lo = std::max(p.c, best_p - cfg.eps2);
        const double hi = std::min(p.V2, best_p + cfg.eps2);
        auto [pm, fm] = golden_max(profit_at, lo, hi, 1e-9 * std::max(p.V2, 1.0));
        if (fm > best_profit) {
            best_profit = fm;
            best_p = std::clamp(pm, lo, hi);
        }
    }
    return {best_p, best_profit};
}

/// Simultaneous-pricing equilibrium by alternating best responses from each
/// start. A state is accepted as a fixed point only after a verification
/// round: both operators' best responses must land within one grid step of
/// the state. All distinct fixed points across starts are reported; the one
/// maximizing total operator profit is designated primary. Cycling without
/// convergence is data (converged = false on the best candidate seen), not
/// an error. With beta >= N/Q the game collapses to the pre-entry one and
/// the pre-entry optimum is returned exactly.
inline PricingEquilibrium nash_equilibrium(const MarketParams& p,
                                           const SensitivityDistribution& dist,
                                           const SolverConfig& cfg,
                                           std::vector<std::pair<double, double>> starts = {}) {
    PricingEquilibrium out;

    if (p.beta >= p.congestion_unit() || p.alpha == 0.0) {
        const auto bench = optimal_price(p, dist);
        out.p1_star = bench.p1_bar;
        out.p2_star = p.c;
        out.stage2 = solve_stage2(p, dist, bench.p1_bar, p.c, cfg.eps0);
        out.profit_5g = bench.profit;
        out.profit_wifi = 0.0;
        out.converged = true;
        out.iterations = 0;
        out.candidates.push_back({out.p1_star, out.p2_star, out.profit_5g, 0.0, true});
        return out;
    }

    if (starts.empty()) {
        const double p2_top = std::max(p.V2, p.c);
        starts = {{0.0, p.c},
                  {0.0, p2_top},
                  {p.V1, p.c},
                  {p.V1, p2_top},
                  {0.5 * p.V1, 0.5 * (p.c + p2_top)}};
    }
    if (starts.empty()) throw std::invalid_argument("nash_equilibrium: needs at least one start");

    std::unordered_map<std::uint64_t, BestResponse> br5_memo, brw_memo;
    auto br5 = [&](double p2) {
        const auto key = detail::price_key(p2);
        auto it = br5_memo.find(key);
        if (it != br5_memo.end()) return it->second;
        const auto r = best_response_5g(p, dist, p2, cfg);
        br5_memo.emplace(key, r);
        return r;
    };
    auto brw = [&](double p1) {
        const auto key = detail::price_key(p1);
        auto it = brw_memo.find(key);
        if (it != brw_memo.end()) return it->second;
        const auto r = best_response_wifi(p, dist, p1, cfg);
        brw_memo.emplace(key, r);
        return r;
    };

    int total_iterations = 0;
    std::vector<NashCandidate> found;

    // One run of the iteration. Pure alternation (damping = 0) can orbit
    // when both operators ride admissibility cliffs (the loop gain turns
    // neutral); the damped relaxation contracts those orbits. A state only
    // counts as a fixed point after the verification round: both best
    // responses must land within one grid step of it.
    auto iterate = [&](double p1, double p2, double damping, int max_iters) {
        struct Outcome {
            double p1, p2;
            bool converged;
        };
        std::vector<std::pair<double, double>> history{{p1, p2}};
        for (int it = 0; it < max_iters; ++it) {
            ++total_iterations;
            const double p1_next =
                std::clamp(p1 + (1.0 - damping) * (br5(p2).price - p1), 0.0, p.V1);
            const double p2_next =
                std::max(p2 + (1.0 - damping) * (brw(p1_next).price - p2), p.c);
            const bool settled = std::abs(p1_next - p1) <= cfg.fixed_point_tol &&
                                 std::abs(p2_next - p2) <= cfg.fixed_point_tol;
            p1 = p1_next;
            p2 = p2_next;
            if (settled) {
                // Land on an exact 5G best-response image: the reported 5G
                // profit is then a true argmax value instead of an iterate
                // that may sit one grid step past a profit cliff.
                double q2 = p2;
                double q1 = br5(q2).price;
                for (int k = 0; k < 5; ++k) {
                    const double q2_next = brw(q1).price;
                    if (std::abs(q2_next - q2) <= 1e-9) break;
                    q2 = q2_next;
                    q1 = br5(q2).price;
                }
                if (std::abs(brw(q1).price - q2) <= cfg.eps2) return Outcome{q1, q2, true};
            }
            if (damping == 0.0) {
                bool cycled = false;
                for (const auto& h : history)
                    if (std::abs(h.first - p1) <= 0.25 * cfg.fixed_point_tol &&
                        std::abs(h.second - p2) <= 0.25 * cfg.fixed_point_tol) {
                        cycled = true;
                        break;
                    }
                if (cycled) break;
                history.emplace_back(p1, p2);
            }
        }
        return Outcome{p1, p2, false};
    };

    for (const auto& start : starts) {
        const double s1 = std::clamp(start.first, 0.0, p.V1);
        const double s2 = std::clamp(start.second, p.c, std::max(p.V2, p.c));
        auto run = iterate(s1, s2, 0.0, cfg.max_br_iterations);
        if (!run.converged)
            run = iterate(run.p1, run.p2, 0.5, std::min(cfg.max_br_iterations, 80));
        const double last_p1 = run.p1;
        const double last_p2 = run.p2;
        const bool converged = run.converged;

        bool known = false;
        for (const auto& f : found)
            if (std::abs(f.p1 - last_p1) <= cfg.fixed_point_tol &&
                std::abs(f.p2 - last_p2) <= cfg.fixed_point_tol && f.converged == converged)
                known = true;
        if (known) continue;
        const auto eq = solve_stage2(p, dist, last_p1, last_p2, cfg.eps0);
        found.push_back({last_p1, last_p2, profit_5g(p, eq.state, last_p1),
                         p.N * eq.state.x2 * (last_p2 - p.c), converged});
    }

    int best = -1;
    for (std::size_t i = 0; i < found.size(); ++i) {
        if (best >= 0 && found[static_cast<std::size_t>(best)].converged && !found[i].converged)
            continue;
        const bool upgrade =
            best < 0 || (found[i].converged && !found[static_cast<std::size_t>(best)].converged) ||
            (found[i].profit_5g + found[i].profit_wifi >
             found[static_cast<std::size_t>(best)].profit_5g +
                 found[static_cast<std::size_t>(best)].profit_wifi);
        if (upgrade) best = static_cast<int>(i);
    }

    const auto& sel = found[static_cast<std::size_t>(best)];
    out.p1_star = sel.p1;
    out.p2_star = sel.p2;
    out.stage2 = solve_stage2(p, dist, sel.p1, sel.p2, cfg.eps0);
    out.profit_5g = sel.profit_5g;
    out.profit_wifi = sel.profit_wifi;
    out.converged = sel.converged;
    out.iterations = total_iterations;
    out.candidates = std::move(found);
    return out;
}

/// Simplified piecewise 5G profit objective (uniform F, V1 = V2, beta = 0,
/// split regime): full-market branch N*p1 while the boundary root is
/// admissible, interior branch N*p1*(S + alpha*x2'^2) with x2' the greatest
/// interior-curve root, on the price range where that root keeps a
/// non-negative 5G-only fraction. Signals outside its stated domain.
inline double pi1_simplified(const MarketParams& p, double p1, double p2) {
    if (p.V1 != p.V2 || p.beta != 0.0)
        throw unsupported_config("pi1_simplified: requires V1 == V2 and beta == 0");
    if (!(p.alpha > 0.0)) throw unsupported_config("pi1_simplified: requires alpha > 0");
    const double nq = p.congestion_unit();
    const double margin = p.V1 - p.u_bar;

    const double x2h = solve_x2_hat(p.alpha);
    const double peak_b = boundary_branch_price(p, x2h);
    double x2_bar = std::numeric_limits<double>::quiet_NaN();
    if (p2 <= peak_b)
        x2_bar = bisect([&](double x) { return boundary_branch_price(p, x) - p2; }, x2h, 1.0, 1e-13);

    double x2_bar_prime = std::numeric_limits<double>::quiet_NaN();
    double s = 0.0;
    if (p1 < margin) {
        s = std::sqrt((margin - p1) / nq);
        const double disc = 1.0 - 3.0 * p.alpha * s;
        if (disc >= 0.0) {
            const double r = std::sqrt(disc);
            const double x_lo = (1.0 - r) / (3.0 * p.alpha);
            const double x_hi = std::min((1.0 + r) / (3.0 * p.alpha), 1.0);
            if (x_hi > x_lo && interior_branch_price(p, s, x_lo) >= p2 &&
                interior_branch_price(p, s, x_hi) <= p2)
                x2_bar_prime = bisect(
                    [&](double x) { return interior_branch_price(p, s, x) - p2; }, x_lo, x_hi,
                    1e-13);
        }
    }

    if (!std::isnan(x2_bar) && p1 <= margin - nq * std::pow(1.0 - p.alpha * x2_bar * x2_bar, 2.0))
        return p.N * p1;

    if (!std::isnan(x2_bar_prime)) {
        const double upper = margin - nq * std::pow(x2_bar_prime * (1.0 - p.alpha * x2_bar_prime), 2.0);
        if (p1 < upper) return p.N * p1 * (s + p.alpha * x2_bar_prime * x2_bar_prime);
    }
    throw unsupported_config("pi1_simplified: price pair outside the simplified-objective domain");
}

}  // namespace coex
