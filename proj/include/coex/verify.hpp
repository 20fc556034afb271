#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "coex/csv.hpp"
#include "coex/figures.hpp"
#include "coex/oracle.hpp"
#include "coex/propositions.hpp"
#include "coex/sweep.hpp"

namespace coex {

struct VerifyCheck {
    std::string name;
    bool pass = false;
    double residual = 0.0;  ///< worst deviation observed, in the check's own units
    std::string details;
};

namespace detail {

inline double rel_err(double got, double want) {
    return std::abs(got - want) / std::max(1.0, std::abs(want));
}

}  // namespace detail

/// The built-in audit suite behind `coex verify`: closed-form reproduction,
/// solver cross-agreement, agent-oracle stationarity, threshold
/// self-consistency and output determinism, at a grid scale that finishes in
/// about a minute.
inline std::vector<VerifyCheck> run_verification(std::uint64_t seed = 7, unsigned jobs = 0) {
    std::vector<VerifyCheck> checks;
    const MarketParams base(1e5, 3000, 3000, 1000, 30, 0.5, 50, 0);
    const auto uni = SensitivityDistribution::uniform();

    {  // Closed forms of the pre-entry game (uniform).
        VerifyCheck c{"benchmark_closed_form", false, 0.0, ""};
        const auto e30 = optimal_price(base, uni);
        const auto e180 = optimal_price(base.with(180, 0.5, 50, 0), uni);
        double r = detail::rel_err(e30.p1_bar, 2000.0 * 2.0 / 3.0);
        r = std::max(r, detail::rel_err(e30.x1_bar, std::sqrt(0.2)));
        r = std::max(r, detail::rel_err(e30.profit, 1e5 * std::sqrt(0.2) * 2000.0 * 2.0 / 3.0));
        r = std::max(r, detail::rel_err(e180.p1_bar, 2000.0 - 1e5 / 180.0));
        r = std::max(r, detail::rel_err(e180.x1_bar, 1.0));
        c.residual = r;
        c.pass = r < 1e-12;
        checks.push_back(c);
    }

    {  // Numeric Stage I path against the closed forms.
        VerifyCheck c{"benchmark_numeric_path", false, 0.0, ""};
        double r = 0.0;
        for (double q : {30.0, 180.0}) {
            const auto closed = optimal_price(base.with(q, 0.5, 50, 0), uni);
            const auto numeric = optimal_price_numeric(base.with(q, 0.5, 50, 0), uni);
            r = std::max(r, detail::rel_err(numeric.profit, closed.profit));
            r = std::max(r, std::abs(numeric.p1_bar - closed.p1_bar) / closed.p1_bar);
        }
        const auto texp = SensitivityDistribution::truncated_exponential(2.0);
        const auto closed = optimal_price(base.with(60, 0.5, 50, 0), texp);
        const auto numeric = optimal_price_numeric(base.with(60, 0.5, 50, 0), texp);
        r = std::max(r, detail::rel_err(numeric.profit, closed.profit));
        c.residual = r;
        c.pass = r < 1e-6;
        checks.push_back(c);
    }

    {  // Brute-force price scan against the solved optimum, all four kinds.
        VerifyCheck c{"brute_force_benchmark", false, 0.0, ""};
        const double step = 2000.0 / 2000.0;
        double worst = 0.0;
        bool ok = true;
        for (const auto& dist :
             {uni, SensitivityDistribution::truncated_normal(0.5, 1.0),
              SensitivityDistribution::truncated_exponential(2.0),
              SensitivityDistribution::truncated_pareto(2.0, 0.5)}) {
            const auto opt = optimal_price(base, dist);
            const auto [bp, bprofit] = brute_force_benchmark_price(base, dist, step);
            worst = std::max(worst, std::abs(bp - opt.p1_bar));
            ok = ok && std::abs(bp - opt.p1_bar) <= step + 1e-9 && bprofit <= opt.profit + 1e-6 * opt.profit;
        }
        c.residual = worst;
        c.pass = ok;
        checks.push_back(c);
    }

    {  // Uniform vs general Stage II solver on a price grid.
        VerifyCheck c{"stage2_cross_agreement", false, 0.0, ""};
        double worst = 0.0, worst_res = 0.0;
        for (int i = 1; i <= 8; ++i)
            for (int j = 1; j <= 8; ++j) {
                const double p1 = 2000.0 * i / 9.0;
                const double p2 = 420.0 * j / 9.0;
                const auto a = equilibrium_uniform(base, p1, p2);
                const auto b = equilibrium_general(base, uni, p1, p2);
                worst = std::max({worst, std::abs(a.state.x1 - b.state.x1),
                                  std::abs(a.state.x2 - b.state.x2)});
                worst_res = std::max({worst_res, a.residual, b.residual});
            }
        c.residual = std::max(worst, worst_res);
        c.pass = worst < 1e-8 && worst_res < 1e-8;
        checks.push_back(c);
    }

    {  // Agent dynamics versus the analytic solver.
        VerifyCheck c{"agent_oracle", false, 0.0, ""};
        const std::size_t n = 100000;
        const double tol = 3.0 / std::sqrt(static_cast<double>(n));
        double worst = 0.0;
        bool ok = true;
        for (double p1 : {300.0, 900.0, 1500.0})
            for (double p2 : {40.0, 150.0, 320.0}) {
                const auto eq = equilibrium_uniform(base, p1, p2);
                const auto st = simulate_from_equilibrium(base, uni, p1, p2, eq, n, seed,
                                                          UpdateRule::RandomSequential,
                                                          PopulationScheme::Stratified);
                ok = ok && st.converged;
                worst = std::max({worst, std::abs(st.x1_emp - eq.state.x1),
                                  std::abs(st.x2_emp - eq.state.x2)});
            }
        c.residual = worst;
        c.pass = ok && worst <= tol;
        checks.push_back(c);
    }

    {  // Cutoff pattern 1*2*0* across representative regimes.
        VerifyCheck c{"cutoff_structure", false, 0.0, ""};
        bool ok = true;
        const struct {
            double q, beta, p1, p2;
        } cases[] = {{30, 0, 300, 40},       // full-market split
                     {30, 0, 900, 150},      // 5G-only interior
                     {30, 5000, 900, 150},   // beta >= N/Q
                     {30, 0, 2500, 3000}};   // empty
        for (const auto& cs : cases) {
            const auto p = base.with(cs.q, base.alpha, base.c, cs.beta);
            const auto eq = solve_stage2(p, uni, cs.p1, cs.p2);
            ok = ok && cutoff_structure_audit(p, uni, cs.p1, cs.p2, eq);
        }
        c.pass = ok;
        checks.push_back(c);
    }

    {  // Threshold formulas: quartic residual, entry-cost monotonicity, p1_hat.
        VerifyCheck c{"threshold_consistency", false, 0.0, ""};
        double worst = 0.0;
        bool ok = true;
        for (int i = 1; i <= 40; ++i) {
            const double a = 0.02 * i;
            if (a >= 1.0) break;
            const double x = solve_x2_hat(a);
            worst = std::max(worst, std::abs(((4.0 * a * x - 3.0 * a) * x - 2.0) * x + 1.0));
        }
        ok = ok && worst < 1e-10;
        double prev = -1.0;
        for (int i = 0; i < 100; ++i) {
            const double a = 0.01 + (0.74 - 0.01) * i / 99.0;
            const double rhs = propositions::entry_cost_threshold(base.with(30, a, 50, 0));
            if (!(rhs >= prev - 1e-9)) ok = false;
            prev = rhs;
        }
        const auto th = region_thresholds(base);
        if (std::isnan(th.p1_hat)) {
            ok = false;
        } else {
            const double nq = base.congestion_unit();
            const double lo = base.V1 - base.u_bar - nq * std::pow(1.0 - base.alpha * th.x2_hat * th.x2_hat, 2.0);
            const double hi = base.V1 - base.u_bar - nq * std::pow(1.0 - base.alpha, 2.0);
            ok = ok && th.p1_hat >= lo && th.p1_hat < hi;
        }
        c.residual = worst;
        c.pass = ok;
        checks.push_back(c);
    }

    {  // Byte-identical sweep output for identical config.
        VerifyCheck c{"sweep_determinism", false, 0.0, ""};
        SweepSpec spec;
        spec.Q = {30, 120};
        spec.alpha = {0.5};
        spec.c = {50};
        spec.beta = {0.0};
        const auto cells = expand_cells(base, spec);
        const auto cfg = SolverConfig::defaults(base);
        const auto s1 = sweep_csv(run_sweep(base, uni, cfg, cells, jobs));
        const auto s2 = sweep_csv(run_sweep(base, uni, cfg, cells, jobs));
        c.pass = s1 == s2;
        checks.push_back(c);
    }

    {  // Congested-WiFi collapse: beta >= N/Q reproduces the benchmark exactly.
        VerifyCheck c{"beta_collapse", false, 0.0, ""};
        const auto row = run_cell(base, uni, SolverConfig::defaults(base), {120, 0.5, 50, 1e5 / 120.0});
        c.pass = row.pi1 == row.pi1_benchmark && row.x2 == 0.0;
        c.residual = std::abs(row.pi1 - row.pi1_benchmark);
        checks.push_back(c);
    }

    return checks;
}

inline std::string verify_csv(const std::vector<VerifyCheck>& checks) {
    CsvWriter w({"check", "status", "residual", "details"});
    for (const auto& c : checks)
        w.append_row({c.name, c.pass ? "pass" : "FAIL", format_double(c.residual), c.details});
    return w.str();
}

inline json verify_json(const std::vector<VerifyCheck>& checks) {
    json arr = json::array();
    bool all = true;
    for (const auto& c : checks) {
        arr.push_back(json{{"name", c.name}, {"pass", c.pass}, {"residual", c.residual}, {"details", c.details}});
        all = all && c.pass;
    }
    return json{{"checks", arr}, {"all_pass", all}};
}

}  // namespace coex
