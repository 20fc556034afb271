#pragma once

#include <optional>
#include <string>
#include <vector>

#include "coex/csv.hpp"
#include "coex/sweep.hpp"

namespace coex {

/// One point of the user-payoff comparison series: the pre-entry 5G payoff
/// curve, the best post-entry payoff, the realized payoff (floored at the
/// reservation), and the post-entry service choice.
struct PayoffPoint {
    double theta = 0.0;
    double u_benchmark = 0.0;
    double u_post = 0.0;
    double realized = 0.0;
    ChoiceLabel choice = ChoiceLabel::Neither;
};

struct PayoffSeries {
    BenchmarkEquilibrium benchmark;
    double p1 = 0.0;
    double p2 = 0.0;
    SubscriptionEquilibrium stage2;
    std::vector<PayoffPoint> points;
};

/// Payoff curves on a theta grid, either at the solved pricing equilibrium
/// or at explicitly given post-entry prices.
inline PayoffSeries payoff_series(const MarketParams& p, const SensitivityDistribution& dist,
                                  const SolverConfig& cfg,
                                  std::optional<std::pair<double, double>> explicit_prices,
                                  int n_grid = 200) {
    PayoffSeries out;
    out.benchmark = optimal_price(p, dist);
    if (explicit_prices) {
        out.p1 = explicit_prices->first;
        out.p2 = explicit_prices->second;
        out.stage2 = solve_stage2(p, dist, out.p1, out.p2, cfg.eps0);
    } else {
        const auto nash = nash_equilibrium(p, dist, cfg);
        out.p1 = nash.p1_star;
        out.p2 = nash.p2_star;
        out.stage2 = nash.stage2;
    }
    for (int i = 0; i <= n_grid; ++i) {
        PayoffPoint pt;
        pt.theta = static_cast<double>(i) / n_grid;
        pt.u_benchmark = payoff_benchmark(p, pt.theta, out.benchmark.x1_bar, out.benchmark.p1_bar);
        const double u1 = payoff_5g_only(p, pt.theta, out.stage2.state, out.p1);
        const double u2 = payoff_5g_wifi(p, pt.theta, out.stage2.state, out.p1, out.p2);
        pt.u_post = std::max(u1, u2);
        pt.realized = std::max(pt.u_post, p.u_bar);
        pt.choice = choice_of(p, pt.theta, out.stage2, out.p1, out.p2);
        out.points.push_back(pt);
    }
    return out;
}

inline std::string payoff_csv(const PayoffSeries& s) {
    CsvWriter w({"theta", "u1_benchmark", "u_post_best", "u_realized", "choice"});
    for (const auto& pt : s.points)
        w.append_row({format_double(pt.theta), format_double(pt.u_benchmark),
                      format_double(pt.u_post), format_double(pt.realized),
                      std::to_string(static_cast<int>(pt.choice))});
    return w.str();
}

inline const std::vector<std::string>& figure_ids() {
    static const std::vector<std::string> ids{"price_vs_Q",  "x2_vs_Q",      "profit_vs_Q",
                                              "welfare_vs_Q", "price_vs_V2", "profit_vs_V2",
                                              "beta_price",  "beta_profit"};
    return ids;
}

/// The data series behind the standard figure set, with their
/// parameterizations hard-coded as presets (N = 1e5, V1 = 3000,
/// u_bar = 1000; per-figure alpha, c, beta and distribution).
inline std::string figure_series(const std::string& figure_id, unsigned jobs = 0) {
    const std::vector<double> q_grid{30, 60, 90, 120, 150, 180, 210, 240};
    const auto tn = SensitivityDistribution::truncated_normal(0.5, 1.0);
    const auto uni = SensitivityDistribution::uniform();

    auto run_grid = [&](const MarketParams& base, const SensitivityDistribution& dist,
                        const std::vector<SweepCell>& cells) {
        return run_sweep(base, dist, SolverConfig::defaults(base), cells, jobs);
    };

    if (figure_id == "price_vs_Q" || figure_id == "profit_vs_Q" || figure_id == "welfare_vs_Q") {
        const MarketParams base(1e5, 3000, 3000, 1000, 30, 0.5, 100, 0);
        std::vector<SweepCell> cells;
        for (double a : {0.2, 0.5, 0.8})
            for (double q : q_grid) cells.push_back({q, a, 100.0, 0.0});
        const auto rows = run_grid(base, tn, cells);
        CsvWriter w({"alpha", "Q",
                     figure_id == "price_vs_Q"    ? "p1_benchmark"
                     : figure_id == "profit_vs_Q" ? "pi1_benchmark"
                                                  : "sw_benchmark",
                     figure_id == "price_vs_Q"    ? "p1_star"
                     : figure_id == "profit_vs_Q" ? "pi1_star"
                                                  : "sw",
                     "converged"});
        for (const auto& r : rows) {
            double bench = r.p1_benchmark, post = r.p1_star;
            if (figure_id == "profit_vs_Q") bench = r.pi1_benchmark, post = r.pi1;
            if (figure_id == "welfare_vs_Q") bench = r.sw_benchmark, post = r.sw;
            w.append_row({format_double(r.cell.alpha), format_double(r.cell.Q),
                          format_double(bench), format_double(post), r.converged ? "1" : "0"});
        }
        return w.str();
    }

    if (figure_id == "x2_vs_Q") {
        const MarketParams base(1e5, 3000, 3000, 1000, 30, 0.8, 100, 0);
        std::vector<SweepCell> cells;
        for (double q : q_grid) cells.push_back({q, 0.8, 100.0, 0.0});
        const auto rows = run_grid(base, tn, cells);
        CsvWriter w({"Q", "x1_star", "x2_star", "converged"});
        for (const auto& r : rows)
            w.append_row({format_double(r.cell.Q), format_double(r.x1), format_double(r.x2),
                          r.converged ? "1" : "0"});
        return w.str();
    }

    if (figure_id == "price_vs_V2" || figure_id == "profit_vs_V2") {
        CsvWriter w({"V2", "Q", figure_id == "price_vs_V2" ? "p1_benchmark" : "pi1_benchmark",
                     figure_id == "price_vs_V2" ? "p1_star" : "pi1_star", "converged"});
        for (double v2 : {2000.0, 2500.0, 3000.0}) {
            const MarketParams base(1e5, 3000, v2, 1000, 30, 0.5, 50, 0);
            std::vector<SweepCell> cells;
            for (double q : q_grid) cells.push_back({q, 0.5, 50.0, 0.0});
            const auto rows = run_grid(base, tn, cells);
            for (const auto& r : rows) {
                const double bench = figure_id == "price_vs_V2" ? r.p1_benchmark : r.pi1_benchmark;
                const double post = figure_id == "price_vs_V2" ? r.p1_star : r.pi1;
                w.append_row({format_double(v2), format_double(r.cell.Q), format_double(bench),
                              format_double(post), r.converged ? "1" : "0"});
            }
        }
        return w.str();
    }

    if (figure_id == "beta_price" || figure_id == "beta_profit") {
        const MarketParams base(1e5, 3000, 3000, 1000, 30, 0.5, 50, 0);
        CsvWriter w({"beta", "Q", figure_id == "beta_price" ? "p1_benchmark" : "pi1_benchmark",
                     figure_id == "beta_price" ? "p1_star" : "pi1_star", "converged"});
        const std::vector<BetaSpec> betas{0.0, 100.0, 300.0, std::string("N/Q")};
        for (const auto& b : betas) {
            std::vector<SweepCell> cells;
            for (double q : q_grid) cells.push_back({q, 0.5, 50.0, resolve_beta(b, base, q)});
            const auto rows = run_grid(base, uni, cells);
            const std::string label =
                std::holds_alternative<double>(b) ? format_double(std::get<double>(b)) : "N/Q";
            for (const auto& r : rows) {
                const double bench = figure_id == "beta_price" ? r.p1_benchmark : r.pi1_benchmark;
                const double post = figure_id == "beta_price" ? r.p1_star : r.pi1;
                w.append_row({label, format_double(r.cell.Q), format_double(bench),
                              format_double(post), r.converged ? "1" : "0"});
            }
        }
        return w.str();
    }

    throw config_error("figures: unknown figure_id '" + figure_id + "'");
}

}  // namespace coex
