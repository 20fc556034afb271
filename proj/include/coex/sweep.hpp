#pragma once

#include <atomic>
#include <thread>
#include <vector>

#include "coex/config.hpp"
#include "coex/csv.hpp"
#include "coex/oracle.hpp"
#include "coex/stage1.hpp"

namespace coex {

struct SweepCell {
    double Q, alpha, c, beta;
};

struct SweepRow {
    SweepCell cell;
    double p1_star = 0.0, p2_star = 0.0;
    double x1 = 0.0, x2 = 0.0;
    double pi1 = 0.0, pi2 = 0.0;
    double pi1_benchmark = 0.0, p1_benchmark = 0.0;
    double sw = 0.0, sw_benchmark = 0.0;
    bool converged = false;
};

inline std::vector<SweepCell> expand_cells(const MarketParams& base, const SweepSpec& spec) {
    std::vector<double> qs = spec.Q.empty() ? std::vector<double>{base.Q} : spec.Q;
    std::vector<double> alphas = spec.alpha.empty() ? std::vector<double>{base.alpha} : spec.alpha;
    std::vector<double> costs = spec.c.empty() ? std::vector<double>{base.c} : spec.c;
    std::vector<BetaSpec> betas =
        spec.beta.empty() ? std::vector<BetaSpec>{base.beta} : spec.beta;
    std::vector<SweepCell> cells;
    for (double q : qs)
        for (double a : alphas)
            for (double cost : costs)
                for (const auto& b : betas) cells.push_back({q, a, cost, resolve_beta(b, base, q)});
    return cells;
}

/// Full two-stage solve of one parameter cell, plus the pre-entry benchmark
/// and both welfare totals.
inline SweepRow run_cell(const MarketParams& base, const SensitivityDistribution& dist,
                         const SolverConfig& cfg_base, const SweepCell& cell) {
    const MarketParams p = base.with(cell.Q, cell.alpha, cell.c, cell.beta);
    SolverConfig cfg = cfg_base;

    SweepRow row;
    row.cell = cell;

    const auto bench = optimal_price(p, dist);
    row.p1_benchmark = bench.p1_bar;
    row.pi1_benchmark = bench.profit;
    row.sw_benchmark = social_welfare(p, dist, SubscriptionState(bench.x1_bar, 0.0), bench.p1_bar,
                                      0.0, WelfareRegime::PreWifi);

    const auto nash = nash_equilibrium(p, dist, cfg);
    row.p1_star = nash.p1_star;
    row.p2_star = nash.p2_star;
    row.x1 = nash.stage2.state.x1;
    row.x2 = nash.stage2.state.x2;
    row.pi1 = nash.profit_5g;
    row.pi2 = nash.profit_wifi;
    row.converged = nash.converged;
    row.sw = social_welfare(p, dist, nash.stage2.state, nash.p1_star, nash.p2_star,
                            WelfareRegime::PostWifi);
    return row;
}

/// Runs every cell on a small worker pool. Rows come back ordered by grid
/// index no matter which worker finished first, so output is reproducible
/// for any job count.
inline std::vector<SweepRow> run_sweep(const MarketParams& base, const SensitivityDistribution& dist,
                                       const SolverConfig& cfg, const std::vector<SweepCell>& cells,
                                       unsigned jobs = 0) {
    if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
    jobs = std::min<unsigned>(jobs, cells.size() ? static_cast<unsigned>(cells.size()) : 1u);

    std::vector<SweepRow> rows(cells.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size()) return;
            rows[i] = run_cell(base, dist, cfg, cells[i]);
        }
    };
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return rows;
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
    CsvWriter w({"Q", "alpha", "c", "beta", "p1_star", "p2_star", "x1", "x2", "pi1", "pi2",
                 "pi1_benchmark", "p1_benchmark", "sw", "sw_benchmark", "converged"});
    for (const auto& r : rows)
        w.append_row({format_double(r.cell.Q), format_double(r.cell.alpha), format_double(r.cell.c),
                      format_double(r.cell.beta), format_double(r.p1_star), format_double(r.p2_star),
                      format_double(r.x1), format_double(r.x2), format_double(r.pi1),
                      format_double(r.pi2), format_double(r.pi1_benchmark),
                      format_double(r.p1_benchmark), format_double(r.sw),
                      format_double(r.sw_benchmark), r.converged ? "1" : "0"});
    return w.str();
}

inline json sweep_json(const std::vector<SweepRow>& rows) {
    json arr = json::array();
    for (const auto& r : rows)
        arr.push_back(json{{"Q", r.cell.Q},
                           {"alpha", r.cell.alpha},
                           {"c", r.cell.c},
                           {"beta", r.cell.beta},
                           {"p1_star", r.p1_star},
                           {"p2_star", r.p2_star},
                           {"x1", r.x1},
                           {"x2", r.x2},
                           {"pi1", r.pi1},
                           {"pi2", r.pi2},
                           {"pi1_benchmark", r.pi1_benchmark},
                           {"p1_benchmark", r.p1_benchmark},
                           {"sw", r.sw},
                           {"sw_benchmark", r.sw_benchmark},
                           {"converged", r.converged}});
    return json{{"rows", arr}};
}

}  // namespace coex
