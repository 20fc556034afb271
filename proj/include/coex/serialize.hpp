#pragma once

#include "coex/config.hpp"
#include "coex/figures.hpp"
#include "coex/stage1.hpp"
#include "coex/stage2.hpp"

namespace coex {

inline json to_json(const SubscriptionEquilibrium& eq) {
    json cands = json::array();
    for (const auto& c : eq.candidates)
        cands.push_back(json{{"x1", c.x1}, {"x2", c.x2}, {"family", to_string(c.family)}});
    return json{{"x1", eq.state.x1},       {"x2", eq.state.x2},
                {"cut_low", eq.cut_low},   {"cut_high", eq.cut_high},
                {"regime", to_string(eq.regime)}, {"residual", eq.residual},
                {"candidates", cands}};
}

inline json to_json(const PricingEquilibrium& eq) {
    json cands = json::array();
    for (const auto& c : eq.candidates)
        cands.push_back(json{{"p1", c.p1},
                             {"p2", c.p2},
                             {"profit_5g", c.profit_5g},
                             {"profit_wifi", c.profit_wifi},
                             {"converged", c.converged}});
    return json{{"p1_star", eq.p1_star},
                {"p2_star", eq.p2_star},
                {"profit_5g", eq.profit_5g},
                {"profit_wifi", eq.profit_wifi},
                {"converged", eq.converged},
                {"iterations", eq.iterations},
                {"stage2", to_json(eq.stage2)},
                {"candidates", cands}};
}

inline json to_json(const BenchmarkEquilibrium& eq) {
    return json{{"p1_bar", eq.p1_bar},   {"x1_bar", eq.x1_bar}, {"theta_cut", eq.theta_cut},
                {"profit", eq.profit},   {"branch", to_string(eq.branch)},
                {"method", eq.method}};
}

}  // namespace coex
