#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <unordered_set>
#include <vector>

#include "coex/benchmark.hpp"
#include "coex/market.hpp"
#include "coex/stage2.hpp"

namespace coex {

enum class UpdateRule { Synchronous, RandomSequential };

/// How the finite population represents the continuum: seeded inverse-cdf
/// draws, or the stratified grid theta_i = F^{-1}((i+1/2)/n) that removes
/// empirical-cdf noise (useful when certifying stationarity, where weakly
/// damped equilibria amplify sampling error).
enum class PopulationScheme { Sampled, Stratified };

/// A sampled finite population standing in for the continuum of users.
struct AgentPopulation {
    std::vector<double> thetas;
    std::vector<ChoiceLabel> choices;
    std::uint64_t seed = 0;
};

struct SimulationResult {
    double x1_emp = 0.0;
    double x2_emp = 0.0;
    bool converged = false;
    int rounds = 0;
};

namespace detail {

/// Best reply of one agent given the others' counts. Candidate choices are
/// evaluated under the state they would induce (the agent's own membership
/// included), and ties follow the analytic rule: 5G-only beats the add-on,
/// joining beats staying out at exactly u_bar.
inline ChoiceLabel agent_best_reply(const MarketParams& p, double theta, double n1_others,
                                    double n2_others, double n_total, double p1, double p2) {
    const double inv = 1.0 / n_total;
    const SubscriptionState s1((n1_others + 1.0) * inv, n2_others * inv);
    const double u1 = payoff_5g_only(p, theta, s1, p1);
    const SubscriptionState s2(n1_others * inv, (n2_others + 1.0) * inv);
    const double u2 = payoff_5g_wifi(p, theta, s2, p1, p2);
    if (u1 >= u2) return u1 >= p.u_bar ? ChoiceLabel::FiveGOnly : ChoiceLabel::Neither;
    return u2 >= p.u_bar ? ChoiceLabel::FiveGPlusWiFi : ChoiceLabel::Neither;
}

}  // namespace detail

/// Discrete best-response dynamics over a sampled population. Agents start
/// at Neither (or at a caller-provided assignment) and re-pick the
/// payoff-maximizing service each round, either against a frozen snapshot of
/// the round-start counts (Synchronous) or one at a time in a reshuffled
/// order with counts updated immediately (RandomSequential). Stops when a
/// full round changes no choice, when the aggregate state revisits an
/// earlier round (a cycle; synchronous updates are only neutrally stable in
/// interior regimes and can orbit forever), or after 10^4 rounds.
inline std::vector<double> population_thetas(const SensitivityDistribution& dist,
                                             std::size_t n_agents, std::uint64_t seed,
                                             PopulationScheme scheme) {
    if (scheme == PopulationScheme::Sampled) return dist.sample(n_agents, seed);
    std::vector<double> thetas(n_agents);
    for (std::size_t i = 0; i < n_agents; ++i)
        thetas[i] = dist.inverse_cdf((static_cast<double>(i) + 0.5) / static_cast<double>(n_agents));
    return thetas;
}

inline SimulationResult simulate_choices(const MarketParams& p, const SensitivityDistribution& dist,
                                         double p1, double p2, std::size_t n_agents,
                                         std::uint64_t seed, UpdateRule rule,
                                         AgentPopulation* population_out = nullptr,
                                         const std::vector<ChoiceLabel>* initial = nullptr,
                                         PopulationScheme scheme = PopulationScheme::Sampled) {
    if (n_agents < 100) throw std::invalid_argument("simulate_choices: n_agents must be >= 100");
    AgentPopulation pop;
    pop.seed = seed;
    pop.thetas = population_thetas(dist, n_agents, seed, scheme);
    pop.choices.assign(n_agents, ChoiceLabel::Neither);
    if (initial) {
        if (initial->size() != n_agents)
            throw std::invalid_argument("simulate_choices: initial assignment size mismatch");
        pop.choices = *initial;
    }

    const double n = static_cast<double>(n_agents);
    long n1 = 0, n2 = 0;
    for (auto c : pop.choices) {
        if (c == ChoiceLabel::FiveGOnly) ++n1;
        if (c == ChoiceLabel::FiveGPlusWiFi) ++n2;
    }

    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<std::uint32_t> order(n_agents);
    std::iota(order.begin(), order.end(), 0u);

    std::unordered_set<std::uint64_t> seen;
    seen.insert((static_cast<std::uint64_t>(n1) << 32) | static_cast<std::uint64_t>(n2));

    SimulationResult res;
    const int max_rounds = 10000;
    for (int round = 0; round < max_rounds; ++round) {
        bool changed = false;
        if (rule == UpdateRule::Synchronous) {
            const long snap1 = n1, snap2 = n2;
            for (std::size_t i = 0; i < n_agents; ++i) {
                const ChoiceLabel cur = pop.choices[i];
                const double o1 = static_cast<double>(snap1) - (cur == ChoiceLabel::FiveGOnly);
                const double o2 = static_cast<double>(snap2) - (cur == ChoiceLabel::FiveGPlusWiFi);
                const ChoiceLabel next =
                    detail::agent_best_reply(p, pop.thetas[i], o1, o2, n, p1, p2);
                if (next != cur) {
                    changed = true;
                    n1 += (next == ChoiceLabel::FiveGOnly) - (cur == ChoiceLabel::FiveGOnly);
                    n2 += (next == ChoiceLabel::FiveGPlusWiFi) - (cur == ChoiceLabel::FiveGPlusWiFi);
                    pop.choices[i] = next;
                }
            }
        } else {
            std::shuffle(order.begin(), order.end(), rng);
            for (auto idx : order) {
                const ChoiceLabel cur = pop.choices[idx];
                const double o1 = static_cast<double>(n1) - (cur == ChoiceLabel::FiveGOnly);
                const double o2 = static_cast<double>(n2) - (cur == ChoiceLabel::FiveGPlusWiFi);
                const ChoiceLabel next =
                    detail::agent_best_reply(p, pop.thetas[idx], o1, o2, n, p1, p2);
                if (next != cur) {
                    changed = true;
                    n1 += (next == ChoiceLabel::FiveGOnly) - (cur == ChoiceLabel::FiveGOnly);
                    n2 += (next == ChoiceLabel::FiveGPlusWiFi) - (cur == ChoiceLabel::FiveGPlusWiFi);
                    pop.choices[idx] = next;
                }
            }
        }
        res.rounds = round + 1;
        if (!changed) {
            res.converged = true;
            break;
        }
        const std::uint64_t key = (static_cast<std::uint64_t>(n1) << 32) | static_cast<std::uint64_t>(n2);
        if (rule == UpdateRule::Synchronous && !seen.insert(key).second) break;  // cycling
    }

    res.x1_emp = static_cast<double>(n1) / n;
    res.x2_emp = static_cast<double>(n2) / n;
    if (population_out) *population_out = std::move(pop);
    return res;
}

/// Seeds the population at the analytic equilibrium's choice partition and
/// runs the dynamics from there. A correct equilibrium is (near-)stationary:
/// the settled empirical fractions stay within sampling noise of (x1*, x2*).
inline SimulationResult simulate_from_equilibrium(const MarketParams& p,
                                                  const SensitivityDistribution& dist, double p1,
                                                  double p2, const SubscriptionEquilibrium& eq,
                                                  std::size_t n_agents, std::uint64_t seed,
                                                  UpdateRule rule,
                                                  PopulationScheme scheme = PopulationScheme::Sampled) {
    const auto thetas = population_thetas(dist, n_agents, seed, scheme);
    std::vector<ChoiceLabel> init(n_agents);
    for (std::size_t i = 0; i < n_agents; ++i) init[i] = choice_of(p, thetas[i], eq, p1, p2);
    return simulate_choices(p, dist, p1, p2, n_agents, seed, rule, nullptr, &init, scheme);
}

/// Exhaustive grid argmax of the pre-entry profit; the independent check on
/// the closed-form pricing path.
inline std::pair<double, double> brute_force_benchmark_price(const MarketParams& p,
                                                             const SensitivityDistribution& dist,
                                                             double grid_step) {
    if (!(grid_step > 0.0)) throw std::invalid_argument("brute_force_benchmark_price: step <= 0");
    const double top = p.V1 - p.u_bar;
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
    return {best_p, best_profit};
}

/// True when the choice labels along a sorted theta grid at the analytic
/// equilibrium form the pattern 1*2*0* (any block possibly empty).
inline bool cutoff_structure_audit(const MarketParams& p, const SensitivityDistribution& dist,
                                   double p1, double p2, const SubscriptionEquilibrium& eq,
                                   int n_grid = 1000) {
    (void)dist;  // cutoffs are already quantile-space values inside eq
    if (n_grid < 100) throw std::invalid_argument("cutoff_structure_audit: n_grid must be >= 100");
    int phase = 0;  // 0: in 1-block, 1: in 2-block, 2: in 0-block
    for (int i = 0; i <= n_grid; ++i) {
        const double theta = static_cast<double>(i) / n_grid;
        const ChoiceLabel c = choice_of(p, theta, eq, p1, p2);
        switch (c) {
            case ChoiceLabel::FiveGOnly:
                if (phase > 0) return false;
                break;
            case ChoiceLabel::FiveGPlusWiFi:
                if (phase > 1) return false;
                phase = 1;
                break;
            case ChoiceLabel::Neither:
                phase = 2;
                break;
        }
    }
    return true;
}

}  // namespace coex
