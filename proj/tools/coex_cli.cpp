// Command-line front end: configuration ingestion, equilibrium solves,
// parameter sweeps, figure-data reproduction and the verification suite.
//
// Exit codes: 0 success, 1 verification failure, 2 configuration error.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "coex/coex.hpp"
#include "coex/serialize.hpp"

namespace {

struct GlobalOpts {
    std::string config_path;
    std::vector<std::string> overrides;
    unsigned jobs = 0;
    std::uint64_t seed = 7;
    std::string format;  // empty = take from config
    std::string out;     // empty = take from config
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw coex::config_error("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

coex::json default_config_doc() {
    return coex::json{
        {"params",
         {{"N", 1e5}, {"V1", 3000.0}, {"V2", 3000.0}, {"u_bar", 1000.0}, {"Q", 30.0},
          {"alpha", 0.5}, {"c", 50.0}, {"beta", 0.0}}},
        {"dist", {{"kind", "uniform"}, {"params", coex::json::object()}}}};
}

coex::RunConfig load_run_config(const GlobalOpts& g) {
    coex::json doc = g.config_path.empty()
                         ? default_config_doc()
                         : coex::parse_json_text(read_file(g.config_path), g.config_path);
    for (const auto& ov : g.overrides) coex::apply_override(doc, ov);
    coex::RunConfig cfg = coex::config_from_json(doc);
    if (!g.format.empty()) cfg.output.format = g.format;
    if (!g.out.empty()) cfg.output.path = g.out;
    if (cfg.output.format != "csv" && cfg.output.format != "json")
        throw coex::config_error("--format must be csv or json");
    return cfg;
}

void emit(const coex::OutputSpec& out, const std::string& text) {
    if (out.path == "-" || out.path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(out.path, std::ios::binary);
    if (!f) throw coex::config_error("cannot open output path '" + out.path + "'");
    f << text;
}

std::vector<double> q_grid_from(const coex::RunConfig& cfg) {
    if (cfg.sweep && !cfg.sweep->Q.empty()) return cfg.sweep->Q;
    return {30, 60, 90, 120, 150, 180, 210, 240};
}

int cmd_benchmark(const coex::RunConfig& cfg) {
    const auto qs = q_grid_from(cfg);
    if (cfg.output.format == "json") {
        coex::json rows = coex::json::array();
        for (double q : qs) {
            auto p = cfg.params.with(q, cfg.params.alpha, cfg.params.c, cfg.params.beta);
            auto eq = coex::optimal_price(p, cfg.dist);
            auto j = coex::to_json(eq);
            j["Q"] = q;
            rows.push_back(j);
        }
        emit(cfg.output, coex::json{{"rows", rows}}.dump(2) + "\n");
        return 0;
    }
    coex::CsvWriter w({"Q", "p1_bar", "x1_bar", "theta_cut", "profit", "branch"});
    for (double q : qs) {
        auto p = cfg.params.with(q, cfg.params.alpha, cfg.params.c, cfg.params.beta);
        auto eq = coex::optimal_price(p, cfg.dist);
        w.append_row({coex::format_double(q), coex::format_double(eq.p1_bar),
                      coex::format_double(eq.x1_bar), coex::format_double(eq.theta_cut),
                      coex::format_double(eq.profit), coex::to_string(eq.branch)});
    }
    emit(cfg.output, w.str());
    return 0;
}

int cmd_stage2(const coex::RunConfig& cfg, double p1, double p2) {
    const auto eq = coex::solve_stage2(cfg.params, cfg.dist, p1, p2, cfg.solver.eps0);
    emit(cfg.output, coex::to_json(eq).dump(2) + "\n");
    return 0;
}

int cmd_stage2_map(const coex::RunConfig& cfg, int n1, int n2, double p1_max, double p2_max) {
    if (p1_max <= 0.0) p1_max = cfg.params.V1 - cfg.params.u_bar;
    if (p2_max <= 0.0)
        p2_max = std::max(1.0, cfg.params.alpha * cfg.params.congestion_unit() * 1.05);
    coex::CsvWriter w({"p1", "p2", "regime", "x1", "x2"});
    for (int i = 0; i <= n1; ++i)
        for (int j = 0; j <= n2; ++j) {
            const double p1 = p1_max * i / n1;
            const double p2 = p2_max * j / n2;
            const auto eq = coex::solve_stage2(cfg.params, cfg.dist, p1, p2, cfg.solver.eps0);
            w.append_row({coex::format_double(p1), coex::format_double(p2),
                          coex::to_string(eq.regime), coex::format_double(eq.state.x1),
                          coex::format_double(eq.state.x2)});
        }
    emit(cfg.output, w.str());
    return 0;
}

int cmd_equilibrium(const coex::RunConfig& cfg) {
    const auto eq = coex::nash_equilibrium(cfg.params, cfg.dist, cfg.solver);
    emit(cfg.output, coex::to_json(eq).dump(2) + "\n");
    return 0;
}

int cmd_sweep(const coex::RunConfig& cfg, unsigned jobs) {
    if (!cfg.sweep) throw coex::config_error("sweep: config has no 'sweep' grid");
    const auto cells = coex::expand_cells(cfg.params, *cfg.sweep);
    const auto rows = coex::run_sweep(cfg.params, cfg.dist, cfg.solver, cells, jobs);
    if (cfg.output.format == "json")
        emit(cfg.output, coex::sweep_json(rows).dump(2) + "\n");
    else
        emit(cfg.output, coex::sweep_csv(rows));
    return 0;
}

int cmd_payoffs(const coex::RunConfig& cfg, bool explicit_prices, double p1, double p2) {
    std::optional<std::pair<double, double>> prices;
    if (explicit_prices) prices = {p1, p2};
    const auto series = coex::payoff_series(cfg.params, cfg.dist, cfg.solver, prices);
    emit(cfg.output, coex::payoff_csv(series));
    return 0;
}

int cmd_figures(const coex::RunConfig& cfg, const std::string& figure_id, unsigned jobs) {
    emit(cfg.output, coex::figure_series(figure_id, jobs));
    return 0;
}

int cmd_verify(const coex::RunConfig& cfg, std::uint64_t seed, unsigned jobs) {
    const auto checks = coex::run_verification(seed, jobs);
    bool all = true;
    for (const auto& c : checks) all = all && c.pass;
    if (cfg.output.format == "json") {
        emit(cfg.output, coex::verify_json(checks).dump(2) + "\n");
    } else {
        std::cout << coex::verify_csv(checks);
        if (cfg.output.path != "-" && !cfg.output.path.empty()) {
            std::ofstream f(cfg.output.path, std::ios::binary);
            f << coex::verify_json(checks).dump(2) << "\n";
        }
    }
    return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"coex: pricing equilibria for a congestible cellular network co-existing with a "
                 "crowdsourced WiFi add-on"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOpts g;
    app.add_option("--config", g.config_path, "JSON config file");
    app.add_option("--set", g.overrides, "override config fields, dot path (e.g. params.Q=60)");
    app.add_option("--jobs", g.jobs, "worker threads for sweeps/figures (0 = all cores)");
    app.add_option("--seed", g.seed, "seed for sampled populations");
    app.add_option("--format", g.format, "output format: csv or json");
    app.add_option("--out", g.out, "output path ('-' = stdout)");

    auto* sub_benchmark = app.add_subcommand("benchmark", "pre-entry equilibrium over the Q grid");
    auto* sub_stage2 = app.add_subcommand("stage2", "user-subscription equilibrium at (p1, p2)");
    double p1 = 0.0, p2 = 0.0;
    sub_stage2->add_option("--p1", p1, "5G price")->required();
    sub_stage2->add_option("--p2", p2, "WiFi add-on price")->required();
    auto* sub_map = app.add_subcommand("stage2-map", "regime label over a price grid");
    int map_n1 = 40, map_n2 = 40;
    double map_p1max = 0.0, map_p2max = 0.0;
    sub_map->add_option("--n1", map_n1, "grid points along p1");
    sub_map->add_option("--n2", map_n2, "grid points along p2");
    sub_map->add_option("--p1-max", map_p1max, "p1 range (default V1 - u_bar)");
    sub_map->add_option("--p2-max", map_p2max, "p2 range (default alpha*N/Q)");
    auto* sub_eq = app.add_subcommand("equilibrium", "simultaneous-pricing equilibrium");
    auto* sub_sweep = app.add_subcommand("sweep", "parameter sweep from the config grid");
    auto* sub_payoffs = app.add_subcommand("payoffs", "user payoff curves vs the pre-entry game");
    double pay_p1 = -1.0, pay_p2 = -1.0;
    auto* opt_pp1 = sub_payoffs->add_option("--p1", pay_p1, "explicit post-entry 5G price");
    auto* opt_pp2 = sub_payoffs->add_option("--p2", pay_p2, "explicit post-entry WiFi price");
    opt_pp1->needs(opt_pp2);
    opt_pp2->needs(opt_pp1);
    auto* sub_figures = app.add_subcommand("figures", "named figure data series");
    std::string figure_id;
    sub_figures->add_option("id", figure_id, "figure id")->required();
    auto* sub_verify = app.add_subcommand("verify", "run the audit suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        const coex::RunConfig cfg = load_run_config(g);
        if (sub_benchmark->parsed()) return cmd_benchmark(cfg);
        if (sub_stage2->parsed()) return cmd_stage2(cfg, p1, p2);
        if (sub_map->parsed()) return cmd_stage2_map(cfg, map_n1, map_n2, map_p1max, map_p2max);
        if (sub_eq->parsed()) return cmd_equilibrium(cfg);
        if (sub_sweep->parsed()) return cmd_sweep(cfg, g.jobs);
        if (sub_payoffs->parsed())
            return cmd_payoffs(cfg, opt_pp1->count() > 0, pay_p1, pay_p2);
        if (sub_figures->parsed()) return cmd_figures(cfg, figure_id, g.jobs);
        if (sub_verify->parsed()) return cmd_verify(cfg, g.seed, g.jobs);
        std::cerr << "no subcommand\n";
        return 2;
    } catch (const coex::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const coex::unsupported_config& e) {
        std::cerr << "unsupported configuration: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
