#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "coex/distributions.hpp"
#include "coex/market.hpp"
#include "coex/stage1.hpp"

namespace coex {

/// Malformed or inconsistent configuration; maps to exit code 2 in the CLI.
class config_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using json = nlohmann::json;

/// A sweep beta entry: either a literal value or one derived from the cell's
/// Q ("N/Q", "N/2Q").
using BetaSpec = std::variant<double, std::string>;

struct SweepSpec {
    std::vector<double> Q;
    std::vector<double> alpha;
    std::vector<double> c;
    std::vector<BetaSpec> beta;
};

struct OutputSpec {
    std::string format = "csv";  // csv | json
    std::string path = "-";      // "-" = stdout
};

struct RunConfig {
    MarketParams params;
    SensitivityDistribution dist;
    SolverConfig solver;
    std::optional<SweepSpec> sweep;
    OutputSpec output;
};

namespace detail {

inline double require_number(const json& j, const std::string& key) {
    if (!j.contains(key)) throw config_error("config: missing field '" + key + "'");
    if (!j[key].is_number()) throw config_error("config: field '" + key + "' must be a number");
    return j[key].get<double>();
}

inline double number_or(const json& j, const std::string& key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number()) throw config_error("config: field '" + key + "' must be a number");
    return j[key].get<double>();
}

}  // namespace detail

inline MarketParams params_from_json(const json& j) {
    try {
        return MarketParams(detail::require_number(j, "N"), detail::require_number(j, "V1"),
                            detail::require_number(j, "V2"), detail::require_number(j, "u_bar"),
                            detail::require_number(j, "Q"), detail::require_number(j, "alpha"),
                            detail::require_number(j, "c"), detail::number_or(j, "beta", 0.0));
    } catch (const std::invalid_argument& e) {
        throw config_error(std::string("config: params: ") + e.what());
    }
}

inline json params_to_json(const MarketParams& p) {
    return json{{"N", p.N},     {"V1", p.V1},       {"V2", p.V2}, {"u_bar", p.u_bar},
                {"Q", p.Q},     {"alpha", p.alpha}, {"c", p.c},   {"beta", p.beta}};
}

inline SensitivityDistribution dist_from_json(const json& j) {
    if (!j.contains("kind") || !j["kind"].is_string())
        throw config_error("config: dist: missing string field 'kind'");
    const std::string kind = j["kind"].get<std::string>();
    const json params = j.contains("params") ? j["params"] : json::object();
    try {
        if (kind == "uniform") return SensitivityDistribution::uniform();
        if (kind == "truncated_normal")
            return SensitivityDistribution::truncated_normal(detail::require_number(params, "mean"),
                                                             detail::require_number(params, "stdev"));
        if (kind == "truncated_exponential")
            return SensitivityDistribution::truncated_exponential(
                detail::require_number(params, "rate"));
        if (kind == "truncated_pareto")
            return SensitivityDistribution::truncated_pareto(detail::require_number(params, "shape"),
                                                             detail::require_number(params, "scale"));
    } catch (const std::invalid_argument& e) {
        throw config_error(std::string("config: dist: ") + e.what());
    }
    throw config_error("config: dist: unknown kind '" + kind + "'");
}

inline json dist_to_json(const SensitivityDistribution& d) {
    json params = json::object();
    switch (d.kind()) {
        case SensitivityDistribution::Kind::Uniform:
            break;
        case SensitivityDistribution::Kind::TruncatedNormal:
            params = {{"mean", d.param_a()}, {"stdev", d.param_b()}};
            break;
        case SensitivityDistribution::Kind::TruncatedExponential:
            params = {{"rate", d.param_a()}};
            break;
        case SensitivityDistribution::Kind::TruncatedPareto:
            params = {{"shape", d.param_a()}, {"scale", d.param_b()}};
            break;
    }
    return json{{"kind", d.kind_name()}, {"params", params}};
}

inline SolverConfig solver_from_json(const json& j, const MarketParams& p) {
    SolverConfig cfg = SolverConfig::defaults(p);
    cfg.eps0 = detail::number_or(j, "eps0", cfg.eps0);
    cfg.eps1 = detail::number_or(j, "eps1", cfg.eps1);
    cfg.eps2 = detail::number_or(j, "eps2", cfg.eps2);
    cfg.fixed_point_tol = detail::number_or(j, "fixed_point_tol", cfg.fixed_point_tol);
    if (j.contains("max_br_iterations")) cfg.max_br_iterations = j["max_br_iterations"].get<int>();
    if (!(cfg.eps0 > 0.0 && cfg.eps1 > 0.0 && cfg.eps2 > 0.0 && cfg.fixed_point_tol > 0.0 &&
          cfg.max_br_iterations > 0))
        throw config_error("config: solver: tolerances and iteration cap must be positive");
    return cfg;
}

inline SweepSpec sweep_from_json(const json& j) {
    SweepSpec s;
    auto load_list = [&](const char* key, std::vector<double>& out) {
        if (!j.contains(key)) return;
        if (!j[key].is_array() || j[key].empty())
            throw config_error(std::string("config: sweep: '") + key + "' must be a non-empty list");
        for (const auto& v : j[key]) out.push_back(v.get<double>());
    };
    load_list("Q", s.Q);
    load_list("alpha", s.alpha);
    load_list("c", s.c);
    if (j.contains("beta")) {
        if (!j["beta"].is_array() || j["beta"].empty())
            throw config_error("config: sweep: 'beta' must be a non-empty list");
        for (const auto& v : j["beta"]) {
            if (v.is_number())
                s.beta.emplace_back(v.get<double>());
            else if (v.is_string()) {
                const std::string tag = v.get<std::string>();
                if (tag != "N/Q" && tag != "N/2Q")
                    throw config_error("config: sweep: beta tag must be 'N/Q' or 'N/2Q'");
                s.beta.emplace_back(tag);
            } else {
                throw config_error("config: sweep: beta entries must be numbers or tags");
            }
        }
    }
    return s;
}

/// Resolves a beta entry against a cell's Q.
inline double resolve_beta(const BetaSpec& b, const MarketParams& p, double Q) {
    if (std::holds_alternative<double>(b)) return std::get<double>(b);
    const std::string& tag = std::get<std::string>(b);
    return tag == "N/Q" ? p.N / Q : p.N / (2.0 * Q);
}

inline RunConfig config_from_json(const json& j) {
    if (!j.contains("params")) throw config_error("config: missing 'params' object");
    MarketParams params = params_from_json(j["params"]);
    SensitivityDistribution dist = j.contains("dist")
                                       ? dist_from_json(j["dist"])
                                       : SensitivityDistribution::uniform();
    SolverConfig solver = solver_from_json(j.contains("solver") ? j["solver"] : json::object(), params);
    RunConfig cfg{params, dist, solver, std::nullopt, {}};
    if (j.contains("sweep")) cfg.sweep = sweep_from_json(j["sweep"]);
    if (j.contains("output")) {
        const auto& o = j["output"];
        if (o.contains("format")) cfg.output.format = o["format"].get<std::string>();
        if (o.contains("path")) cfg.output.path = o["path"].get<std::string>();
        if (cfg.output.format != "csv" && cfg.output.format != "json")
            throw config_error("config: output.format must be 'csv' or 'json'");
    }
    return cfg;
}

/// Parses a JSON document, rephrasing parse failures with their byte offset
/// as config errors.
inline json parse_json_text(const std::string& text, const std::string& origin) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw config_error(origin + ": " + e.what());
    }
}

/// Applies one `--set key=value` override onto the raw config document.
/// Keys are dot paths (params.Q, dist.kind, solver.eps1, ...); values are
/// parsed as JSON scalars, falling back to strings.
inline void apply_override(json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw config_error("--set expects key=value, got '" + assignment + "'");
    const std::string path = assignment.substr(0, eq);
    const std::string raw = assignment.substr(eq + 1);

    json value;
    try {
        value = json::parse(raw);
    } catch (const json::parse_error&) {
        value = raw;  // unquoted string
    }

    json* node = &doc;
    std::size_t pos = 0;
    while (true) {
        const auto dot = path.find('.', pos);
        const std::string key = path.substr(pos, dot == std::string::npos ? dot : dot - pos);
        if (key.empty()) throw config_error("--set: empty path segment in '" + path + "'");
        if (dot == std::string::npos) {
            (*node)[key] = value;
            return;
        }
        node = &(*node)[key];
        pos = dot + 1;
    }
}

}  // namespace coex
