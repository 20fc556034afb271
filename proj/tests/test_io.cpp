#include <catch2/catch.hpp>

#include <fstream>
#include <sstream>

#include "coex/config.hpp"
#include "coex/serialize.hpp"
#include "coex/sweep.hpp"
#include "coex/verify.hpp"
#include "helpers.hpp"

using namespace coex;
using testutil::baseline_params;

namespace {

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return json::parse(ss.str());
}

/// Minimal validator for the draft-07 subset our schemas use: type,
/// properties, required, items, enum and same-directory $ref.
bool validate(const json& schema, const json& value, const std::string& schema_dir);

bool type_matches(const json& type, const json& value) {
    if (type.is_array()) {
        for (const auto& t : type)
            if (type_matches(t, value)) return true;
        return false;
    }
    const std::string t = type.get<std::string>();
    if (t == "object") return value.is_object();
    if (t == "array") return value.is_array();
    if (t == "number") return value.is_number();
    if (t == "string") return value.is_string();
    if (t == "boolean") return value.is_boolean();
    return false;
}

bool validate(const json& schema, const json& value, const std::string& schema_dir) {
    if (schema.contains("$ref"))
        return validate(load_json_file(schema_dir + "/" + schema["$ref"].get<std::string>()),
                        value, schema_dir);
    if (schema.contains("type") && !type_matches(schema["type"], value)) return false;
    if (schema.contains("enum")) {
        bool hit = false;
        for (const auto& e : schema["enum"]) hit = hit || e == value;
        if (!hit) return false;
    }
    if (schema.contains("required"))
        for (const auto& key : schema["required"])
            if (!value.contains(key.get<std::string>())) return false;
    if (schema.contains("properties") && value.is_object())
        for (const auto& [key, sub] : schema["properties"].items())
            if (value.contains(key) && !validate(sub, value[key], schema_dir)) return false;
    if (schema.contains("items") && value.is_array())
        for (const auto& item : value)
            if (!validate(schema["items"], item, schema_dir)) return false;
    return true;
}

const std::string kSchemaDir = std::string(COEX_SOURCE_DIR) + "/schemas";

}  // namespace

TEST_CASE("market params round-trip through the config schema") {
    const json doc = json::parse(R"({"N":1e5,"V1":3000,"V2":3000,"u_bar":1000,"Q":30,
                                     "alpha":0.5,"c":50,"beta":0})");
    const auto p = params_from_json(doc);
    CHECK(p.N == 1e5);
    CHECK(p.Q == 30);
    const auto back = params_from_json(params_to_json(p));
    CHECK(back.N == p.N);
    CHECK(back.V1 == p.V1);
    CHECK(back.alpha == p.alpha);
    CHECK(back.beta == p.beta);
}

TEST_CASE("distribution configs parse and round-trip") {
    for (const auto& text :
         {R"({"kind":"uniform","params":{}})",
          R"({"kind":"truncated_normal","params":{"mean":0.5,"stdev":1}})",
          R"({"kind":"truncated_exponential","params":{"rate":2}})",
          R"({"kind":"truncated_pareto","params":{"shape":2,"scale":0.5}})"}) {
        const auto d = dist_from_json(json::parse(text));
        const auto d2 = dist_from_json(dist_to_json(d));
        CHECK(d2.kind() == d.kind());
        CHECK(d2.cdf(0.37) == d.cdf(0.37));
    }
    CHECK_THROWS_AS(dist_from_json(json::parse(R"({"kind":"gamma"})")), config_error);
    CHECK_THROWS_AS(dist_from_json(json::parse(R"({"kind":"truncated_normal"})")), config_error);
}

TEST_CASE("config parsing: defaults, sweep grids and errors") {
    json doc;
    doc["params"] = params_to_json(baseline_params());
    doc["sweep"] = json{{"Q", {30, 60, 90}}, {"beta", {0, "N/Q", "N/2Q"}}};
    const auto cfg = config_from_json(doc);
    REQUIRE(cfg.sweep.has_value());
    CHECK(cfg.solver.eps1 == Approx(3000.0 / 2000.0));
    CHECK(cfg.solver.eps0 == 1e-4);

    const auto cells = expand_cells(cfg.params, *cfg.sweep);
    CHECK(cells.size() == 9);
    CHECK(cells[1].beta == Approx(1e5 / 30.0));   // "N/Q" at Q = 30
    CHECK(cells[2].beta == Approx(1e5 / 60.0));   // "N/2Q" at Q = 30

    json bad = doc;
    bad["sweep"]["Q"] = json::array();
    CHECK_THROWS_AS(config_from_json(bad), config_error);
    json bad2 = doc;
    bad2["params"].erase("V1");
    CHECK_THROWS_AS(config_from_json(bad2), config_error);
    CHECK_THROWS_AS(parse_json_text("{oops", "inline"), config_error);
}

TEST_CASE("--set overrides take dot paths") {
    json doc;
    doc["params"] = params_to_json(baseline_params());
    apply_override(doc, "params.Q=60");
    apply_override(doc, "dist.kind=truncated_normal");
    apply_override(doc, "dist.params.mean=0.5");
    apply_override(doc, "dist.params.stdev=1");
    apply_override(doc, "output.format=json");
    const auto cfg = config_from_json(doc);
    CHECK(cfg.params.Q == 60);
    CHECK(cfg.dist.kind() == SensitivityDistribution::Kind::TruncatedNormal);
    CHECK(cfg.output.format == "json");
    CHECK_THROWS_AS(apply_override(doc, "no_equals_sign"), config_error);
    CHECK_THROWS_AS(apply_override(doc, "=5"), config_error);
}

TEST_CASE("sweep CSV: header, shape and determinism") {
    const auto p = baseline_params();
    const auto uni = SensitivityDistribution::uniform();
    SweepSpec spec;
    spec.Q = {30, 120, 180};
    const auto cells = expand_cells(p, spec);
    REQUIRE(cells.size() == 3);
    const auto cfg = SolverConfig::defaults(p);
    const auto rows = run_sweep(p, uni, cfg, cells, 2);
    const auto csv = sweep_csv(rows);

    std::istringstream lines(csv);
    std::string line;
    std::getline(lines, line);
    CHECK(line ==
          "Q,alpha,c,beta,p1_star,p2_star,x1,x2,pi1,pi2,pi1_benchmark,p1_benchmark,sw,"
          "sw_benchmark,converged");
    int data_lines = 0;
    while (std::getline(lines, line))
        if (!line.empty()) ++data_lines;
    CHECK(data_lines == 3);

    // Job count must not change the bytes.
    const auto csv_serial = sweep_csv(run_sweep(p, uni, cfg, cells, 1));
    CHECK(csv == csv_serial);
}

TEST_CASE("format_double survives a round trip") {
    for (double v : {0.0, 1.0 / 3.0, std::sqrt(0.2), 59628479.39893024, 1e-13})
        CHECK(std::stod(format_double(v)) == v);
}

TEST_CASE("JSON outputs validate against the shipped schemas") {
    const auto p = baseline_params();
    const auto uni = SensitivityDistribution::uniform();

    const auto eq2 = solve_stage2(p, uni, 300.0, 40.0);
    CHECK(validate(load_json_file(kSchemaDir + "/subscription_equilibrium.schema.json"),
                   to_json(eq2), kSchemaDir));

    auto cfg = SolverConfig::defaults(p);
    cfg.eps1 = 20.0;  // keep this smoke solve quick
    cfg.eps2 = 20.0;
    cfg.fixed_point_tol = 40.0;
    const auto nash = nash_equilibrium(p, uni, cfg);
    CHECK(validate(load_json_file(kSchemaDir + "/pricing_equilibrium.schema.json"), to_json(nash),
                   kSchemaDir));

    json cfg_doc;
    cfg_doc["params"] = params_to_json(p);
    cfg_doc["dist"] = dist_to_json(uni);
    CHECK(validate(load_json_file(kSchemaDir + "/run_config.schema.json"), cfg_doc, kSchemaDir));

    const std::vector<VerifyCheck> checks{{"alpha", true, 1e-9, "ok"}, {"beta", false, 0.2, ""}};
    CHECK(validate(load_json_file(kSchemaDir + "/verify_report.schema.json"), verify_json(checks),
                   kSchemaDir));
}
