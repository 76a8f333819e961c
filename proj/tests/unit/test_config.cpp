#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "tvfcgcg/config.hpp"

using namespace tvfcgcg;

namespace {

ExperimentConfig parse_text(const std::string& text)
{
    std::istringstream in(text);
    return parse_config(in, "test.toml");
}

} // namespace

TEST_CASE("minimal config gets the documented defaults")
{
    ExperimentConfig cfg = parse_text("[mesh]\n"
                                      "n = 24\n"
                                      "[problem]\n"
                                      "variant = \"elliptic\"\n"
                                      "y_d = \"indicator 0 0 1 1\"\n");
    CHECK(cfg.mesh.n == 24);
    CHECK(cfg.mesh.jitter == 0.0);
    CHECK(cfg.problem.alpha == 1e-4);
    CHECK(cfg.problem.horizon == 0.02);
    CHECK(cfg.problem.steps == 9);
    CHECK(cfg.solver.tolerance == 1e-10);
    CHECK(cfg.solver.mode == InsertionMode::onecut);
    CHECK_FALSE(cfg.solver.include_omega);
    CHECK(cfg.output.directory == "out");
}

TEST_CASE("missing keys are reported by name")
{
    CHECK_THROWS_WITH(parse_text("[problem]\nvariant = \"elliptic\"\ny_d = \"phantom\"\n"),
                      Catch::Matchers::ContainsSubstring("mesh.n"));
    CHECK_THROWS_WITH(parse_text("[mesh]\nn = 4\n[problem]\nvariant = \"elliptic\"\n"),
                      Catch::Matchers::ContainsSubstring("problem.y_d"));
    CHECK_THROWS_WITH(parse_text("[mesh]\nn = 4\n[problem]\ny_d = \"phantom\"\n"),
                      Catch::Matchers::ContainsSubstring("problem.variant"));
}

TEST_CASE("out-of-range values are reported with their bound")
{
    std::string base = "[mesh]\nn = 4\n[problem]\nvariant = \"elliptic\"\ny_d = \"phantom\"\n";
    CHECK_THROWS_WITH(parse_text(base + "alpha = -2\n"),
                      Catch::Matchers::ContainsSubstring("alpha > 0"));
    CHECK_THROWS_WITH(parse_text(base + "[solver]\ntolerance = 0\n"),
                      Catch::Matchers::ContainsSubstring("tolerance > 0"));
    CHECK_THROWS_WITH(parse_text("[mesh]\nn = 0\n" + base.substr(base.find("[problem]"))),
                      Catch::Matchers::ContainsSubstring("n >= 1"));
    CHECK_THROWS_WITH(parse_text(base + "[mesh]\njitter = 0.5\n"),
                      Catch::Matchers::ContainsSubstring("jitter"));
}

TEST_CASE("unknown keys and malformed lines are rejected")
{
    CHECK_THROWS_WITH(parse_text("[mesh]\nn = 4\ntypo = 1\n[problem]\nvariant = \"elliptic\"\n"
                                 "y_d = \"phantom\"\n"),
                      Catch::Matchers::ContainsSubstring("typo"));
    CHECK_THROWS_AS(parse_text("[mesh\nn = 4\n"), ParseError);
    CHECK_THROWS_AS(parse_text("[mesh]\nn\n"), ParseError);
}

TEST_CASE("y_d forms parse and reject garbage")
{
    CHECK(parse_yd_spec("indicator 0 0 1 1").kind == YdSpec::Kind::indicator);
    CHECK(parse_yd_spec("forward-of control.p0field").path == "control.p0field");
    CHECK(parse_yd_spec("field target.p1field").kind == YdSpec::Kind::field);
    CHECK(parse_yd_spec("phantom").kind == YdSpec::Kind::phantom);
    CHECK_THROWS_AS(parse_yd_spec("indicator 0 0"), std::runtime_error);
    CHECK_THROWS_AS(parse_yd_spec("indicator 0 0 -1 1"), std::runtime_error);
    CHECK_THROWS_AS(parse_yd_spec("gaussian 0 0"), std::runtime_error);
}

TEST_CASE("serialize-parse round trip is canonical")
{
    std::string text = "[output]\ndirectory = \"runs/e1\"\n"
                       "[mesh]\nn = 16\njitter = 0.2\nseed = 7\n"
                       "[problem]\nvariant = \"parabolic\"\ny_d = \"phantom\"\nalpha = 2e-3\n"
                       "[solver]\nmode = \"dinkelbach\"\ninclude_omega = true\n";
    ExperimentConfig cfg = parse_text(text);
    std::string canon = serialize_config(cfg);
    std::istringstream in(canon);
    ExperimentConfig cfg2 = parse_config(in, "canon.toml");
    CHECK(serialize_config(cfg2) == canon);
    CHECK(cfg2.mesh.n == 16);
    CHECK(cfg2.problem.variant == PdeVariant::parabolic);
    CHECK(cfg2.solver.mode == InsertionMode::dinkelbach);
    CHECK(cfg2.output.directory == "runs/e1");
}

TEST_CASE("shipped experiment configs parse with the paper parameters")
{
    const char* dir = std::getenv("TVFCGCG_CONFIG_DIR");
    if (!dir) SKIP("TVFCGCG_CONFIG_DIR not set");
    for (const char* name : {"elliptic.toml", "parabolic.toml"}) {
        ExperimentConfig cfg = parse_config(std::string(dir) + "/" + name);
        CHECK(cfg.mesh.n == 24);
        CHECK(cfg.problem.alpha == 1e-4);
        CHECK(cfg.solver.tolerance == 1e-10);
        if (cfg.problem.variant == PdeVariant::parabolic) {
            CHECK(cfg.problem.horizon == 0.02);
            CHECK(cfg.problem.steps == 9);
        }
    }
}

TEST_CASE("phantom control is piecewise constant with two nested levels")
{
    TriMesh mesh = generate_square_mesh(12, 0.0, 0);
    P0Field u = phantom_control(mesh);
    std::set<double> levels(u.values.begin(), u.values.end());
    CHECK(levels == std::set<double>{0.0, 1.0, 2.0});
}

TEST_CASE("indicator target is exact on vertices")
{
    TriMesh mesh = generate_square_mesh(4, 0.0, 0);
    YdSpec yd = parse_yd_spec("indicator 0 0 1 1");
    P1Field f = indicator_target(mesh, yd);
    for (int v = 0; v < mesh.num_vertices(); ++v) {
        bool inside = std::abs(mesh.vertices[v][0]) < 0.5 && std::abs(mesh.vertices[v][1]) < 0.5;
        CHECK(f.values[v] == (inside ? 1.0 : 0.0));
    }
}
