#include <doctest.h>

#include "gdro/config.hpp"
#include "gdro/run.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

using namespace gdro;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("gdro_cli_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string config_error(const std::string& text) {
    try {
        config::parse_config(text);
    } catch (const config::ConfigError& e) {
        return e.pointer() + " | " + e.what();
    }
    return "no error";
}

int shell(const std::string& cmd) {
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("catalog config") {
    const auto cfg =
        config::parse_config(R"({"problem":"gheat-convex","grid":{"n_t":400,"n_x":201},"method":"both"})");
    CHECK(cfg.catalog_name == "gheat-convex");
    CHECK(cfg.problem.terminal.to_string() == "(x * x)");
    CHECK(cfg.problem.band.high() == 2.0);
    CHECK(cfg.method == config::Method::both);
    CHECK(cfg.n_t == 400);
    CHECK(cfg.emit.field);
}

TEST_CASE("schema errors carry a pointer") {
    CHECK(config_error(R"({"problem":"gheat-convex"})").rfind("/grid |", 0) == 0);
    const std::string method =
        config_error(R"({"problem":"gheat-convex","grid":{"n_t":4,"n_x":5},"method":"spectral"})");
    CHECK(method.rfind("/method |", 0) == 0);
    CHECK(method.find("{pde, lattice, both}") != std::string::npos);
    const std::string unknown = config_error(R"({"problem":"heat","grid":{"n_t":4,"n_x":5}})");
    CHECK(unknown.find("double-obstacle-sine") != std::string::npos);
    CHECK(config_error(R"({"problem":"gheat-convex","grid":{"n_t":0,"n_x":5}})").rfind("/grid/n_t |", 0) == 0);
    CHECK(config_error(R"({"problem":"gheat-convex","grid":{"n_t":4}})").rfind("/grid/n_x |", 0) == 0);
    CHECK(config_error("[1,2]").find("single JSON object") != std::string::npos);
    CHECK(config_error("{").find("invalid JSON") != std::string::npos);
    CHECK(config_error(R"({"problem":{"horizon":1,"x_min":0,"x_max":1,"band":{"low":1,"high":2},
        "terminal":"x +* 2","lower":"0","upper":"1"},"grid":{"n_t":4,"n_x":5}})")
              .rfind("/problem/terminal |", 0) == 0);
    CHECK(config_error(R"({"problem":{"horizon":1,"x_min":0,"x_max":1,"band":{"low":2,"high":1},
        "terminal":"0","lower":"0","upper":"1"},"grid":{"n_t":4,"n_x":5}})")
              .rfind("/problem/band |", 0) == 0);
    CHECK(config_error(R"({"problem":"gheat-convex","grid":{"n_t":4,"n_x":5},"penalties":{"upper":-1}})")
              .rfind("/penalties/upper |", 0) == 0);
    CHECK(config_error(R"({"problem":"gheat-convex","grid":{"n_t":4,"n_x":5},"emit":["plot"]})")
              .rfind("/emit/0 |", 0) == 0);
}

TEST_CASE("inline problem") {
    const auto cfg = config::parse_config(R"({
      "problem": {"name": "toy", "horizon": 0.5, "x_min": -1, "x_max": 1, "band": {"low": 0.5, "high": 1},
                  "terminal": "x*x", "lower": "-1", "upper": 2, "generator": "-y",
                  "boundary": "curvature-extrapolation"},
      "grid": {"n_t": 10, "n_x": 11, "substeps": 2},
      "method": "lattice",
      "penalties": {"upper": "projection", "lower": 10, "mode": "nodewise-implicit", "kappa_f": 2},
      "ladders": {"n_list": [1, 10]},
      "emit": ["report"]
    })");
    CHECK(cfg.problem.name == "toy");
    CHECK(cfg.problem.upper.eval(Bindings::tx(0, 0)) == 2.0);
    CHECK(cfg.problem.boundary == BoundaryMode::curvature);
    CHECK(cfg.penalties.upper.projection);
    CHECK(cfg.penalties.lower.intensity == 10.0);
    CHECK(cfg.penalties.mode == PenaltyMode::nodewise_implicit);
    CHECK(cfg.substeps == 2);
    CHECK(cfg.ladders->n_list.size() == 2);
    CHECK_FALSE(cfg.emit.field);
    CHECK(cfg.emit.report);
}

TEST_CASE("exit codes") {
    std::ostringstream diag;
    RunOptions opts;
    opts.output_dir = scratch("exit");

    auto crossing = config::parse_config(R"({
      "problem": {"horizon": 1, "x_min": -1, "x_max": 1, "band": {"low": 1, "high": 1},
                  "terminal": "0.5", "lower": "1", "upper": "0"},
      "grid": {"n_t": 10, "n_x": 11}})");
    CHECK(run(crossing, opts, diag) == exit_validation);
    CHECK(diag.str().find("kind=obstacle-crossing i=0 j=0") != std::string::npos);

    diag.str("");
    auto cfl = config::parse_config(
        R"({"problem":"double-obstacle-sine","grid":{"n_t":200,"n_x":121},"method":"lattice",
            "penalties":{"upper":1000,"lower":1000,"mode":"explicit"}})");
    CHECK(run(cfl, opts, diag) == exit_stability);
    CHECK(diag.str().find("bound=10.025") != std::string::npos);

    diag.str("");
    auto pde_k = config::parse_config(R"({"problem":"gheat-convex","grid":{"n_t":400,"n_x":201,"substeps":1}})");
    CHECK(run(pde_k, opts, diag) == exit_stability);
}

TEST_CASE("assert run on the convex anchor") {
    std::ostringstream diag;
    RunOptions opts;
    opts.assert_checks = true;
    opts.output_dir = scratch("assert");
    const auto cfg = config::parse_config(R"({"problem":"gheat-convex","grid":{"n_t":400,"n_x":201}})");
    CHECK(run(cfg, opts, diag) == exit_ok);
    const std::string report = slurp(*opts.output_dir / "report.csv");
    CHECK(report.rfind("n,m,sup_upper_violation,sup_lower_violation,mono_violation,asc_plus,asc_minus,cross_gap,"
                       "rate_slope\n",
                       0) == 0);
    const auto line = report.substr(report.find('\n') + 1);
    const auto cross = std::stod(line.substr(line.rfind(',', line.size() - 3) + 1));
    CHECK(cross <= 5.0 * (1.0 / 400 + 0.03 * 0.03));
    CHECK(slurp(*opts.output_dir / "field_pde.csv").rfind("t,x,u,z,a_plus,a_minus,k_defect,sigma_choice\n", 0) == 0);
    CHECK(slurp(*opts.output_dir / "residual.csv").rfind("t,x,r\n", 0) == 0);
    CHECK(diag.str().find("status=FAIL") == std::string::npos);
}

TEST_CASE("binary: exit codes and thread determinism") {
    const fs::path dir = scratch("binary");
    {
        std::ofstream(dir / "cfg.json") << R"({"problem":"gheat-convex","grid":{"n_t":100,"n_x":61},"method":"both",
            "ladders":{"n_list":[1,10,50]}})";
        std::ofstream(dir / "bad.json") << R"({"problem":"gheat-convex"})";
    }
    const std::string cli = GDRO_CLI;
    CHECK(shell(cli + " solve --config " + (dir / "bad.json").string() + " 2>/dev/null") == exit_validation);
    CHECK(shell(cli + " solve 2>/dev/null >/dev/null") == exit_usage);
    CHECK(shell(cli + " solve --config " + (dir / "cfg.json").string() + " --threads 1 --out " + (dir / "t1").string()) ==
          0);
    CHECK(shell("GDRO_THREADS=8 " + cli + " solve --config " + (dir / "cfg.json").string() + " --out " +
                (dir / "t8").string()) == 0);
    for (const char* f : {"field_lattice.csv", "field_pde.csv", "report.csv", "residual.csv", "report.json"}) {
        INFO(f);
        const std::string a = slurp(dir / "t1" / f);
        CHECK(!a.empty());
        CHECK(a == slurp(dir / "t8" / f));
    }
    CHECK(shell(cli + " solve --config " + (dir / "cfg.json").string() + " --method lattice --out " +
                (dir / "lat").string()) == 0);
    CHECK_FALSE(fs::exists(dir / "lat" / "field_pde.csv"));
}

}  // TEST_SUITE
