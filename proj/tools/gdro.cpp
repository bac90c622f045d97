#include "gdro/config.hpp"
#include "gdro/run.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"G-expectation double-obstacle solvers"};
    app.require_subcommand(1);
    auto* solve = app.add_subcommand("solve", "run a configured problem");

    std::string config_path, method, out_dir;
    bool assert_checks = false;
    int threads = 0;
    solve->add_option("--config", config_path, "JSON run configuration")->required();
    solve->add_option("--method", method, "override the configured method")
        ->check(CLI::IsMember({"pde", "lattice", "both"}));
    solve->add_flag("--assert", assert_checks, "run the acceptance checks for this problem");
    solve->add_option("--out", out_dir, "output directory");
    solve->add_option("--threads", threads, "worker threads (default: GDRO_THREADS or 1)")
        ->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : gdro::exit_usage;
    }

    gdro::RunOptions opts;
    opts.assert_checks = assert_checks;
    if (threads <= 0) {
        if (const char* env = std::getenv("GDRO_THREADS")) threads = std::atoi(env);
    }
    opts.exec.threads = threads > 0 ? threads : 1;
    if (!method.empty())
        opts.method = method == "pde" ? gdro::config::Method::pde
                      : method == "lattice" ? gdro::config::Method::lattice
                                            : gdro::config::Method::both;
    if (!out_dir.empty()) opts.output_dir = out_dir;

    gdro::config::RunConfig cfg;
    try {
        cfg = gdro::config::load_config(config_path);
    } catch (const gdro::config::ConfigError& e) {
        std::cerr << "gdro level=error event=config pointer=\"" << e.pointer() << "\" message=\"" << e.what()
                  << "\"\n";
        return gdro::exit_validation;
    }
    try {
        return gdro::run(cfg, opts, std::cerr);
    } catch (const std::exception& e) {
        std::cerr << "gdro level=error event=internal message=\"" << e.what() << "\"\n";
        return gdro::exit_usage;
    }
}
