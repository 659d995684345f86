#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>

#include "fermi/config.hpp"
#include "fermi/errors.hpp"
#include "fermi/scenario.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw fermi::ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantum and classical atom-optics Fermi accelerator"};
    std::string mode;
    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    unsigned threads = 0;
    bool print_defaults = false;

    app.add_option("mode", mode, "windows | convert | classical | quantum | sweep");
    app.add_option("--config", config_path, "configuration file")->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "output directory")->capture_default_str();
    auto* seed_opt = app.add_option("--seed", seed, "random seed (overrides run.seed)");
    auto* threads_opt = app.add_option("--threads", threads, "worker threads (overrides run.threads)")->check(CLI::PositiveNumber);
    app.add_flag("--print-defaults", print_defaults, "print a fully commented default config and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : fermi::kExitConfig;
    }

    if (print_defaults) {
        std::cout << fermi::default_config_text();
        return fermi::kExitOk;
    }

    fermi::RunConfig config;
    try {
        if (mode.empty()) throw fermi::ConfigError("a mode is required");
        if (config_path.empty()) throw fermi::ConfigError("--config is required");
        config = fermi::parse_config(read_file(config_path));
        config.mode = fermi::parse_run_mode(mode);
        if (*seed_opt) config.seed = seed;
        if (*threads_opt) config.threads = threads;
        config.validate();
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return fermi::kExitConfig;
    }

    const int status = fermi::run(config, out_dir, std::cerr);
    if (status == fermi::kExitOk) std::cout << "wrote " << out_dir << '\n';
    return status;
}
