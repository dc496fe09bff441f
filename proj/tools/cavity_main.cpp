#include <cstdlib>
#include <string>

#include <CLI11.hpp>

#include "cavity/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Coupled-mode microcavity pumping toolkit"};

    cavity::CliOptions options;
    std::string seed_str;
    app.add_option("--config", options.config_path, "JSON config file (top-level \"command\")")
        ->required();
    app.add_option("--out", options.out_dir, "Output directory")->capture_default_str();
    app.add_option("--seed", seed_str, "RNG seed (overrides config and CAVITY_SEED)");
    app.add_option("--format", options.format, "Output format: csv or json")
        ->capture_default_str();
    app.add_option("--threads", options.threads, "Worker threads (output is thread-count independent)")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) ? 2 : 0;
    }

    if (seed_str.empty()) {
        if (const char* env = std::getenv("CAVITY_SEED")) seed_str = env;
    }
    if (!seed_str.empty()) {
        try {
            options.seed = std::stoull(seed_str);
        } catch (...) {
            return 2;
        }
    }

    return cavity::run_cli(options);
}
