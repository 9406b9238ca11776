#include "densflow/cli.hpp"
#include "densflow/errors.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Radial solver and checks for doubly nonlinear diffusion with a density"};
    app.require_subcommand(1);
    std::string config_path;
    std::string out_dir;
    long long seed = -1;
    for (const char* name :
         {"classify", "solve", "asymptotics", "verify-embeddings", "check-assumptions"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "INI experiment file")->required();
        sub->add_option("--out", out_dir, "output directory (overrides output_dir)");
        sub->add_option("--seed", seed, "seed (overrides the config)")->check(CLI::NonNegativeNumber);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return densflow::ExitInconclusive;
    }
    try {
        auto cfg = densflow::parse_config(config_path);
        if (!out_dir.empty()) {
            cfg.output_dir = out_dir;
        }
        if (seed >= 0) {
            cfg.set_seed(static_cast<std::uint64_t>(seed));
        }
        return densflow::dispatch(app.get_subcommands().front()->get_name(), cfg, std::cout,
                                  std::cerr);
    } catch (const densflow::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return densflow::ExitInconclusive;
    }
}
