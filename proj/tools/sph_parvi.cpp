// sph-parvi: run, validate or self-test the SPH particle sampler.

#include <iostream>

#include <CLI11.hpp>

#include "sphparvi/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"SPH particle-based variational inference sampler"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::vector<std::string> overrides;

    auto* run = app.add_subcommand("run", "run the sampler and write an output bundle");
    run->add_option("--config", config_path, "JSON run configuration")->required();
    run->add_option("--out", out_dir, "output directory")->required();
    run->add_option("--set", overrides, "override a config value, e.g. fluid.c0=20")->take_all();

    auto* validate = app.add_subcommand("validate", "parse and check a configuration without running");
    validate->add_option("--config", config_path, "JSON run configuration")->required();
    validate->add_option("--set", overrides, "override a config value")->take_all();

    auto* selftest = app.add_subcommand("selftest", "kernel and conservation self-checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : sphparvi::kExitConfig;
    }

    if (*run) return sphparvi::cmd_run(config_path, out_dir, overrides, std::cout, std::cerr);
    if (*validate) return sphparvi::cmd_validate(config_path, overrides, std::cout, std::cerr);
    if (*selftest) return sphparvi::cmd_selftest(std::cout);
    return sphparvi::kExitFailure;
}
