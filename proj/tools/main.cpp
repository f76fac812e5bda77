#include "sbsim_cli/app.hpp"
#include "sbsim_cli/commands.hpp"
#include "sbsim_cli/config.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    using namespace sbsim::cli;

    CLI::App app{"Spin-boson quantum simulator toolkit", "sbsim"};
    app.set_version_flag("--version", version());
    app.require_subcommand(1);

    std::string config;
    std::vector<std::string> sweeps;
    RunOptions opts;
    std::string out_dir = ".";
    app.add_option("-c,--config", config, "JSON configuration file")->required()->check(CLI::ExistingFile);
    app.add_option("-o,--out-dir", out_dir, "directory for output files")->capture_default_str();
    app.add_option("-j,--threads", opts.threads, "worker threads")->capture_default_str()->check(CLI::PositiveNumber);
    app.add_flag("--strict-regime", opts.strict_regime, "treat a failed regime check as a config error");
    app.add_flag("--dry-run", opts.dry_run, "print the resolved configuration and stop");
    app.add_option("--sweep", sweeps, "key=v1,v2,... (repeatable; cartesian product)");
    app.add_flag("--acknowledge-cap", opts.acknowledge_cap, "allow chain-evolve to build its large state");

    const std::vector<std::pair<std::string, std::string>> help{
        {"sd", "tabulate J_eff, its regression counterpart and their relative error"},
        {"sd-fit", "fit a sum of Lorentzians to a target spectral density"},
        {"corr", "bath correlation functions, exact and regression form"},
        {"corr-dist", "distance between the two correlation functions over kappa and nbar"},
        {"simulate", "spin + damped modes master equation, <sigma_z>(t)"},
        {"nonmarkov", "RHP and BLP non-Markovianity measures"},
        {"ion-params", "trapped-ion mode frequencies, couplings and regime checks"},
        {"chain", "star-to-chain coefficients"},
        {"chain-evolve", "exact evolution of spin + truncated chain"},
    };
    for (const auto& [name, text] : help) app.add_subcommand(name, text)->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_config;
    }

    opts.out_dir = out_dir;
    try {
        for (const auto& s : sweeps) opts.sweeps.push_back(parse_sweep(s));
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_config;
    }
    const std::string sub = app.get_subcommands().front()->get_name();
    return run(sub, config, opts, std::cout, std::cerr);
}
