#include <cstdio>
#include <iostream>

#include "CLI11.hpp"

#include "dynamo/experiments.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"Spectral experiments for the smooth Ponomarenko dynamo"};
    app.require_subcommand(1, 1);
    std::string config_path, out_dir;
    const char* names[] = {"audit", "growthrate", "eigensolve", "sweep", "greens-verify", "specfun-verify"};
    const char* help[] = {"check the profile hypotheses and the M window",
                          "print the boundary-layer constants and mu*",
                          "compute the leading eigenmode for each eps",
                          "eps sweep with scaling fit and plot scripts",
                          "Green's contraction, Neumann and Riesz suites",
                          "special-function identity suites"};
    for (int i = 0; i < 6; ++i) {
        CLI::App* sub = app.add_subcommand(names[i], help[i]);
        auto* opt = sub->add_option("--config", config_path, "JSON configuration file");
        if (std::string(names[i]) != "specfun-verify") opt->required();
        sub->add_option("--out", out_dir, "output directory (overrides the config)");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }
    const std::string experiment = app.get_subcommands().front()->get_name();
    try {
        dynamo::RunConfig cfg = config_path.empty() ? dynamo::RunConfig{} : dynamo::load_config(config_path);
        cfg.experiment = experiment;
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        const dynamo::RunOutcome out = dynamo::run(cfg);
        std::cout << out.report.dump(2) << "\n";
        for (const std::string& f : out.files) std::cerr << "wrote " << f << "\n";
        return out.exit_code;
    } catch (const dynamo::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.kind() == dynamo::ErrorKind::Config ? 1 : 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
