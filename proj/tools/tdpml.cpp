// Command-line front end: one subcommand per experiment kind.

#include "tdpml/error.hpp"
#include "tdpml/harness.hpp"

#include "CLI11.hpp"

#include <iostream>

namespace {

struct Options {
    std::string config;
    std::string out;
    int jobs = 1;
};

int run(const std::string& subcommand, const Options& opt)
{
    using namespace tdpml;
    try {
        auto cfg = load_config(opt.config);
        const auto wanted = parse_kind(subcommand);
        if (cfg.kind != wanted) {
            // the subcommand decides; the file may have been written for another one
            std::cerr << "note: config declares '" << to_string(cfg.kind) << "', running '" << subcommand << "'\n";
            cfg.kind = wanted;
            cfg.validate();
        }
        if (!opt.out.empty()) cfg.output_dir = opt.out;
        const auto rep = run_experiment(cfg, opt.jobs);
        for (const auto& m : rep.messages) std::cout << m << '\n';
        std::cout << (rep.pass ? "PASS" : "FAIL") << "  (outputs in " << cfg.output_dir << ")\n";
        return rep.pass ? ExitPass : ExitFail;
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return ExitConfig;
    } catch (const GeometryError& e) {
        std::cerr << "configuration error (geometry): " << e.what() << '\n';
        return ExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return ExitFail;
    }
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Time-domain PML scattering experiments"};
    app.require_subcommand(1);
    app.set_version_flag("--version", tdpml::version());

    Options opt;
    std::string chosen;
    const std::pair<const char*, const char*> commands[] = {
        {"symbol-audit", "certify the PML symbol gap bound and modal passivity on a grid"},
        {"layer-check", "finite-difference layer problem against its closed form"},
        {"freq-solve", "coupled frequency-domain solves, stability ratios, coercivity probes"},
        {"td-run", "Newmark run with optional contour comparison, causality and stability checks"},
        {"convergence", "PML error against layer thickness or absorption strength, with a rate fit"},
        {"parseval", "Laplace transform rules and the Parseval identity"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", opt.config, "JSON experiment configuration")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", opt.out, "output directory (overrides the config)");
        sub->add_option("--jobs", opt.jobs, "worker threads, 0 for all cores")->check(CLI::NonNegativeNumber);
        sub->callback([&chosen, n = std::string(name)] { chosen = n; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : tdpml::ExitConfig;
    }
    return run(chosen, opt);
}
