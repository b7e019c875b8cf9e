#include "bddyn/commands.hpp"
#include "bddyn/config.hpp"
#include "bddyn/errors.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Three-species predator-prey analysis: equilibria, stability, Hopf point, simulation"};
    std::string command;
    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::string> preset;
    std::optional<double> r;
    std::string names;
    for (auto c : bddyn::kCommands) names += (names.empty() ? "" : ", ") + std::string(c);
    app.add_option("command", command, "one of: " + names)->required();
    app.add_option("--config", config_path, "configuration JSON (parameters and command sections)");
    app.add_option("--out", out_dir, "output directory for results JSON and CSV files");
    app.add_option("--preset", preset, "named parameter preset (table2)");
    app.add_option("--r", r, "prey growth rate, overrides the configuration");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        const bddyn::RunConfig cfg = config_path.empty() ? bddyn::parse_config(bddyn::Json::object(), preset, r)
                                                         : bddyn::load_config(config_path, preset, r);
        const bddyn::Bundle bundle = bddyn::run_command(command, cfg);
        bddyn::write_bundle(bundle, command, out_dir);
        std::cout << bundle.summary;
        return bundle.exit_code;
    } catch (const bddyn::ConfigError& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 2;
    } catch (const bddyn::UsageError& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 2;
    } catch (const bddyn::NoBifurcationInBracket& e) {
        std::fprintf(stderr, "no Hopf point: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "computation failed: %s\n", e.what());
        return 1;
    }
}
