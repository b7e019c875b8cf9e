#pragma once

#include "bddyn/config.hpp"
#include "bddyn/report.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace bddyn {

/// Machine-readable document, human summary, extra data files (name, content) and exit status.
struct Bundle {
    Json doc;
    std::string summary;
    std::vector<std::pair<std::string, std::string>> files;
    int exit_code = 0;
};

inline constexpr std::array<std::string_view, 7> kCommands = {"equilibria", "stability", "hopf",       "simulate",
                                                              "sweep",      "validate",  "convergence"};

Bundle cmd_equilibria(const RunConfig& cfg);
Bundle cmd_stability(const RunConfig& cfg);
Bundle cmd_hopf(const RunConfig& cfg);
Bundle cmd_simulate(const RunConfig& cfg);
Bundle cmd_sweep(const RunConfig& cfg);
Bundle cmd_validate(const RunConfig& cfg);
Bundle cmd_convergence(const RunConfig& cfg);

/// Throws ConfigError for an unknown command name.
Bundle run_command(std::string_view command, const RunConfig& cfg);

/// Writes <command>.json plus the bundle's data files into out_dir (created if needed).
void write_bundle(const Bundle& bundle, std::string_view command, const std::filesystem::path& out_dir);

// Published reference values, reported alongside computed ones and never gated on.
inline constexpr double kPublishedRc = 1.320961640;
inline constexpr double kPublishedPi = 1.0424314050;
inline constexpr double kPublishedEstarR = 1.7;
inline constexpr std::array<double, 3> kPublishedEstar = {169.1663564, 55.36073780, 62.98120968};

}  // namespace bddyn
