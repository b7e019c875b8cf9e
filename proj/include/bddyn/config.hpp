#pragma once

#include "bddyn/dynamics.hpp"
#include "bddyn/model.hpp"
#include "bddyn/report.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace bddyn {

struct BoundednessSettings {
    std::optional<double> sigma;
    std::optional<double> m;
};

struct HopfSettings {
    std::pair<double, double> bracket{0.8, 2.0};
    double delta_r = kDirectionDeltaR;
};

struct SimulateSettings {
    std::optional<State> init;  // absent: equilibrium plus the sweep perturbation
};

struct SweepSettings {
    double r_lo = 0.8;
    double r_hi = 2.0;
    std::size_t n_points = 120;
    double t_end = 60000.0;
};

struct ConvergenceSettings {
    std::vector<State> inits = {{50, 20, 20}, {100, 50, 50}, {200, 80, 90}, {250, 30, 100}, {150, 100, 40}};
    std::optional<State> target;  // absent: the computed interior equilibrium
    double tol = 0.01;
};

struct ValidateSettings {
    std::uint64_t seed = 20240611;
    bool corrupt_jacobian = false;  // negative control: perturbs one analytic Jacobian entry
};

struct RunConfig {
    Params params;
    IntegratorConfig integrator;
    BoundednessSettings boundedness;
    HopfSettings hopf;
    SimulateSettings simulate;
    SweepSettings sweep;
    ConvergenceSettings convergence;
    ValidateSettings validate;
};

inline constexpr std::string_view kPresetTable2 = "table2";

/// Validates the whole document before returning. Throws ConfigError naming the key.
/// `preset` and `r` (from the command line) take precedence over the document.
RunConfig parse_config(const Json& doc, const std::optional<std::string>& preset = std::nullopt,
                       const std::optional<double>& r = std::nullopt);

RunConfig load_config(const std::filesystem::path& path, const std::optional<std::string>& preset = std::nullopt,
                      const std::optional<double>& r = std::nullopt);

/// Canonical echo of the parsed configuration, written into every results document.
Json config_json(const RunConfig& cfg);

}  // namespace bddyn
