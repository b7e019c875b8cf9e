#pragma once

#include "bddyn/errors.hpp"
#include "bddyn/model.hpp"

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bddyn {

struct IntegratorConfig {
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    double t_end = 3000.0;
    double max_step = 1.0;
    double transient_fraction = 0.5;
    double extinction_threshold = 1e-6;
    double sample_interval = 0.5;        // dense-output spacing; at least min_samples are produced
    std::size_t min_samples = 2000;
    std::size_t max_steps = 20'000'000;

    /// Throws UsageError naming the offending field.
    void validate() const;
    std::size_t sample_count() const;
};

struct Trajectory {
    std::vector<double> t;
    std::vector<State> states;
    std::size_t steps = 0;
    std::size_t rejected = 0;
};

struct IntegrationError : Error {
    IntegrationError(const std::string& what, Trajectory partial) : Error(what), trajectory(std::move(partial)) {}
    Trajectory trajectory;
};

/// Step size fell below round-off level or the step budget ran out.
struct StiffnessError : IntegrationError {
    using IntegrationError::IntegrationError;
};

/// A stage produced a non-finite state.
struct DivergenceError : IntegrationError {
    using IntegrationError::IntegrationError;
};

/// Dormand-Prince 5(4) with PI step control and dense output at evenly spaced times on [0, t_end].
Trajectory integrate(const Params& p, const State& init, const IntegratorConfig& cfg);

enum class AttractorClass { Steady, Periodic, Extinction, Diverged, Undetermined };
std::string_view to_string(AttractorClass c);

struct CycleEstimate {
    Vec3 min{};
    Vec3 max{};
    Vec3 amplitude{};
    std::optional<double> period;
    AttractorClass classification = AttractorClass::Undetermined;
    std::vector<int> extinct;  // 1-based species indices, set for Extinction
    std::size_t maxima = 0;
    double interval_spread = 0;  // (max - min)/mean of successive-maxima intervals
    double envelope_ratio = 1;   // late peak-to-trough height over early height
};

/// Reference magnitudes for the Steady threshold and the divergence bound.
struct AttractorScale {
    std::optional<Vec3> magnitude;  // |x*_i|; defaults to mean |x_i| over the analysis window
    double divergence_bound = std::numeric_limits<double>::infinity();
};

inline constexpr double kAmplitudeRelThreshold = 1e-3;
inline constexpr double kIntervalSpreadLimit = 0.10;
inline constexpr double kEnvelopeRatioMin = 0.5;
inline constexpr std::size_t kMinMaxima = 5;

/// Checks run in order Diverged, Extinction, Steady, Periodic; anything else is Undetermined.
/// An oscillation whose height falls below half across the window is a decaying transient (Undetermined).
CycleEstimate detect_attractor(const Trajectory& traj, const IntegratorConfig& cfg, const AttractorScale& scale = {});

/// Scale used by sweep and simulate: |E*| components (when present) and 10 M.
AttractorScale attractor_scale(const Params& p, const std::optional<State>& estar);

/// Unit (1,1,1)/sqrt(3) direction scaled to `fraction` of |x|.
State perturbed(const State& x, double fraction);

struct SweepPoint {
    double r = 0;
    std::optional<State> estar;
    int c2_sign = 0;
    CycleEstimate estimate;
    bool ok = false;
    std::string error;
};

struct SweepResult {
    std::vector<SweepPoint> points;
    std::size_t succeeded() const;
};

inline constexpr double kSweepPerturbation = 0.01;

SweepResult sweep_r(const Params& p, double r_lo, double r_hi, std::size_t n_points, const IntegratorConfig& cfg);

struct ConvergenceReport {
    State init;
    bool converged = false;
    std::optional<double> entry_time;  // first sample inside the tolerance ball
    State final_state;
    double final_distance = 0;
    std::string error;
};

/// Tolerance ball: |x - target| <= tol * |target| (Euclidean).
std::vector<ConvergenceReport> convergence_test(const Params& p, const std::vector<State>& inits, const State& target,
                                                double tol, const IntegratorConfig& cfg);

}  // namespace bddyn
