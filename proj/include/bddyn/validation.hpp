#pragma once

#include "bddyn/model.hpp"
#include "bddyn/stability.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace bddyn {

using JacobianFn = std::function<Jacobian3(const Params&, const State&)>;

/// Central-difference step for coordinate x.
inline double fd_step(double x) { return 1e-5 * std::max(1.0, std::abs(x)); }

/// max |J - J_fd| / max |J_fd|, with J_fd from central differences of the right-hand side.
double jacobian_fd_error(const Params& p, const State& x, const JacobianFn& jac);
double jacobian_fd_error(const Params& p, const State& x);

/// Same measure for the Hessian against central differences of the analytic Jacobian.
double hessian_fd_error(const Params& p, const State& x);

/// Log-uniform strictly positive states with components in [0.1, 500].
std::vector<State> random_states(std::mt19937_64& rng, std::size_t n);

/// Random matrices with the model's zero pattern (entries (2,3) and (3,2) vanish).
std::vector<Mat3> random_structured_matrices(std::mt19937_64& rng, std::size_t n);

struct CharPolyCheck {
    double max_coeff_error = 0;  // |k_i - k_i(det)| / max(|k_i(det)|, s^i), s = max |J|
    std::size_t compared = 0;    // matrices outside the margin band
    std::size_t rh_mismatches = 0;
};

/// Coefficients against det(lambda I - J) sampled at lambda = 0, +s, -s; Routh-Hurwitz
/// against the signs of the computed roots, skipping matrices within 1e-9 s of the imaginary axis.
CharPolyCheck charpoly_check(const std::vector<Mat3>& matrices);

struct GateResult {
    std::string name;
    double measured = 0;
    std::string relation = "<";
    double threshold = 0;
    bool passed = false;
    std::string detail;
};

GateResult gate(std::string name, double measured, std::string relation, double threshold, std::string detail = {});

}  // namespace bddyn
