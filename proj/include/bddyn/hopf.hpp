#pragma once

#include "bddyn/dynamics.hpp"
#include "bddyn/model.hpp"
#include "bddyn/stability.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace bddyn {

/// C2 = k1 k2 - k3 at the interior equilibrium for growth rate r.
/// Throws EvaluationError carrying r when no feasible interior equilibrium exists.
double c2_of_r(const Params& p, double r);

struct HopfSearchResult {
    double r_c = 0;
    std::pair<double, double> bracket{};
    State x_star;
    CharPoly charpoly;            // at r_c; charpoly.c2 is the residual
    double c2_residual = 0;       // |C2(r_c)|
    double k2_at_rc = 0;
    double transversality = 0;    // dC2/dr by central difference
    double eigen_crosscheck = 0;  // Re of the complex pair at r_c
    double pair_imag = 0;         // |Im| of the complex pair
    double imag_rel_error = 0;    // | |Im| - sqrt(k2) | / sqrt(k2)
    double spectral_scale = 0;    // max |lambda|
    double slope_observed = 0;    // d Re(lambda)/dr from eigenvalues at r_c +- 1e-4
    double slope_predicted = 0;   // -C2'/(2 (k1^2 + k2))
    int iterations = 0;
};

inline constexpr double kTransversalityStep = 1e-6;
inline constexpr double kSlopeStep = 1e-4;

/// Bracketed bisection refined by secant (Illinois) steps.
/// Throws NoBifurcationInBracket without a sign change, NotAHopfPoint if k2(r_c) <= 0.
HopfSearchResult find_rc(const Params& p, std::pair<double, double> bracket);

struct ClosedFormRc {
    double j11 = 0;              // actual J11 at x_star
    double h1 = 0, h2 = 0, h3 = 0;
    double h2_printed = 0;       // -J22^2 + J33^2 - J13 J31 - J12 J21
    double residual = 0;         // h1 J11^2 + h2 J11 + h3 at the actual J11
    double residual_printed = 0;
    double discriminant = 0;
    bool real_roots = false;
    std::vector<double> j11_roots;
    std::vector<double> r_roots;          // r from J11 = r k^2/(x1+k)^2 - T1 - T2
    std::vector<double> r_roots_printed;  // with the opposite sign on the second predator term
    std::optional<double> r_closed_form;  // root whose J11 is nearest the actual one
    std::string note;
};

ClosedFormRc rc_closed_form_diagnostic(const Params& p, const State& x_star);

/// Columns: real and imaginary parts spanning the centre plane, then the eigenvector of -k1.
struct Eigenbasis {
    Mat3 P{};
    Mat3 Q{};
    double det = 0;
};

/// Throws SingularBasisError when a denominator of the closed-form entries is below 1e-12.
Eigenbasis eigenbasis(const Jacobian3& J, const CharPoly& cp);

/// max |Q J P - blockdiag([[0,-sqrt k2],[sqrt k2,0]], -k1)|.
double block_diagonal_residual(const Jacobian3& J, const CharPoly& cp, const Eigenbasis& basis);

enum class HopfDirection { Supercritical, Subcritical };
std::string_view to_string(HopfDirection d);
inline HopfDirection direction_of(double pi) { return pi > 0.0 ? HopfDirection::Subcritical : HopfDirection::Supercritical; }

struct FDerivatives {
    double F1_11 = 0, F1_12 = 0, F1_22 = 0, F1_111 = 0, F1_122 = 0;
    double F2_11 = 0, F2_12 = 0, F2_22 = 0, F2_112 = 0, F2_222 = 0;
};

/// Named access in a fixed order, used for reports and comparisons.
std::vector<std::pair<std::string, double>> entries(const FDerivatives& f);

/// Printed combination of the centre-plane derivatives.
double stability_quantity(const FDerivatives& f, double k2);

struct Erratum {
    std::string quantity;
    double printed = 0;
    double consistent = 0;
    double relative_difference = 0;
};

struct CenterManifoldReport {
    double r_c = 0;
    State x_star;
    Jacobian3 jacobian;
    CharPoly charpoly;
    Eigenbasis basis;
    double block_residual = 0;
    double block_scale = 0;

    Vec3 omega{};                  // printed projections
    Vec3 b{};                      // closed-form solution for the printed projections
    Vec3 b_direct{};               // independent linear solve
    double b_residual = 0;         // max |M b - omega|
    double b_closed_vs_direct = 0; // max |b - b_direct| / max(1, |b_direct|)
    FDerivatives F;
    double Pi = 0;
    HopfDirection direction = HopfDirection::Supercritical;

    // Same chain with the slips removed (quadratic part of the field, unit weight).
    Vec3 omega_consistent{};
    Vec3 b_consistent{};
    FDerivatives F_printed_consistent_b;
    FDerivatives F_composed;
    double Pi_composed = 0;

    // Full Taylor expansion of the field (half Hessian plus cubic terms).
    Vec3 b_taylor{};
    FDerivatives F_taylor;
    double Pi_taylor = 0;
    HopfDirection direction_taylor = HopfDirection::Supercritical;

    std::vector<Erratum> errata;
};

inline constexpr double kErratumRelTol = 1e-4;

/// Throws DegenerateHopfError if k1 (k1^2/4 + k2) vanishes relative to (|k1| + sqrt k2)^3.
void require_nondegenerate(const CharPoly& cp);

/// Throws DegenerateHopfError if k1 (k1^2/4 + k2) vanishes.
CenterManifoldReport center_manifold(const Params& p, double r_c);
CenterManifoldReport center_manifold(const Params& p, double r_c, const Eigenbasis& basis);

/// The 3x3 matrix mapping (b11, b12, b22) to the quadratic projections.
Mat3 center_manifold_system(const CharPoly& cp);

/// Composed-map derivatives: F^a_ij = 2 alpha q_a.H(p_i,p_j),
/// F^a_ijk = 2 alpha q_a.[H(p_i,p_3) B_jk + ...] + 6 beta q_a.T(p_i,p_j,p_k), with z3 = z^T B z / 2.
FDerivatives composed_derivatives(const Params& p, const State& x, const Eigenbasis& basis, const Vec3& b, double alpha,
                                  double beta);

enum class TrajectoryBehaviour { Converging, Oscillating, Diverging, Failed };
std::string_view to_string(TrajectoryBehaviour b);

struct DirectionRun {
    double r = 0;
    double radius = 0;       // fraction of |E*|
    bool stable_side = false;
    TrajectoryBehaviour behaviour = TrajectoryBehaviour::Failed;
    AttractorClass attractor = AttractorClass::Undetermined;
    double initial_distance = 0;
    double late_distance = 0;  // max distance to E* over the analysis window
    std::string error;
};

struct DirectionReport {
    double r_c = 0;
    double delta_r = 0;
    HopfDirection claimed = HopfDirection::Supercritical;
    std::vector<DirectionRun> runs;
    bool core_pattern_ok = false;            // oscillation below, decay from the smallest radius above
    bool consistent_with_direction = false;  // large-perturbation behaviour on the stable side matches the claim
    std::string summary;
};

inline constexpr double kDirectionDeltaR = 0.05;
inline constexpr std::array<double, 3> kDirectionRadii = {0.005, 0.05, 0.2};

DirectionReport validate_direction(const Params& p, double r_c, HopfDirection claimed, double delta_r = kDirectionDeltaR,
                                   const IntegratorConfig& cfg = {});

}  // namespace bddyn
