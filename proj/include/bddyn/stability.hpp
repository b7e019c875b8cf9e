#pragma once

#include "bddyn/condition.hpp"
#include "bddyn/equilibria.hpp"
#include "bddyn/model.hpp"

#include <array>
#include <complex>
#include <optional>
#include <string_view>
#include <vector>

namespace bddyn {

/// lambda^3 + k1 lambda^2 + k2 lambda + k3, with C2 = k1 k2 - k3.
struct CharPoly {
    double k1 = 0;
    double k2 = 0;
    double k3 = 0;
    double c2 = 0;

    std::complex<double> operator()(std::complex<double> lambda) const {
        return ((lambda + k1) * lambda + k2) * lambda + k3;
    }
    double scale() const { return 1.0 + std::abs(k1) + std::abs(k2) + std::abs(k3); }
};

CharPoly char_poly(const Jacobian3& J);

using Spectrum = std::array<std::complex<double>, 3>;

/// Roots of lambda^3 + k1 lambda^2 + k2 lambda + k3 by the closed form (trigonometric branch
/// for three real roots, Cardano otherwise) followed by one Newton polish per root.
/// Sorted by descending real part, then descending imaginary part.
Spectrum cubic_roots(double k1, double k2, double k3);
Spectrum eigenvalues3(const Jacobian3& J);

enum class StabilityClass { StableNode, StableFocus, Saddle, UnstableNode, UnstableFocus, Marginal };
std::string_view to_string(StabilityClass c);

struct StabilityReport {
    Equilibrium equilibrium;
    Jacobian3 jacobian;
    CharPoly charpoly;
    Spectrum eigenvalues{};
    bool routh_hurwitz_stable = false;
    StabilityClass classification = StabilityClass::Marginal;
};

bool routh_hurwitz(const CharPoly& cp);

/// Tolerance on |Re lambda| below which an eigenvalue counts as on the imaginary axis.
double zero_real_part_tolerance(const Spectrum& s);

StabilityClass classify_spectrum(const Spectrum& s, const CharPoly& cp);

/// Throws UsageError for an infeasible equilibrium.
StabilityReport classify(const Params& p, const Equilibrium& e);

/// Sufficient persistence conditions (i) r > delta1+delta2, (ii) x1 of E1 > a2 delta2/(c2 e2 - delta2),
/// (iii) x1 of E2 > a1 delta1/(c1 e1 - delta1). Missing boundary equilibria make (ii)/(iii) non-evaluable.
std::vector<ConditionReport> persistence_check(const Params& p, const std::optional<Equilibrium>& e1,
                                               const std::optional<Equilibrium>& e2);

struct BoundednessReport {
    double rho = 0;        // min(1, delta1, delta2)
    double m = 0;          // predator bound entering the prey bound
    double sigma = 0;
    double sigma_lo = 0;   // r m / (e1 + e2)
    double sigma_hi = 0;   // r k / (e1 + e2)
    double w = 0;          // ultimate prey bound
    double M = 0;          // ultimate bound on x1 + x2/e1 + x3/e2
    std::vector<ConditionReport> conditions;
};

/// sigma defaults to the midpoint of (sigma_lo, sigma_hi); m defaults to k/2.
/// Throws UsageError if sigma lies outside its interval or m is not in (0, k).
BoundednessReport boundedness_bounds(const Params& p, std::optional<double> sigma = std::nullopt,
                                     std::optional<double> m = std::nullopt);

/// e_i x1 + x_pred > (k(1 - b_i e_i) - a_i)/b_i at E1 (which=1) or E2 (which=2).
ConditionReport local_condition_boundary(const Params& p, const Equilibrium& e, int which);

/// k < min{a1 + b1 x2*, a2 + b2 x3*}; sufficient, not necessary, for local stability of E*.
ConditionReport local_condition_interior(const Params& p, const Equilibrium& estar);

/// a1 a2 b1 b2 r k > (x1* + k)(w + k)(a1 b1 c2 + a2 b2 c1), with the Lyapunov weights in auxiliary.
ConditionReport global_condition(const Params& p, const Equilibrium& estar, double w);

}  // namespace bddyn
