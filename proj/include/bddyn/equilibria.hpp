#pragma once

#include "bddyn/condition.hpp"
#include "bddyn/model.hpp"

#include <optional>
#include <string_view>
#include <vector>

namespace bddyn {

enum class EquilibriumKind { Trivial, Boundary1, Boundary2, Interior };

std::string_view to_string(EquilibriumKind kind);

enum class QuadraticSource { Boundary1, Boundary2, Interior };

/// a x^2 + b x + c = 0 for the prey coordinate of an equilibrium.
/// `lead` and `constant` are the two generating symbols (l1,l2), (m1,m2) or (n1,n2);
/// a == lead and c == constant * k.
struct QuadraticCoeffs {
    double a = 0;
    double b = 0;
    double c = 0;
    double lead = 0;
    double constant = 0;
    QuadraticSource source = QuadraticSource::Interior;
};

QuadraticCoeffs boundary1_quadratic(const Params& p);
QuadraticCoeffs boundary2_quadratic(const Params& p);
QuadraticCoeffs interior_quadratic(const Params& p);

/// Real roots in ascending order. a == 0 degrades to the linear equation.
std::vector<double> real_roots(const QuadraticCoeffs& q);

struct Equilibrium {
    EquilibriumKind kind = EquilibriumKind::Trivial;
    State coords;
    bool feasible = false;
    std::vector<ConditionReport> diagnostics;
};

struct BoundaryResult {
    std::optional<Equilibrium> equilibrium;
    std::vector<ConditionReport> diagnostics;  // existence conditions, filled even when absent
};

Equilibrium trivial_equilibrium();
BoundaryResult boundary1(const Params& p);
BoundaryResult boundary2(const Params& p);

/// All positive roots of the interior quadratic, each feasibility-flagged.
std::vector<Equilibrium> interior(const Params& p);

/// First feasible interior equilibrium, if any.
std::optional<Equilibrium> feasible_interior(const Params& p);

std::vector<Equilibrium> all_equilibria(const Params& p);

/// max-norm of rhs at the equilibrium coordinates (coordinates may be negative for
/// infeasible candidates, so the unchecked field is used).
double residual_inf(const Params& p, const Equilibrium& e);

}  // namespace bddyn
