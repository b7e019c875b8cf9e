#include "bddyn/equilibria.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bddyn {

std::string_view to_string(EquilibriumKind kind) {
    switch (kind) {
        case EquilibriumKind::Trivial: return "E0";
        case EquilibriumKind::Boundary1: return "E1";
        case EquilibriumKind::Boundary2: return "E2";
        case EquilibriumKind::Interior: return "E*";
    }
    return "?";
}

QuadraticCoeffs boundary1_quadratic(const Params& p) {
    const double l1 = p.delta1 - p.c1 * p.e1;
    const double l2 = p.a1 * p.delta1;
    return {l1, l2 + l1 * p.k + p.r * p.k * p.b1 * p.e1, l2 * p.k, l1, l2, QuadraticSource::Boundary1};
}

QuadraticCoeffs boundary2_quadratic(const Params& p) {
    const double m1 = p.delta2 - p.c2 * p.e2;
    const double m2 = p.a2 * p.delta2;
    return {m1, m2 + m1 * p.k + p.r * p.k * p.b2 * p.e2, m2 * p.k, m1, m2, QuadraticSource::Boundary2};
}

QuadraticCoeffs interior_quadratic(const Params& p) {
    const double n1 = p.b1 * p.e1 * (p.delta2 - p.c2 * p.e2) + p.b2 * p.e2 * (p.delta1 - p.c1 * p.e1);
    const double n2 = p.b2 * p.e2 * p.delta1 * p.a1 + p.b1 * p.e1 * p.delta2 * p.a2;
    return {n1, n2 + n1 * p.k + p.r * p.k * p.b1 * p.b2 * p.e1 * p.e2, n2 * p.k, n1, n2,
            QuadraticSource::Interior};
}

std::vector<double> real_roots(const QuadraticCoeffs& q) {
    std::vector<double> roots;
    if (q.a == 0.0) {
        if (q.b != 0.0) roots.push_back(-q.c / q.b);
        return roots;
    }
    const double disc = q.b * q.b - 4.0 * q.a * q.c;
    if (disc < 0.0) return roots;
    // q = -(b + sign(b) sqrt(disc)) / 2; roots q/a and c/q
    const double s = std::sqrt(disc);
    const double t = -0.5 * (q.b + std::copysign(s, q.b));
    if (t == 0.0) {
        roots.push_back(0.0);
        roots.push_back(0.0);
        return roots;
    }
    roots.push_back(t / q.a);
    roots.push_back(q.c / t);
    std::sort(roots.begin(), roots.end());
    return roots;
}

namespace {

std::vector<double> positive_roots(const QuadraticCoeffs& q) {
    std::vector<double> out;
    for (double x : real_roots(q))
        if (x > 0.0) out.push_back(x);
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// Threshold a delta / (c e - delta) on the prey coordinate for a predator to be positive.
// Infinite when the predator cannot sustain itself at any prey level.
double predator_threshold(double a, double delta, double c, double e) {
    const double margin = c * e - delta;
    return margin > 0.0 ? a * delta / margin : std::numeric_limits<double>::infinity();
}

double predator_level(double x1, double a, double b, double c, double delta, double e) {
    return ((c * e - delta) * x1 - a * delta) / (b * delta);
}

BoundaryResult boundary_equilibrium(const Params& p, bool first) {
    const QuadraticCoeffs q = first ? boundary1_quadratic(p) : boundary2_quadratic(p);
    const double a = first ? p.a1 : p.a2;
    const double b = first ? p.b1 : p.b2;
    const double c = first ? p.c1 : p.c2;
    const double delta = first ? p.delta1 : p.delta2;
    const double e = first ? p.e1 : p.e2;
    const std::string tag = first ? "1" : "2";

    BoundaryResult result;
    result.diagnostics.push_back(make_condition("c" + tag + "*e" + tag + " > delta" + tag, c * e, ">", delta,
                                                "boundary equilibrium existence"));
    if (q.lead >= 0.0) {
        result.diagnostics.back().note = "predator " + tag + " cannot sustain itself on the prey alone";
        return result;
    }
    const auto roots = positive_roots(q);
    if (roots.empty()) return result;

    const double x1 = roots.back();
    const double xp = predator_level(x1, a, b, c, delta, e);
    Equilibrium eq;
    eq.kind = first ? EquilibriumKind::Boundary1 : EquilibriumKind::Boundary2;
    eq.coords = first ? State{x1, xp, 0.0} : State{x1, 0.0, xp};
    eq.diagnostics = result.diagnostics;
    eq.diagnostics.push_back(make_condition("x1 > a" + tag + "*delta" + tag + "/(c" + tag + "*e" + tag +
                                                "-delta" + tag + ")",
                                            x1, ">", predator_threshold(a, delta, c, e),
                                            "boundary equilibrium feasibility"));
    eq.feasible = std::all_of(eq.diagnostics.begin(), eq.diagnostics.end(),
                              [](const ConditionReport& d) { return d.satisfied; });
    result.equilibrium = eq;
    return result;
}

}  // namespace

Equilibrium trivial_equilibrium() {
    Equilibrium e;
    e.kind = EquilibriumKind::Trivial;
    e.feasible = true;
    return e;
}

BoundaryResult boundary1(const Params& p) { return boundary_equilibrium(p, true); }
BoundaryResult boundary2(const Params& p) { return boundary_equilibrium(p, false); }

std::vector<Equilibrium> interior(const Params& p) {
    const QuadraticCoeffs q = interior_quadratic(p);
    std::vector<Equilibrium> out;
    const double t1 = predator_threshold(p.a1, p.delta1, p.c1, p.e1);
    const double t2 = predator_threshold(p.a2, p.delta2, p.c2, p.e2);
    for (double x1 : positive_roots(q)) {
        Equilibrium eq;
        eq.kind = EquilibriumKind::Interior;
        eq.coords = {x1, predator_level(x1, p.a1, p.b1, p.c1, p.delta1, p.e1),
                     predator_level(x1, p.a2, p.b2, p.c2, p.delta2, p.e2)};
        ConditionReport lead = make_condition("n1 < 0", q.lead, "<", 0.0, "interior case I");
        lead.note = q.lead < 0.0 ? "unique positive root" : "case II: zero or two positive roots";
        eq.diagnostics.push_back(lead);
        eq.diagnostics.push_back(make_condition(
            "x1 > max{a1*delta1/(c1*e1-delta1), a2*delta2/(c2*e2-delta2)}", x1, ">", std::max(t1, t2),
            "interior feasibility"));
        eq.feasible = eq.diagnostics.back().satisfied;
        out.push_back(eq);
    }
    return out;
}

std::optional<Equilibrium> feasible_interior(const Params& p) {
    for (auto& e : interior(p))
        if (e.feasible) return e;
    return std::nullopt;
}

std::vector<Equilibrium> all_equilibria(const Params& p) {
    std::vector<Equilibrium> out{trivial_equilibrium()};
    if (auto e1 = boundary1(p); e1.equilibrium) out.push_back(*e1.equilibrium);
    if (auto e2 = boundary2(p); e2.equilibrium) out.push_back(*e2.equilibrium);
    for (auto& e : interior(p)) out.push_back(e);
    return out;
}

double residual_inf(const Params& p, const Equilibrium& e) {
    return max_abs(vector_field(p, e.coords.vec()));
}

}  // namespace bddyn
