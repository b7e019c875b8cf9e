#include "bddyn/stability.hpp"

#include "bddyn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace bddyn {

using cplx = std::complex<double>;

CharPoly char_poly(const Jacobian3& J) {
    const auto& a = J.m;
    CharPoly cp;
    cp.k1 = -(a[0][0] + a[1][1] + a[2][2]);
    cp.k2 = (a[0][0] * a[1][1] - a[0][1] * a[1][0]) + (a[1][1] * a[2][2] - a[1][2] * a[2][1]) +
            (a[0][0] * a[2][2] - a[0][2] * a[2][0]);
    cp.k3 = -det3(a);
    cp.c2 = cp.k1 * cp.k2 - cp.k3;
    return cp;
}

namespace {

cplx polish(const CharPoly& cp, cplx z) {
    const cplx f = cp(z);
    const cplx df = (3.0 * z + 2.0 * cp.k1) * z + cp.k2;
    if (std::abs(df) == 0.0) return z;
    const cplx next = z - f / df;
    return std::abs(cp(next)) <= std::abs(f) ? next : z;
}

}  // namespace

Spectrum cubic_roots(double k1, double k2, double k3) {
    const CharPoly cp{k1, k2, k3, k1 * k2 - k3};
    // lambda = t - k1/3 gives t^3 + p t + q = 0
    const double shift = k1 / 3.0;
    const double p = k2 - k1 * k1 / 3.0;
    const double q = 2.0 * k1 * k1 * k1 / 27.0 - k1 * k2 / 3.0 + k3;
    const double disc = 0.25 * q * q + p * p * p / 27.0;

    Spectrum roots{};
    if (disc > 0.0 || p == 0.0) {
        const double u = std::cbrt(-0.5 * q - std::copysign(std::sqrt(std::max(disc, 0.0)), q));
        const double v = u != 0.0 ? -p / (3.0 * u) : 0.0;
        const double real_root = u + v - shift;
        const double re = -0.5 * (u + v) - shift;
        const double im = 0.5 * std::sqrt(3.0) * std::abs(u - v);
        roots[0] = polish(cp, cplx(real_root, 0.0));
        roots[0] = cplx(roots[0].real(), 0.0);
        cplx z = polish(cp, cplx(re, im));
        if (im == 0.0) z = cplx(z.real(), 0.0);
        roots[1] = z;
        roots[2] = std::conj(z);
    } else {
        const double radius = 2.0 * std::sqrt(-p / 3.0);
        const double arg = std::clamp(3.0 * q / (p * radius), -1.0, 1.0);
        const double theta = std::acos(arg) / 3.0;
        for (int j = 0; j < 3; ++j) {
            const double t = radius * std::cos(theta - 2.0 * std::numbers::pi * j / 3.0);
            roots[j] = cplx(polish(cp, cplx(t - shift, 0.0)).real(), 0.0);
        }
    }
    std::sort(roots.begin(), roots.end(), [](const cplx& a, const cplx& b) {
        if (a.real() != b.real()) return a.real() > b.real();
        return a.imag() > b.imag();
    });
    return roots;
}

Spectrum eigenvalues3(const Jacobian3& J) {
    const CharPoly cp = char_poly(J);
    return cubic_roots(cp.k1, cp.k2, cp.k3);
}

std::string_view to_string(StabilityClass c) {
    switch (c) {
        case StabilityClass::StableNode: return "StableNode";
        case StabilityClass::StableFocus: return "StableFocus";
        case StabilityClass::Saddle: return "Saddle";
        case StabilityClass::UnstableNode: return "UnstableNode";
        case StabilityClass::UnstableFocus: return "UnstableFocus";
        case StabilityClass::Marginal: return "Marginal";
    }
    return "?";
}

bool routh_hurwitz(const CharPoly& cp) { return cp.k1 > 0.0 && cp.k3 > 0.0 && cp.k1 * cp.k2 > cp.k3; }

double zero_real_part_tolerance(const Spectrum& s) {
    double scale = 0.0;
    for (const auto& z : s) scale = std::max(scale, std::abs(z));
    return 1e-9 * (1.0 + scale);
}

StabilityClass classify_spectrum(const Spectrum& s, const CharPoly& cp) {
    if (cp.c2 == 0.0 || cp.k3 == 0.0) return StabilityClass::Marginal;
    const double tol = zero_real_part_tolerance(s);
    int negative = 0, positive = 0;
    bool oscillatory = false;
    for (const auto& z : s) {
        if (std::abs(z.real()) <= tol) return StabilityClass::Marginal;
        (z.real() < 0.0 ? negative : positive)++;
        if (std::abs(z.imag()) > tol) oscillatory = true;
    }
    if (negative == 3) return oscillatory ? StabilityClass::StableFocus : StabilityClass::StableNode;
    if (positive == 3) return oscillatory ? StabilityClass::UnstableFocus : StabilityClass::UnstableNode;
    return StabilityClass::Saddle;
}

StabilityReport classify(const Params& p, const Equilibrium& e) {
    if (!e.feasible) throw UsageError("classify: equilibrium " + std::string(to_string(e.kind)) + " is not feasible");
    StabilityReport rep;
    rep.equilibrium = e;
    rep.jacobian = jacobian(p, e.coords);
    rep.charpoly = char_poly(rep.jacobian);
    rep.eigenvalues = cubic_roots(rep.charpoly.k1, rep.charpoly.k2, rep.charpoly.k3);
    rep.routh_hurwitz_stable = routh_hurwitz(rep.charpoly);
    rep.classification = classify_spectrum(rep.eigenvalues, rep.charpoly);
    return rep;
}

std::vector<ConditionReport> persistence_check(const Params& p, const std::optional<Equilibrium>& e1,
                                               const std::optional<Equilibrium>& e2) {
    std::vector<ConditionReport> out;
    out.push_back(make_condition("r > delta1 + delta2", p.r, ">", p.delta1 + p.delta2, "persistence (i)"));

    auto invasion = [](const std::string& name, const std::optional<Equilibrium>& boundary, double a, double delta,
                       double c, double e, const std::string& label) {
        ConditionReport rep;
        rep.name = name;
        rep.label = label;
        const double margin = c * e - delta;
        rep.rhs = margin > 0.0 ? a * delta / margin : std::numeric_limits<double>::infinity();
        if (!boundary || !boundary->feasible) {
            rep.evaluable = false;
            rep.note = "boundary equilibrium absent or infeasible; condition not evaluable";
            return rep;
        }
        rep.lhs = boundary->coords.x1;
        rep.satisfied = rep.lhs > rep.rhs;
        if (margin <= 0.0) rep.note = "invading predator cannot sustain itself (c*e <= delta)";
        return rep;
    };
    out.push_back(invasion("x1 of E1 > a2*delta2/(c2*e2-delta2)", e1, p.a2, p.delta2, p.c2, p.e2, "persistence (ii)"));
    out.push_back(invasion("x1 of E2 > a1*delta1/(c1*e1-delta1)", e2, p.a1, p.delta1, p.c1, p.e1, "persistence (iii)"));
    return out;
}

BoundednessReport boundedness_bounds(const Params& p, std::optional<double> sigma, std::optional<double> m) {
    BoundednessReport rep;
    rep.m = m.value_or(0.5 * p.k);
    if (!(rep.m > 0.0 && rep.m < p.k)) throw UsageError("boundedness: m must lie in (0, k)");
    const double esum = p.e1 + p.e2;
    rep.sigma_lo = p.r * rep.m / esum;
    rep.sigma_hi = p.r * p.k / esum;
    rep.sigma = sigma.value_or(0.5 * (rep.sigma_lo + rep.sigma_hi));
    if (!(rep.sigma > rep.sigma_lo && rep.sigma < rep.sigma_hi))
        throw UsageError("boundedness: sigma must lie in (r*m/(e1+e2), r*k/(e1+e2))");
    rep.rho = std::min({1.0, p.delta1, p.delta2});
    rep.w = (p.k * p.r * rep.m - esum * p.k * rep.sigma) / (esum * rep.sigma - p.r * p.k);
    rep.M = ((p.r + 1.0) * p.k + rep.w) / rep.rho;

    ConditionReport side = make_condition("min(delta1 - c1*e1, delta2 - c2*e2) > 0",
                                          std::min(p.delta1 - p.c1 * p.e1, p.delta2 - p.c2 * p.e2), ">", 0.0,
                                          "prey bound hypothesis");
    if (!side.satisfied)
        side.note = "hypothesis fails: predator decay bound requires delta_i > c_i*e_i, which excludes predator survival";
    rep.conditions.push_back(side);

    ConditionReport wpos = make_condition("w > 0", rep.w, ">", 0.0, "prey ultimate bound");
    wpos.note = "w mixes e1+e2 with sigma as printed; evaluated without reinterpretation";
    rep.conditions.push_back(wpos);

    ConditionReport ultimate = make_condition("M = ((r+1)k + w)/rho", rep.M, ">", 0.0, "ultimate bound");
    ultimate.auxiliary = {{"rho", rep.rho}, {"w", rep.w}, {"sigma", rep.sigma}, {"m", rep.m}};
    rep.conditions.push_back(ultimate);
    return rep;
}

ConditionReport local_condition_boundary(const Params& p, const Equilibrium& e, int which) {
    const bool match = (which == 1 && e.kind == EquilibriumKind::Boundary1) ||
                       (which == 2 && e.kind == EquilibriumKind::Boundary2);
    if (!match) throw UsageError("local_condition_boundary: equilibrium kind does not match index");
    const double b = which == 1 ? p.b1 : p.b2;
    const double ee = which == 1 ? p.e1 : p.e2;
    const double a = which == 1 ? p.a1 : p.a2;
    const double xp = which == 1 ? e.coords.x2 : e.coords.x3;
    const std::string t = which == 1 ? "1" : "2";
    ConditionReport rep = make_condition("e" + t + "*x1 + x" + std::to_string(which + 1) + " > (k(1-b" + t + "*e" + t +
                                             ")-a" + t + ")/b" + t,
                                         ee * e.coords.x1 + xp, ">", (p.k * (1.0 - b * ee) - a) / b,
                                         "boundary local stability");
    rep.on_boundary = std::abs(rep.lhs - rep.rhs) <= 1e-12 * std::max(1.0, std::abs(rep.rhs));
    if (rep.on_boundary) rep.note = "equality: Hopf boundary for this equilibrium";
    return rep;
}

ConditionReport local_condition_interior(const Params& p, const Equilibrium& estar) {
    ConditionReport rep = make_condition("k < min{a1 + b1*x2*, a2 + b2*x3*}", p.k, "<",
                                         std::min(p.a1 + p.b1 * estar.coords.x2, p.a2 + p.b2 * estar.coords.x3),
                                         "interior local stability");
    rep.note = "sufficient condition";
    return rep;
}

ConditionReport global_condition(const Params& p, const Equilibrium& estar, double w) {
    const auto& x = estar.coords;
    ConditionReport rep = make_condition("a1*a2*b1*b2*r*k > (x1*+k)(w+k)(a1*b1*c2 + a2*b2*c1)",
                                         p.a1 * p.a2 * p.b1 * p.b2 * p.r * p.k, ">",
                                         (x.x1 + p.k) * (w + p.k) * (p.a1 * p.b1 * p.c2 + p.a2 * p.b2 * p.c1),
                                         "interior global stability");
    rep.note = "sufficient condition";
    rep.auxiliary = {{"s1", 1.0},
                     {"s2", (p.a1 + x.x1) / (p.b1 * p.e1 * x.x2)},
                     {"s3", (p.a2 + x.x1) / (p.b2 * p.e2 * x.x3)},
                     {"w", w}};
    return rep;
}

}  // namespace bddyn
