#include "bddyn/hopf.hpp"

#include "bddyn/equilibria.hpp"
#include "bddyn/errors.hpp"
#include "bddyn/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace bddyn {

double c2_of_r(const Params& p, double r) {
    const Params q = p.with_r(r);
    try {
        q.validate();
    } catch (const DomainError& e) {
        throw EvaluationError(std::string("C2 not evaluable: ") + e.what(), r);
    }
    const auto estar = feasible_interior(q);
    if (!estar) throw EvaluationError("C2 not evaluable: no feasible interior equilibrium at r=" + std::to_string(r), r);
    return char_poly(jacobian(q, estar->coords)).c2;
}

namespace {

std::complex<double> complex_pair(const Spectrum& s) {
    return *std::max_element(s.begin(), s.end(),
                             [](const auto& a, const auto& b) { return std::abs(a.imag()) < std::abs(b.imag()); });
}

std::complex<double> pair_at(const Params& p, double r) {
    const Params q = p.with_r(r);
    const auto estar = feasible_interior(q);
    if (!estar) throw EvaluationError("no feasible interior equilibrium at r=" + std::to_string(r), r);
    return complex_pair(eigenvalues3(jacobian(q, estar->coords)));
}

}  // namespace

HopfSearchResult find_rc(const Params& p, std::pair<double, double> bracket) {
    auto [lo, hi] = bracket;
    if (!(lo < hi)) throw UsageError("find_rc: bracket must satisfy r_lo < r_hi");
    HopfSearchResult res;
    res.bracket = bracket;
    double flo = c2_of_r(p, lo);
    double fhi = c2_of_r(p, hi);
    if ((flo > 0.0 && fhi > 0.0) || (flo < 0.0 && fhi < 0.0))
        throw NoBifurcationInBracket("C2 has the same sign at both ends of [" + std::to_string(lo) + ", " +
                                     std::to_string(hi) + "]");

    double root = flo == 0.0 ? lo : hi;
    if (flo != 0.0 && fhi != 0.0) {
        // bisection to a narrow bracket, then Illinois-modified secant
        int side = 0;
        for (int it = 0; it < 200; ++it) {
            ++res.iterations;
            double x;
            if (it < 12)
                x = 0.5 * (lo + hi);
            else
                x = (lo * fhi - hi * flo) / (fhi - flo);
            if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
            const double fx = c2_of_r(p, x);
            root = x;
            if (fx == 0.0 || std::abs(fx) < 1e-15 || hi - lo < 1e-13 * std::max(1.0, std::abs(x))) break;
            if ((fx < 0.0) == (flo < 0.0)) {
                lo = x;
                flo = fx;
                if (it >= 12 && side == -1) fhi *= 0.5;
                side = -1;
            } else {
                hi = x;
                fhi = fx;
                if (it >= 12 && side == 1) flo *= 0.5;
                side = 1;
            }
        }
    }

    res.r_c = root;
    const Params q = p.with_r(root);
    res.x_star = feasible_interior(q)->coords;
    res.charpoly = char_poly(jacobian(q, res.x_star));
    res.c2_residual = std::abs(res.charpoly.c2);
    res.k2_at_rc = res.charpoly.k2;
    if (!(res.k2_at_rc > 0.0))
        throw NotAHopfPoint("k2 <= 0 at the root of C2 (r=" + std::to_string(root) + "); no purely imaginary pair");

    res.transversality =
        (c2_of_r(p, root + kTransversalityStep) - c2_of_r(p, root - kTransversalityStep)) / (2.0 * kTransversalityStep);

    const Spectrum spec = cubic_roots(res.charpoly.k1, res.charpoly.k2, res.charpoly.k3);
    const auto pair = complex_pair(spec);
    res.eigen_crosscheck = pair.real();
    res.pair_imag = std::abs(pair.imag());
    res.imag_rel_error = std::abs(res.pair_imag - std::sqrt(res.k2_at_rc)) / std::sqrt(res.k2_at_rc);
    for (const auto& z : spec) res.spectral_scale = std::max(res.spectral_scale, std::abs(z));

    res.slope_observed =
        (pair_at(p, root + kSlopeStep).real() - pair_at(p, root - kSlopeStep).real()) / (2.0 * kSlopeStep);
    const double k1 = res.charpoly.k1;
    res.slope_predicted = -res.transversality / (2.0 * (k1 * k1 + res.k2_at_rc));
    return res;
}

ClosedFormRc rc_closed_form_diagnostic(const Params& p, const State& x) {
    const Jacobian3 J = jacobian(p, x);
    ClosedFormRc out;
    const double J12 = J(0, 1), J13 = J(0, 2), J21 = J(1, 0), J22 = J(1, 1), J31 = J(2, 0), J33 = J(2, 2);
    out.j11 = J(0, 0);
    out.h1 = J22 + J33;
    out.h2 = (J22 + J33) * (J22 + J33) - J12 * J21 - J13 * J31;
    out.h2_printed = -J22 * J22 + J33 * J33 - J13 * J31 - J12 * J21;
    out.h3 = (J22 + J33) * J22 * J33 - J13 * J31 * J33 - J12 * J21 * J22;
    out.residual = (out.h1 * out.j11 + out.h2) * out.j11 + out.h3;
    out.residual_printed = (out.h1 * out.j11 + out.h2_printed) * out.j11 + out.h3;
    out.discriminant = out.h2 * out.h2 - 4.0 * out.h1 * out.h3;
    if (out.discriminant < 0.0) {
        out.note = "negative discriminant: no real J11 solves the quadratic";
        return out;
    }
    out.real_roots = true;
    QuadraticCoeffs qc;
    qc.a = out.h1;
    qc.b = out.h2;
    qc.c = out.h3;
    out.j11_roots = real_roots(qc);

    const double d1 = p.a1 + x.x1 + p.b1 * x.x2;
    const double d2 = p.a2 + x.x1 + p.b2 * x.x3;
    const double t1 = p.c1 * x.x2 * (p.a1 + p.b1 * x.x2) / (d1 * d1);
    const double t2 = p.c2 * x.x3 * (p.a2 + p.b2 * x.x3) / (d2 * d2);
    const double lift = (x.x1 + p.k) * (x.x1 + p.k) / (p.k * p.k);
    double best = INFINITY;
    for (double j : out.j11_roots) {
        out.r_roots.push_back(lift * (j + t1 + t2));
        out.r_roots_printed.push_back(lift * (j + t1 - t2));
        if (std::abs(j - out.j11) < best) {
            best = std::abs(j - out.j11);
            out.r_closed_form = out.r_roots.back();
        }
    }
    return out;
}

Eigenbasis eigenbasis(const Jacobian3& J, const CharPoly& cp) {
    if (!(cp.k2 > 0.0)) throw SingularBasisError("eigenbasis: k2 must be positive");
    const double J21 = J(1, 0), J22 = J(1, 1), J31 = J(2, 0), J33 = J(2, 2);
    const double k1 = cp.k1, k2 = cp.k2, w = std::sqrt(k2);
    const double s2 = J22 * J22 + k2, s3 = J33 * J33 + k2, u2 = J22 + k1, u3 = J33 + k1;
    for (double d : {s2, s3, u2, u3})
        if (std::abs(d) < 1e-12) throw SingularBasisError("eigenbasis: closed-form denominator below 1e-12");
    Eigenbasis b;
    b.P = {{{0.0, 1.0, 1.0},
            {-J21 * w / s2, -J21 * J22 / s2, -J21 / u2},
            {-J31 * w / s3, -J31 * J33 / s3, -J31 / u3}}};
    b.det = det3(b.P);
    if (std::abs(b.det) < 1e-12 * std::max(1.0, max_abs(b.P) * max_abs(b.P) * max_abs(b.P)))
        throw SingularBasisError("eigenbasis: det(P) vanishes");
    b.Q = inverse3(b.P);
    return b;
}

double block_diagonal_residual(const Jacobian3& J, const CharPoly& cp, const Eigenbasis& basis) {
    const Mat3 A = matmul(matmul(basis.Q, J.m), basis.P);
    const double w = std::sqrt(cp.k2);
    const Mat3 target = {{{0.0, -w, 0.0}, {w, 0.0, 0.0}, {0.0, 0.0, -cp.k1}}};
    double r = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r = std::max(r, std::abs(A[i][j] - target[i][j]));
    return r;
}

std::string_view to_string(HopfDirection d) {
    return d == HopfDirection::Subcritical ? "Subcritical" : "Supercritical";
}

std::vector<std::pair<std::string, double>> entries(const FDerivatives& f) {
    return {{"F1_11", f.F1_11},   {"F1_12", f.F1_12},   {"F1_22", f.F1_22}, {"F1_111", f.F1_111},
            {"F1_122", f.F1_122}, {"F2_11", f.F2_11},   {"F2_12", f.F2_12}, {"F2_22", f.F2_22},
            {"F2_112", f.F2_112}, {"F2_222", f.F2_222}};
}

double stability_quantity(const FDerivatives& f, double k2) {
    return f.F1_111 + f.F2_112 + f.F1_122 + f.F2_222 +
           (f.F1_12 * (f.F1_11 + f.F1_22) - f.F2_12 * (f.F2_11 + f.F2_22) - f.F1_11 * f.F2_11 + f.F1_22 * f.F2_22) /
               std::sqrt(k2);
}

Mat3 center_manifold_system(const CharPoly& cp) {
    const double w = std::sqrt(cp.k2);
    return {{{0.5 * cp.k1, w, 0.0}, {-w, cp.k1, w}, {0.0, -w, 0.5 * cp.k1}}};
}

namespace {

// One-based accessors mirroring the entry-wise formulas.
struct Entries {
    const Mat3& P;
    const Mat3& Q;
    const HessianTensor& H;
    double p(int i, int j) const { return P[i - 1][j - 1]; }
    double q(int i, int j) const { return Q[i - 1][j - 1]; }
    double f(int i, int j, int k) const { return H(i - 1, j - 1, k - 1); }
};

Vec3 printed_omega(const Entries& e) {
    auto inner2 = [&](int i) {
        return e.f(i, 1, 1) * e.p(1, 1) * e.p(1, 2) + e.f(i, 2, 2) * e.p(2, 1) * e.p(2, 2) +
               e.f(i, 3, 3) * e.p(3, 1) * e.p(3, 2) + e.f(i, 2, 3) * (e.p(2, 1) * e.p(3, 2) + e.p(2, 2) * e.p(3, 1)) +
               e.f(i, 3, 1) * (e.p(1, 1) * e.p(3, 2) + e.p(1, 2) * e.p(3, 1)) +
               e.f(i, 1, 2) * (e.p(1, 1) * e.p(2, 2) + e.p(1, 2) * e.p(2, 1));
    };
    double o1 = 0.0, o3 = 0.0;
    for (int i = 1; i <= 3; ++i) {
        o1 += e.q(3, i) * (e.f(i, 1, 1) * e.p(1, 1) * e.p(1, 1) + e.f(i, 2, 2) * e.p(2, 1) * e.p(2, 1) +
                           e.f(i, 3, 3) * e.p(3, 1) * e.p(3, 1) + 2 * e.f(i, 2, 3) * e.p(2, 1) * e.p(3, 1) +
                           2 * e.f(i, 3, 1) * e.p(3, 1) * e.p(1, 1) + 2 * e.f(i, 1, 2) * e.p(1, 1) * e.p(2, 1));
        o3 += e.q(3, i) * (e.f(i, 1, 1) * e.p(1, 2) * e.p(1, 2) + e.f(i, 2, 2) * e.p(2, 2) * e.p(2, 2) +
                           e.f(i, 3, 3) * e.p(3, 2) * e.p(3, 2) + 2 * e.f(i, 2, 3) * e.p(2, 2) * e.p(3, 2) +
                           2 * e.f(i, 3, 1) * e.p(3, 1) * e.p(1, 2) + 2 * e.f(i, 1, 2) * e.p(1, 2) * e.p(2, 2));
    }
    const double o2 = 2 * e.q(3, 1) * inner2(1) + e.q(3, 2) * inner2(2) + e.q(3, 3) * inner2(3);
    return {o1, o2, o3};
}

Vec3 closed_form_b(const CharPoly& cp, const Vec3& o) {
    const double k1 = cp.k1, k2 = cp.k2, w = std::sqrt(k2);
    const double den = k1 * k1 * k1 / 4.0 + k1 * k2;
    return {(k2 * (o[0] + o[2]) - 0.5 * k1 * (w * o[1] - k1 * o[0])) / den,
            (k1 * k1 * o[1] / 4.0 - 0.5 * k1 * w * (o[2] - o[0])) / den,
            (k2 * (o[0] + o[2]) + k1 * k1 * o[2] / 2.0 + 0.5 * k1 * w * o[1]) / den};
}

FDerivatives printed_derivatives(const Entries& e, const Vec3& b) {
    const double b11 = b[0], b12 = b[1], b22 = b[2];
    auto p = [&](int i, int j) { return e.p(i, j); };
    auto f = [&](int i, int j, int k) { return e.f(i, j, k); };

    auto quadratic = [&](int row, FDerivatives& out) {
        const double qa = e.q(row, 1), qb = e.q(row, 2), qc = e.q(row, 3);
        const double F11 =
            2 * qa * (f(1, 1, 1) * p(1, 1) * p(1, 1) + f(1, 2, 2) * p(2, 1) * p(2, 1) + f(1, 3, 3) * p(3, 1) * p(3, 1) +
                      2 * f(1, 3, 1) * p(1, 1) * p(3, 1) + 2 * f(1, 1, 2) * p(1, 1) * p(2, 1)) +
            2 * qb * (f(2, 1, 1) * p(1, 1) * p(1, 1) + f(2, 2, 2) * p(2, 1) * p(2, 1) + 2 * f(2, 1, 2) * p(1, 1) * p(2, 1)) +
            2 * qc * (f(3, 1, 1) * p(1, 1) * p(1, 1) + f(3, 3, 3) * p(3, 1) * p(3, 1) + 2 * f(3, 3, 1) * p(1, 1) * p(3, 1));
        const double F12 =
            2 * qa * (f(1, 1, 1) * p(1, 1) * p(1, 2) + f(1, 2, 2) * p(2, 1) * p(2, 2) + f(1, 3, 3) * p(3, 1) * p(3, 2) +
                      f(1, 3, 1) * (p(1, 1) * p(3, 2) + p(1, 2) * p(3, 1)) +
                      f(1, 1, 2) * (p(1, 2) * p(2, 1) + p(2, 2) * p(1, 1))) +
            2 * qb * (f(2, 1, 1) * p(1, 1) * p(1, 2) + f(2, 2, 2) * p(2, 1) * p(2, 2) +
                      f(2, 1, 2) * (p(1, 2) * p(2, 1) + p(2, 2) * p(1, 1))) +
            2 * qc * (f(3, 1, 1) * p(1, 1) * p(1, 2) + f(3, 3, 3) * p(3, 1) * p(3, 2) +
                      f(3, 3, 1) * (p(1, 1) * p(3, 2) + p(1, 2) * p(3, 1)));
        const double F22 =
            2 * qa * (f(1, 1, 1) * p(1, 2) * p(1, 2) + f(1, 2, 2) * p(2, 2) * p(2, 2) + f(1, 3, 3) * p(3, 2) * p(3, 2) +
                      2 * f(1, 3, 1) * p(1, 2) * p(3, 2) + 2 * f(1, 1, 2) * p(1, 2) * p(2, 2)) +
            2 * qb * (f(2, 1, 1) * p(1, 2) * p(1, 2) + f(2, 2, 2) * p(2, 2) * p(2, 2) + 2 * f(2, 1, 2) * p(1, 2) * p(2, 2)) +
            2 * qc * (f(3, 1, 1) * p(1, 2) * p(1, 2) + f(3, 3, 3) * p(3, 2) * p(3, 2) + f(3, 3, 1) * p(1, 2) * p(3, 2));
        if (row == 1) {
            out.F1_11 = F11, out.F1_12 = F12, out.F1_22 = F22;
        } else {
            out.F2_11 = F11, out.F2_12 = F12, out.F2_22 = F22;
        }
    };

    FDerivatives out;
    quadratic(1, out);
    quadratic(2, out);

    {
        const double qa = e.q(1, 1), qb = e.q(1, 2), qc = e.q(1, 3);
        out.F1_111 =
            6 * qa * b11 *
                (f(1, 1, 1) * p(1, 1) * p(1, 3) + f(1, 2, 2) * p(2, 1) * p(2, 3) + f(1, 3, 3) * p(3, 1) * p(3, 3) +
                 f(1, 3, 1) * (p(1, 1) * p(3, 3) + p(1, 3) * p(3, 1)) + f(1, 1, 2) * (p(1, 1) * p(2, 3) + p(2, 1) * p(1, 3))) +
            6 * qb * b11 *
                (f(2, 1, 1) * p(1, 1) * p(1, 3) + f(2, 2, 2) * p(2, 1) * p(2, 3) + f(2, 3, 3) * p(3, 1) * p(3, 3) +
                 f(2, 1, 2) * (p(1, 1) * p(2, 3) + p(1, 3) * p(2, 1))) +
            6 * qc * b11 *
                (f(3, 1, 1) * p(1, 1) * p(1, 3) + f(3, 3, 3) * p(3, 1) * p(3, 3) +
                 f(3, 3, 1) * (p(1, 1) * p(3, 3) + p(1, 3) * p(3, 1)));
        out.F1_122 =
            2 * qa *
                (f(1, 1, 1) * (2 * p(1, 2) * p(1, 3) * b12 + p(1, 1) * p(1, 3) * b22) +
                 f(1, 2, 2) * (2 * p(2, 2) * p(3, 3) * b12 + p(2, 1) * p(2, 3) * b22) +
                 f(1, 3, 3) * (2 * p(3, 2) * p(3, 3) * b12 + p(3, 1) * p(3, 3) * b22) +
                 f(1, 3, 1) * (2 * p(1, 3) * p(3, 2) * b12 + p(1, 1) * p(3, 3) * b22 + p(1, 3) * p(3, 1) * b22 +
                               2 * p(1, 2) * p(3, 3) * b12) +
                 f(1, 1, 2) * (2 * p(1, 2) * p(2, 3) * b12 + p(1, 3) * p(2, 1) * b22 + p(1, 1) * p(2, 3) * b22 +
                               2 * p(2, 2) * p(1, 3) * b12)) +
            2 * qb *
                (f(2, 1, 1) * (2 * p(1, 2) * p(1, 3) * b12 + p(1, 1) * p(1, 3) * b22) +
                 f(2, 2, 2) * (2 * p(2, 2) * p(2, 3) * b12 + p(2, 1) * p(2, 3) * b22) +
                 f(2, 1, 2) * (2 * p(1, 2) * p(2, 3) * b12 + p(1, 1) * p(2, 3) * b22 + 2 * p(1, 3) * p(2, 2) * b12 +
                               p(1, 3) * p(2, 1) * b22)) +
            2 * qc *
                (f(3, 1, 1) * (2 * p(1, 3) * p(1, 2) * b12 + p(1, 1) * p(1, 3) * b22) +
                 f(3, 3, 3) * (2 * p(3, 2) * p(3, 3) * b12 + p(3, 1) * p(3, 3) * b22) +
                 f(3, 3, 1) * (2 * p(3, 2) * p(1, 3) * b12 + p(3, 1) * p(1, 3) * b22 + 2 * p(1, 2) * p(1, 3) * b12 +
                               p(3, 3) * p(1, 1) * b22));
    }
    {
        const double qa = e.q(2, 1), qb = e.q(2, 2), qc = e.q(2, 3);
        out.F2_112 =
            2 * qa *
                (f(1, 1, 1) * (2 * p(1, 1) * p(1, 3) * b12 + p(1, 2) * p(1, 3) * b11) +
                 f(1, 2, 2) * (2 * p(2, 1) * p(2, 3) * b12 + p(2, 2) * p(2, 3) * b11) +
                 f(1, 3, 3) * (2 * p(3, 1) * p(3, 3) * b12 + p(3, 2) * p(3, 3) * b11) +
                 f(1, 3, 1) * (2 * p(1, 1) * p(3, 3) * b12 + p(1, 3) * p(3, 2) * b11 + p(1, 2) * p(3, 3) * b11 +
                               2 * p(1, 3) * p(3, 1) * b12) +
                 f(1, 1, 2) * (2 * p(1, 3) * p(2, 1) * b12 + p(1, 2) * p(2, 3) * b11 + 2 * p(1, 1) * p(2, 3) * b12 +
                               p(2, 2) * p(1, 3) * b11)) +
            2 * qb *
                (f(2, 1, 1) * (2 * p(1, 1) * p(1, 3) * b12 + p(1, 2) * p(1, 3) * b11) +
                 f(2, 2, 2) * (2 * p(2, 1) * p(2, 3) * b12 + p(2, 2) * p(2, 3) * b11) +
                 f(2, 1, 2) * (2 * p(1, 1) * p(2, 3) * b12 + p(1, 2) * p(2, 3) * b11 + 2 * p(1, 3) * p(2, 1) * b12 +
                               p(1, 3) * p(2, 2) * b11)) +
            2 * qc *
                (f(3, 1, 1) * (2 * p(1, 1) * p(1, 3) * b12 + p(1, 2) * p(1, 3) * b11) +
                 f(3, 3, 3) * (2 * p(3, 1) * p(3, 3) * b12 + p(3, 2) * p(3, 3) * b11) +
                 f(3, 3, 1) * (2 * p(3, 1) * p(1, 3) * b12 + p(3, 3) * p(1, 2) * b11 + 2 * p(1, 1) * p(3, 3) * b12 +
                               p(3, 2) * p(1, 3) * b11));
        out.F2_222 =
            6 * qa * b22 *
                (f(1, 1, 1) * p(1, 2) * p(1, 3) + f(1, 2, 2) * p(2, 2) * p(2, 3) + f(1, 3, 3) * p(3, 2) * p(3, 3) +
                 f(1, 3, 1) * (p(1, 2) * p(3, 3) + p(1, 3) * p(3, 2)) + f(1, 1, 2) * (p(1, 2) * p(2, 3) + p(1, 3) * p(2, 2))) +
            6 * qb * b22 *
                (f(2, 1, 1) * p(1, 2) * p(1, 3) + f(2, 2, 2) * p(2, 2) * p(2, 3) +
                 f(2, 1, 2) * (p(1, 2) * p(2, 3) + p(1, 3) * p(2, 2))) +
            6 * qc * b22 *
                (f(3, 1, 1) * p(1, 2) * p(1, 3) + f(3, 3, 3) * p(3, 2) * p(3, 3) +
                 f(3, 3, 1) * (p(1, 2) * p(3, 3) + p(1, 3) * p(3, 2)));
    }
    return out;
}

Vec3 column(const Mat3& M, int j) { return {M[0][j], M[1][j], M[2][j]}; }

// H_i(u, v) for each component i.
Vec3 bilinear(const HessianTensor& H, const Vec3& u, const Vec3& v) {
    Vec3 out{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) out[i] += H(i, j, k) * u[j] * v[k];
    return out;
}

double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

// Third derivative T_i(u, v, w): Richardson-extrapolated central difference of the analytic Hessian along w.
Vec3 trilinear(const Params& p, const State& x, const Vec3& u, const Vec3& v, const Vec3& w) {
    const double wn = norm2(w);
    if (wn == 0.0) return {0.0, 0.0, 0.0};
    const Vec3 dir = {w[0] / wn, w[1] / wn, w[2] / wn};
    const double h = 1e-3 * norm2(x.vec());
    auto central = [&](double step) {
        const Vec3 xp = {x.x1 + step * dir[0], x.x2 + step * dir[1], x.x3 + step * dir[2]};
        const Vec3 xm = {x.x1 - step * dir[0], x.x2 - step * dir[1], x.x3 - step * dir[2]};
        const Vec3 hp = bilinear(hessian(p, State::from(xp)), u, v);
        const Vec3 hm = bilinear(hessian(p, State::from(xm)), u, v);
        return Vec3{(hp[0] - hm[0]) / (2 * step), (hp[1] - hm[1]) / (2 * step), (hp[2] - hm[2]) / (2 * step)};
    };
    const Vec3 coarse = central(h), fine = central(0.5 * h);
    Vec3 out{};
    for (int i = 0; i < 3; ++i) out[i] = wn * (4.0 * fine[i] - coarse[i]) / 3.0;
    return out;
}

Vec3 consistent_omega(const HessianTensor& H, const Eigenbasis& basis, double alpha) {
    const Vec3 p1 = column(basis.P, 0), p2 = column(basis.P, 1);
    const Vec3 q3 = basis.Q[2];
    return {alpha * dot(q3, bilinear(H, p1, p1)), alpha * 2.0 * dot(q3, bilinear(H, p1, p2)),
            alpha * dot(q3, bilinear(H, p2, p2))};
}

double rel_diff(double printed, double consistent) {
    return std::abs(printed - consistent) / std::max(std::abs(consistent), 1e-300);
}

}  // namespace

FDerivatives composed_derivatives(const Params& p, const State& x, const Eigenbasis& basis, const Vec3& b, double alpha,
                                  double beta) {
    const HessianTensor H = hessian(p, x);
    const std::array<Vec3, 3> pc = {column(basis.P, 0), column(basis.P, 1), column(basis.P, 2)};
    const double B[2][2] = {{b[0], b[1]}, {b[1], b[2]}};
    std::array<Vec3, 2> c{bilinear(H, pc[0], pc[2]), bilinear(H, pc[1], pc[2])};

    auto second = [&](int a, int i, int j) { return 2.0 * alpha * dot(basis.Q[a], bilinear(H, pc[i], pc[j])); };
    auto third = [&](int a, int i, int j, int k) {
        Vec3 s{};
        for (int m = 0; m < 3; ++m) s[m] = c[i][m] * B[j][k] + c[j][m] * B[i][k] + c[k][m] * B[i][j];
        double out = 2.0 * alpha * dot(basis.Q[a], s);
        if (beta != 0.0) out += 6.0 * beta * dot(basis.Q[a], trilinear(p, x, pc[i], pc[j], pc[k]));
        return out;
    };

    FDerivatives F;
    F.F1_11 = second(0, 0, 0);
    F.F1_12 = second(0, 0, 1);
    F.F1_22 = second(0, 1, 1);
    F.F2_11 = second(1, 0, 0);
    F.F2_12 = second(1, 0, 1);
    F.F2_22 = second(1, 1, 1);
    F.F1_111 = third(0, 0, 0, 0);
    F.F1_122 = third(0, 0, 1, 1);
    F.F2_112 = third(1, 0, 0, 1);
    F.F2_222 = third(1, 1, 1, 1);
    return F;
}

void require_nondegenerate(const CharPoly& cp) {
    const double den = cp.k1 * (cp.k1 * cp.k1 / 4.0 + cp.k2);
    const double den_scale = std::pow(std::abs(cp.k1) + std::sqrt(std::max(cp.k2, 0.0)), 3);
    if (!(std::abs(den) > 1e-12 * den_scale))
        throw DegenerateHopfError("center_manifold: singular centre-manifold system (k1 (k1^2/4 + k2) = 0)");
}

CenterManifoldReport center_manifold(const Params& p, double r_c) {
    const Params q = p.with_r(r_c);
    const auto estar = feasible_interior(q);
    if (!estar) throw EvaluationError("center_manifold: no feasible interior equilibrium", r_c);
    const Jacobian3 J = jacobian(q, estar->coords);
    const CharPoly cp = char_poly(J);
    if (!(cp.k2 > 0.0)) throw NotAHopfPoint("center_manifold: k2 <= 0 at r=" + std::to_string(r_c));
    return center_manifold(p, r_c, eigenbasis(J, cp));
}

CenterManifoldReport center_manifold(const Params& p, double r_c, const Eigenbasis& basis) {
    CenterManifoldReport rep;
    rep.r_c = r_c;
    const Params q = p.with_r(r_c);
    const auto estar = feasible_interior(q);
    if (!estar) throw EvaluationError("center_manifold: no feasible interior equilibrium", r_c);
    rep.x_star = estar->coords;
    rep.jacobian = jacobian(q, rep.x_star);
    rep.charpoly = char_poly(rep.jacobian);
    const CharPoly& cp = rep.charpoly;
    if (!(cp.k2 > 0.0)) throw NotAHopfPoint("center_manifold: k2 <= 0 at r=" + std::to_string(r_c));
    require_nondegenerate(cp);

    rep.basis = basis;
    rep.block_residual = block_diagonal_residual(rep.jacobian, cp, basis);
    rep.block_scale = std::max({1.0, max_abs(rep.jacobian.m), std::abs(cp.k1), std::sqrt(cp.k2)});

    const HessianTensor H = hessian(q, rep.x_star);
    const Entries e{basis.P, basis.Q, H};
    const Mat3 M = center_manifold_system(cp);

    rep.omega = printed_omega(e);
    rep.b = closed_form_b(cp, rep.omega);
    rep.b_direct = solve3(M, rep.omega);
    const Vec3 back = matvec(M, rep.b);
    for (int i = 0; i < 3; ++i) {
        rep.b_residual = std::max(rep.b_residual, std::abs(back[i] - rep.omega[i]));
        rep.b_closed_vs_direct =
            std::max(rep.b_closed_vs_direct, std::abs(rep.b[i] - rep.b_direct[i]) / std::max(1.0, std::abs(rep.b_direct[i])));
    }
    rep.F = printed_derivatives(e, rep.b);
    rep.Pi = stability_quantity(rep.F, cp.k2);
    rep.direction = direction_of(rep.Pi);

    rep.omega_consistent = consistent_omega(H, basis, 1.0);
    rep.b_consistent = solve3(M, rep.omega_consistent);
    rep.F_printed_consistent_b = printed_derivatives(e, rep.b_consistent);
    rep.F_composed = composed_derivatives(q, rep.x_star, basis, rep.b_consistent, 1.0, 0.0);
    rep.Pi_composed = stability_quantity(rep.F_composed, cp.k2);

    rep.b_taylor = solve3(M, consistent_omega(H, basis, 0.5));
    rep.F_taylor = composed_derivatives(q, rep.x_star, basis, rep.b_taylor, 0.5, 1.0 / 6.0);
    rep.Pi_taylor = stability_quantity(rep.F_taylor, cp.k2);
    rep.direction_taylor = direction_of(rep.Pi_taylor);

    const char* omega_names[3] = {"Omega1", "Omega2", "Omega3"};
    for (int i = 0; i < 3; ++i) {
        const double d = rel_diff(rep.omega[i], rep.omega_consistent[i]);
        if (d > kErratumRelTol) rep.errata.push_back({omega_names[i], rep.omega[i], rep.omega_consistent[i], d});
    }
    const auto printed = entries(rep.F_printed_consistent_b);
    const auto composed = entries(rep.F_composed);
    for (std::size_t i = 0; i < printed.size(); ++i) {
        const double d = rel_diff(printed[i].second, composed[i].second);
        if (d > kErratumRelTol) rep.errata.push_back({printed[i].first, printed[i].second, composed[i].second, d});
    }
    return rep;
}

std::string_view to_string(TrajectoryBehaviour b) {
    switch (b) {
        case TrajectoryBehaviour::Converging: return "converging";
        case TrajectoryBehaviour::Oscillating: return "oscillating";
        case TrajectoryBehaviour::Diverging: return "diverging";
        case TrajectoryBehaviour::Failed: return "failed";
    }
    return "?";
}

DirectionReport validate_direction(const Params& p, double r_c, HopfDirection claimed, double delta_r,
                                   const IntegratorConfig& cfg) {
    if (!(delta_r >= 0.0)) throw UsageError("validate_direction: delta_r must be non-negative");
    DirectionReport rep;
    rep.r_c = r_c;
    rep.delta_r = delta_r;
    rep.claimed = claimed;

    const std::array<double, 2> rs = {r_c + delta_r, r_c - delta_r};
    for (double r : rs)
        for (double radius : kDirectionRadii) {
            DirectionRun run;
            run.r = r;
            run.radius = radius;
            rep.runs.push_back(run);
        }

    parallel_for(rep.runs.size(), [&](std::size_t i) {
        DirectionRun& run = rep.runs[i];
        try {
            const Params q = p.with_r(run.r);
            const auto estar = feasible_interior(q);
            if (!estar) throw EvaluationError("no feasible interior equilibrium", run.r);
            run.stable_side = routh_hurwitz(char_poly(jacobian(q, estar->coords)));
            const State x = estar->coords;
            const State init = perturbed(x, run.radius);
            auto dist = [&](const State& s) { return norm2({s.x1 - x.x1, s.x2 - x.x2, s.x3 - x.x3}); };
            run.initial_distance = dist(init);
            const Trajectory traj = integrate(q, init, cfg);
            const double t_cut = cfg.transient_fraction * traj.t.back();
            for (std::size_t j = 0; j < traj.t.size(); ++j)
                if (traj.t[j] >= t_cut) run.late_distance = std::max(run.late_distance, dist(traj.states[j]));
            run.attractor = detect_attractor(traj, cfg, attractor_scale(q, x)).classification;
            if (run.late_distance < 0.5 * run.initial_distance)
                run.behaviour = TrajectoryBehaviour::Converging;
            else if (run.attractor == AttractorClass::Diverged)
                run.behaviour = TrajectoryBehaviour::Diverging;
            else
                run.behaviour = TrajectoryBehaviour::Oscillating;
        } catch (const DivergenceError& e) {
            run.behaviour = TrajectoryBehaviour::Diverging;
            run.error = e.what();
        } catch (const std::exception& e) {
            run.behaviour = TrajectoryBehaviour::Failed;
            run.error = e.what();
        }
    });

    bool stable_small_decays = false, stable_all_decay = true, unstable_all_oscillate = true;
    bool have_stable = false, have_unstable = false;
    for (const auto& run : rep.runs) {
        if (run.stable_side) {
            have_stable = true;
            if (run.radius == kDirectionRadii.front() && run.behaviour == TrajectoryBehaviour::Converging)
                stable_small_decays = true;
            if (run.behaviour != TrajectoryBehaviour::Converging) stable_all_decay = false;
        } else {
            have_unstable = true;
            if (run.behaviour != TrajectoryBehaviour::Oscillating) unstable_all_oscillate = false;
        }
    }
    rep.core_pattern_ok = have_stable && have_unstable && stable_small_decays && unstable_all_oscillate;
    rep.consistent_with_direction =
        rep.core_pattern_ok && (claimed == HopfDirection::Subcritical ? !stable_all_decay : stable_all_decay);

    rep.summary = std::string("claimed ") + std::string(to_string(claimed)) + "; " +
                  (rep.core_pattern_ok ? "oscillation on the unstable side, decay from the smallest perturbation on "
                                         "the stable side"
                                       : "expected oscillation/decay pattern not observed") +
                  "; " +
                  (stable_all_decay ? "every stable-side perturbation returned to the equilibrium"
                                    : "some stable-side perturbation did not return to the equilibrium");
    return rep;
}

}  // namespace bddyn
