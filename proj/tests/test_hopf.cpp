#include "oracles.hpp"

#include "bddyn/errors.hpp"
#include "bddyn/hopf.hpp"

#include <doctest.h>

#include <Eigen/Dense>

using namespace bddyn;

namespace {

const Params kBase = Params::table2(1.37);

// Real part of the complex pair from a general eigen-solver.
double pair_real(double r) {
    const Params p = kBase.with_r(r);
    const auto e = feasible_interior(p);
    REQUIRE(e);
    auto ev = oracle::eigenvalues(jacobian(p, e->coords).m);
    std::sort(ev.begin(), ev.end(), [](auto a, auto b) { return std::abs(a.imag()) > std::abs(b.imag()); });
    return ev[0].real();
}

Vec3 col(const Mat3& m, int j) { return {m[0][j], m[1][j], m[2][j]}; }

const HopfSearchResult& hopf() {
    static const HopfSearchResult h = find_rc(kBase, {0.8, 2.0});
    return h;
}

const CenterManifoldReport& cm() {
    static const CenterManifoldReport c = center_manifold(kBase, hopf().r_c);
    return c;
}

}  // namespace

TEST_CASE("C2 changes sign across the computed bifurcation and is continuous") {
    CHECK(c2_of_r(kBase, 1.29) < 0);
    CHECK(c2_of_r(kBase, 2.0) > 0);
    double prev = c2_of_r(kBase, 0.8);
    for (int i = 1; i <= 400; ++i) {
        const double r = 0.8 + 1.2 * i / 400, c = c2_of_r(kBase, r);
        CHECK(std::abs(c - prev) < 1e-3);
        prev = c;
    }
}

TEST_CASE("C2 evaluation error carries the growth rate") {
    try {
        c2_of_r(kBase, -1.0);
        FAIL("expected EvaluationError");
    } catch (const EvaluationError& e) {
        CHECK(e.r == -1.0);
    }
}

TEST_CASE("find_rc meets its gates") {
    const auto& h = hopf();
    CHECK(h.c2_residual < 1e-10 * h.charpoly.scale());
    CHECK(h.k2_at_rc > 0);
    CHECK(std::abs(h.transversality) > 1e-6);
    CHECK(std::abs(h.eigen_crosscheck) < 1e-8 * h.spectral_scale);
    CHECK(h.imag_rel_error < 1e-8);
    CHECK(std::abs(h.slope_observed - h.slope_predicted) < 1e-3 * std::abs(h.slope_predicted));
    CHECK(h.r_c == doctest::Approx(1.48720656).epsilon(1e-8));
}

TEST_CASE("find_rc agrees with an eigenvalue-based bisection") {
    double lo = 1.3, hi = 1.7;
    REQUIRE(pair_real(lo) > 0);
    REQUIRE(pair_real(hi) < 0);
    for (int i = 0; i < 60; ++i) {
        const double m = 0.5 * (lo + hi);
        (pair_real(m) > 0 ? lo : hi) = m;
    }
    CHECK(std::abs(hopf().r_c - 0.5 * (lo + hi)) < 1e-9);
}

TEST_CASE("find_rc errors") {
    CHECK_THROWS_AS(find_rc(kBase, {1.5, 2.0}), NoBifurcationInBracket);
    CHECK_THROWS_AS(find_rc(kBase, {2.0, 1.5}), UsageError);
}

TEST_CASE("closed-form relation for the prey diagonal entry") {
    const auto d = rc_closed_form_diagnostic(kBase.with_r(hopf().r_c), hopf().x_star);
    CHECK(d.h1 < 0);
    CHECK(std::abs(d.residual) < 1e-10);
    CHECK(std::abs(d.residual_printed) > 1e-4);
    REQUIRE(d.r_closed_form);
    CHECK(*d.r_closed_form == doctest::Approx(hopf().r_c).epsilon(1e-8));
}

TEST_CASE("eigenbasis spans the centre plane and the stable direction") {
    const auto& c = cm();
    const Mat3& J = c.jacobian.m;
    const double w = std::sqrt(c.charpoly.k2);
    const Vec3 p1 = col(c.basis.P, 0), p2 = col(c.basis.P, 1), p3 = col(c.basis.P, 2);
    const Vec3 a = matvec(J, p1), b = matvec(J, p2), d = matvec(J, p3);
    for (int i = 0; i < 3; ++i) {
        CHECK(std::abs(a[i] - w * p2[i]) < 1e-12);
        CHECK(std::abs(b[i] + w * p1[i]) < 1e-12);
        CHECK(std::abs(d[i] + c.charpoly.k1 * p3[i]) < 1e-12);
    }
    CHECK(std::abs(c.basis.det) > 1e-6);
    CHECK(c.block_residual < 1e-10 * c.block_scale);
}

TEST_CASE("eigenbasis rejects vanishing denominators") {
    const Jacobian3 J{{{{1.0, -1.0, -1.0}, {1.0, 0.3, 0.0}, {1.0, 0.0, -1.0}}}};
    const CharPoly cp = char_poly(J);
    REQUIRE(cp.k2 > 0);
    REQUIRE(J(1, 1) + cp.k1 == doctest::Approx(0.0));
    CHECK_THROWS_AS(eigenbasis(J, cp), SingularBasisError);
}

TEST_CASE("degenerate centre-manifold system") {
    CHECK_THROWS_AS(require_nondegenerate(CharPoly{0.0, 1.0, 0.0, 0.0}), DegenerateHopfError);
    CHECK_NOTHROW(require_nondegenerate(cm().charpoly));
}

TEST_CASE("quadratic centre-manifold coefficients solve their linear system") {
    const auto& c = cm();
    const Mat3 M = center_manifold_system(c.charpoly);
    Eigen::Matrix3d A;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) A(i, j) = M[i][j];
    const Eigen::Vector3d ref = A.colPivHouseholderQr().solve(Eigen::Vector3d(c.omega[0], c.omega[1], c.omega[2]));
    for (int i = 0; i < 3; ++i) CHECK(std::abs(c.b[i] - ref(i)) <= 1e-9 * std::max(1e-12, std::abs(ref(i))) + 1e-18);
    CHECK(c.b_residual < 1e-12 * (1 + max_abs(c.omega)));
    CHECK(c.b_closed_vs_direct < 1e-10);
}

TEST_CASE("full-Taylor centre-manifold coefficients satisfy the invariance equation") {
    // Along the linear flow z1' = -w z2, z2' = w z1, h(z) = z^T B z / 2 must satisfy
    // dh/dt = -k1 h + q3 . H(Pz, Pz) / 2 to second order.
    const auto& c = cm();
    const Params p = kBase.with_r(c.r_c);
    const HessianTensor H = hessian(p, c.x_star);
    const double w = std::sqrt(c.charpoly.k2), k1 = c.charpoly.k1;
    const Vec3 p1 = col(c.basis.P, 0), p2 = col(c.basis.P, 1);
    auto qH = [&](const Vec3& u, const Vec3& v) {
        double s = 0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                for (int k = 0; k < 3; ++k) s += c.basis.Q[2][i] * H(i, j, k) * u[j] * v[k];
        return s;
    };
    const double b11 = c.b_taylor[0], b12 = c.b_taylor[1], b22 = c.b_taylor[2];
    const double sc = std::abs(qH(p1, p1)) + std::abs(qH(p2, p2));
    CHECK(std::abs(w * b12 + 0.5 * k1 * b11 - 0.5 * qH(p1, p1)) < 1e-10 * sc);
    CHECK(std::abs(w * (b22 - b11) + k1 * b12 - qH(p1, p2)) < 1e-10 * sc);
    CHECK(std::abs(-w * b12 + 0.5 * k1 * b22 - 0.5 * qH(p2, p2)) < 1e-10 * sc);
}

TEST_CASE("full-Taylor derivatives match finite differences of the reduced vector field") {
    const auto& c = cm();
    const Params p = kBase.with_r(c.r_c);
    const Vec3 x0 = c.x_star.vec();
    const double b11 = c.b_taylor[0], b12 = c.b_taylor[1], b22 = c.b_taylor[2];
    auto G = [&](double z1, double z2) {
        const double z3 = 0.5 * (b11 * z1 * z1 + 2 * b12 * z1 * z2 + b22 * z2 * z2);
        Vec3 x;
        for (int i = 0; i < 3; ++i) x[i] = x0[i] + c.basis.P[i][0] * z1 + c.basis.P[i][1] * z2 + c.basis.P[i][2] * z3;
        const Vec3 f = oracle::field(p, x);
        return std::array<double, 2>{c.basis.Q[0][0] * f[0] + c.basis.Q[0][1] * f[1] + c.basis.Q[0][2] * f[2],
                                     c.basis.Q[1][0] * f[0] + c.basis.Q[1][1] * f[1] + c.basis.Q[1][2] * f[2]};
    };
    // Directional derivatives of order 2 and 3 along (u1, u2), Richardson-extrapolated.
    auto directional = [&](double u1, double u2, int order, int comp) {
        auto at = [&](double s) { return G(s * u1, s * u2)[comp]; };
        auto est = [&](double h) {
            if (order == 2) return (at(h) - 2 * at(0) + at(-h)) / (h * h);
            return (at(2 * h) - 2 * at(h) + 2 * at(-h) - at(-2 * h)) / (2 * h * h * h);
        };
        const double h = 2.0;
        return (4 * est(h / 2) - est(h)) / 3;
    };
    FDerivatives fd;
    for (int a = 0; a < 2; ++a) {
        const double d11 = directional(1, 0, 2, a), d22 = directional(0, 1, 2, a);
        const double d12 = (directional(1, 1, 2, a) - directional(1, -1, 2, a)) / 4;
        const double t111 = directional(1, 0, 3, a), t222 = directional(0, 1, 3, a);
        const double tp = directional(1, 1, 3, a), tm = directional(1, -1, 3, a);
        const double t122 = (tp + tm - 2 * t111) / 6, t112 = (tp - tm - 2 * t222) / 6;
        if (a == 0) {
            fd.F1_11 = d11, fd.F1_12 = d12, fd.F1_22 = d22, fd.F1_111 = t111, fd.F1_122 = t122;
        } else {
            fd.F2_11 = d11, fd.F2_12 = d12, fd.F2_22 = d22, fd.F2_112 = t112, fd.F2_222 = t222;
        }
    }
    const auto got = entries(c.F_taylor), ref = entries(fd);
    double second = 0, third = 0;
    for (const auto& [n, v] : ref) (n.size() == 5 ? second : third) = std::max(n.size() == 5 ? second : third, std::abs(v));
    for (std::size_t i = 0; i < ref.size(); ++i) {
        const double scale = ref[i].first.size() == 5 ? second : third;
        CHECK_MESSAGE(std::abs(got[i].second - ref[i].second) < 1e-4 * scale, ref[i].first);
    }
    CHECK(stability_quantity(fd, c.charpoly.k2) == doctest::Approx(c.Pi_taylor).epsilon(1e-3));
}

TEST_CASE("second-order composed derivatives scale with the weight") {
    const auto& c = cm();
    CHECK(c.F_composed.F1_11 == doctest::Approx(2 * c.F_taylor.F1_11));
    CHECK(c.F_composed.F2_12 == doctest::Approx(2 * c.F_taylor.F2_12));
}

TEST_CASE("printed chain: values, errata and direction") {
    const auto& c = cm();
    CHECK(c.Pi > 0);
    CHECK(c.direction == HopfDirection::Subcritical);
    CHECK(c.Pi_taylor < 0);
    CHECK(c.direction_taylor == HopfDirection::Supercritical);
    std::vector<std::string> names;
    for (const auto& e : c.errata) names.push_back(e.quantity);
    CHECK(names == std::vector<std::string>{"Omega2", "Omega3", "F1_22", "F1_122", "F2_22"});
    CHECK(std::abs(c.omega[0] - c.omega_consistent[0]) < 1e-9 * std::abs(c.omega_consistent[0]));
}

TEST_CASE("stability quantity under rescaled eigenvectors") {
    const auto& c = cm();
    Eigenbasis stretched = c.basis;
    for (auto& row : stretched.P) row[2] *= 2.0;
    stretched.Q = inverse3(stretched.P);
    const auto s3 = center_manifold(kBase, c.r_c, stretched);
    CHECK(s3.Pi_composed == doctest::Approx(c.Pi_composed).epsilon(1e-8));
    CHECK(s3.Pi_taylor == doctest::Approx(c.Pi_taylor).epsilon(1e-6));

    Eigenbasis pair = c.basis;
    for (auto& row : pair.P) row[0] *= 2.0, row[1] *= 2.0;
    pair.Q = inverse3(pair.P);
    const auto s12 = center_manifold(kBase, c.r_c, pair);
    CHECK(s12.Pi_composed == doctest::Approx(4 * c.Pi_composed).epsilon(1e-8));
    CHECK(s12.Pi_taylor == doctest::Approx(4 * c.Pi_taylor).epsilon(1e-6));
    CHECK(direction_of(s12.Pi_taylor) == c.direction_taylor);
}

TEST_CASE("direction check by simulation") {
    const auto rep = validate_direction(kBase, hopf().r_c, cm().direction);
    REQUIRE(rep.runs.size() == 6);
    CHECK(rep.core_pattern_ok);
    CHECK_FALSE(rep.consistent_with_direction);
    for (const auto& run : rep.runs) {
        if (run.stable_side)
            CHECK(run.behaviour == TrajectoryBehaviour::Converging);
        else
            CHECK(run.behaviour == TrajectoryBehaviour::Oscillating);
    }
    const auto agree = validate_direction(kBase, hopf().r_c, cm().direction_taylor);
    CHECK(agree.consistent_with_direction);
}
