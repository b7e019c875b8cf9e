#include "oracles.hpp"

#include "bddyn/errors.hpp"
#include "bddyn/stability.hpp"
#include "bddyn/validation.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>

using namespace bddyn;

namespace {

Params random_params(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Params p;
    p.r = 0.5 + 3.0 * u(rng);
    p.k = 20 + 300 * u(rng);
    p.a1 = 20 + 200 * u(rng);
    p.a2 = 20 + 200 * u(rng);
    p.b1 = 0.1 + 2 * u(rng);
    p.b2 = 0.1 + 2 * u(rng);
    p.c1 = 0.5 + 2 * u(rng);
    p.c2 = 0.5 + 2 * u(rng);
    p.delta1 = 0.1 + u(rng);
    p.delta2 = 0.1 + u(rng);
    p.e1 = 0.2 + 0.75 * u(rng);
    p.e2 = 0.2 + 0.75 * u(rng);
    return p;
}

Equilibrium estar(double r) {
    auto e = feasible_interior(Params::table2(r));
    REQUIRE(e);
    return *e;
}

}  // namespace

TEST_CASE("characteristic polynomial agrees with determinant interpolation") {
    std::mt19937_64 rng(3);
    const auto mats = random_structured_matrices(rng, 1000);
    double worst = 0;
    for (const auto& m : mats) {
        const CharPoly cp = char_poly(Jacobian3{m});
        const Vec3 ref = oracle::charpoly_by_det(m);
        const double s = max_abs(m);
        worst = std::max({worst, std::abs(cp.k1 - ref[0]) / std::max(std::abs(ref[0]), s),
                          std::abs(cp.k2 - ref[1]) / std::max(std::abs(ref[1]), s * s),
                          std::abs(cp.k3 - ref[2]) / std::max(std::abs(ref[2]), s * s * s)});
        CHECK(cp.c2 == doctest::Approx(cp.k1 * cp.k2 - cp.k3));
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("cubic roots agree with a general eigen-solver") {
    std::mt19937_64 rng(4);
    for (const auto& m : random_structured_matrices(rng, 1000)) {
        const Spectrum s = eigenvalues3(Jacobian3{m});
        auto ref = oracle::eigenvalues(m);
        for (const auto& z : s) {
            double best = INFINITY;
            for (const auto& w : ref) best = std::min(best, std::abs(z - w));
            CHECK(best < 1e-8 * (1 + max_abs(m)));
        }
        CHECK(s[0].real() >= s[1].real());
        CHECK(s[1].real() >= s[2].real());
    }
}

TEST_CASE("Routh-Hurwitz agrees with eigenvalue signs off the imaginary axis") {
    std::mt19937_64 rng(5);
    int compared = 0;
    for (const auto& m : random_structured_matrices(rng, 1000)) {
        const double mr = oracle::max_real(m);
        if (std::abs(mr) < 1e-9 * max_abs(m)) continue;
        ++compared;
        CHECK(routh_hurwitz(char_poly(Jacobian3{m})) == (mr < 0));
    }
    CHECK(compared > 990);
}

TEST_CASE("repeated and purely imaginary roots") {
    const Spectrum s = cubic_roots(3, 3, 1);  // (l+1)^3
    for (const auto& z : s) CHECK(std::abs(z + 1.0) < 1e-4);
    const Spectrum t = cubic_roots(2, 4, 8);  // (l+2)(l^2+4)
    CHECK(std::abs(t[0] - std::complex<double>(0, 2)) < 1e-12);
    CHECK(std::abs(t[1] - std::complex<double>(0, -2)) < 1e-12);
    CHECK(std::abs(t[2] + 2.0) < 1e-12);
    CHECK(classify_spectrum(t, {2, 4, 8, 0}) == StabilityClass::Marginal);
}

TEST_CASE("trivial equilibrium is a saddle") {
    const Params p = Params::table2(1.37);
    const auto rep = classify(p, trivial_equilibrium());
    CHECK_FALSE(rep.routh_hurwitz_stable);
    CHECK(rep.classification == StabilityClass::Saddle);
    CHECK(rep.eigenvalues[0].real() == doctest::Approx(p.r));
}

TEST_CASE("interior equilibrium stability follows the eigenvalues") {
    for (double r : {1.29, 1.37, 1.47, 1.6, 2.0}) {
        const Params p = Params::table2(r);
        const auto rep = classify(p, estar(r));
        CHECK(rep.routh_hurwitz_stable == (oracle::max_real(rep.jacobian.m) < 0));
    }
    CHECK_FALSE(classify(Params::table2(1.47), estar(1.47)).routh_hurwitz_stable);
    CHECK(classify(Params::table2(1.47), estar(1.47)).classification == StabilityClass::Saddle);
    const auto high = classify(Params::table2(2.0), estar(2.0));
    CHECK(high.routh_hurwitz_stable);
    CHECK(high.classification == StabilityClass::StableFocus);
}

TEST_CASE("classify refuses infeasible equilibria") {
    Equilibrium e = estar(1.37);
    e.feasible = false;
    CHECK_THROWS_AS(classify(Params::table2(1.37), e), UsageError);
}

TEST_CASE("persistence: growth rate against total predator mortality") {
    const auto at = [](double r) {
        const Params p = Params::table2(r);
        return persistence_check(p, boundary1(p).equilibrium, boundary2(p).equilibrium);
    };
    const auto lo = at(1.37), hi = at(1.5);
    REQUIRE(lo.size() == 3);
    CHECK(lo[0].label == "persistence (i)");
    CHECK_FALSE(lo[0].satisfied);
    CHECK(hi[0].satisfied);
    CHECK(lo[0].rhs == doctest::Approx(1.44));
    for (const auto& c : lo) CHECK(c.evaluable);
}

TEST_CASE("persistence: missing boundary equilibrium is not evaluable") {
    Params p = Params::table2(1.37);
    p.c1 = 0.5;
    const auto rows = persistence_check(p, boundary1(p).equilibrium, boundary2(p).equilibrium);
    CHECK_FALSE(rows[1].evaluable);
    CHECK_FALSE(rows[1].satisfied);
    CHECK(rows[2].evaluable);
    CHECK(std::isinf(rows[2].rhs));
}

TEST_CASE("boundedness bounds") {
    const Params p = Params::table2(1.47);
    const auto b = boundedness_bounds(p);
    CHECK(b.m == 100.0);
    CHECK(b.rho == doctest::Approx(0.62));
    CHECK(b.w == doctest::Approx(p.k));
    CHECK(b.M == doctest::Approx(((p.r + 1) * p.k + b.w) / b.rho));
    CHECK(boundedness_bounds(p, std::nullopt, 30.0).w == doctest::Approx(p.k));
    CHECK_THROWS_AS(boundedness_bounds(p, b.sigma_hi * 1.01), UsageError);
    CHECK_THROWS_AS(boundedness_bounds(p, std::nullopt, p.k), UsageError);
    REQUIRE(b.conditions.size() == 3);
    CHECK_FALSE(b.conditions[0].satisfied);
    CHECK(b.conditions[2].auxiliary.count("rho") == 1);
}

TEST_CASE("local conditions") {
    const Params p = Params::table2(1.37);
    const auto e1 = boundary1(p).equilibrium;
    REQUIRE(e1);
    CHECK_THROWS_AS(local_condition_boundary(p, *e1, 2), UsageError);
    CHECK_THROWS_AS(local_condition_boundary(p, estar(1.37), 1), UsageError);
    const auto c = local_condition_boundary(p, *e1, 1);
    CHECK(c.rhs == doctest::Approx((p.k * (1 - p.b1 * p.e1) - p.a1) / p.b1));

    const Params q = Params::table2(2.0);
    const auto in = local_condition_interior(q, estar(2.0));
    CHECK(in.note == "sufficient condition");
    // violated, yet the eigenvalues show a stable equilibrium: the condition is not necessary
    CHECK_FALSE(in.satisfied);
    CHECK(classify(q, estar(2.0)).routh_hurwitz_stable);
}

TEST_CASE("property: the interior local condition implies stability") {
    std::mt19937_64 rng(17);
    int hits = 0;
    for (int n = 0; n < 20000 && hits < 200; ++n) {
        const Params p = random_params(rng);
        const auto e = feasible_interior(p);
        if (!e) continue;
        if (!local_condition_interior(p, *e).satisfied) continue;
        ++hits;
        CHECK(oracle::max_real(jacobian(p, e->coords).m) < 0);
    }
    CHECK(hits > 20);
}

TEST_CASE("property: the boundary local condition matches the planar stability of the boundary equilibrium") {
    std::mt19937_64 rng(23);
    int hits = 0;
    for (int n = 0; n < 5000; ++n) {
        const Params p = random_params(rng);
        const auto e = boundary1(p).equilibrium;
        if (!e || !e->feasible) continue;
        const auto c = local_condition_boundary(p, *e, 1);
        const Mat3 J = jacobian(p, e->coords).m;
        const double tr = J[0][0] + J[1][1], det = J[0][0] * J[1][1] - J[0][1] * J[1][0];
        if (std::abs(c.lhs - c.rhs) < 1e-6 * std::abs(c.rhs)) continue;
        ++hits;
        CHECK(c.satisfied == (tr < 0 && det > 0));
    }
    CHECK(hits > 100);
}

TEST_CASE("global condition carries the Lyapunov weights") {
    const Params p = Params::table2(1.37);
    const Equilibrium e = estar(1.37);
    const auto g = global_condition(p, e, boundedness_bounds(p).w);
    CHECK(g.auxiliary.at("s1") == 1.0);
    CHECK(g.auxiliary.at("s2") == doctest::Approx((p.a1 + e.coords.x1) / (p.b1 * p.e1 * e.coords.x2)));
    CHECK(g.auxiliary.at("w") == doctest::Approx(p.k));
    CHECK_FALSE(g.satisfied);
}
