#include "oracles.hpp"

#include "bddyn/equilibria.hpp"

#include <doctest.h>

#include <random>

using namespace bddyn;

namespace {

double poly(const QuadraticCoeffs& q, double x) { return (q.a * x + q.b) * x + q.c; }

Params random_params(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Params p;
    p.r = 0.5 + 2.0 * u(rng);
    p.k = 50 + 300 * u(rng);
    p.a1 = 20 + 200 * u(rng);
    p.a2 = 20 + 200 * u(rng);
    p.b1 = 0.1 + u(rng);
    p.b2 = 0.1 + u(rng);
    p.c1 = 0.5 + 2 * u(rng);
    p.c2 = 0.5 + 2 * u(rng);
    p.delta1 = 0.2 + u(rng);
    p.delta2 = 0.2 + u(rng);
    p.e1 = 0.2 + 0.75 * u(rng);
    p.e2 = 0.2 + 0.75 * u(rng);
    return p;
}

}  // namespace

TEST_CASE("quadratic roots agree with a sign-scan bisection of the quadratic") {
    for (double r : {1.29, 1.37, 1.47}) {
        const Params p = Params::table2(r);
        for (const auto& q : {boundary1_quadratic(p), boundary2_quadratic(p), interior_quadratic(p)}) {
            const auto roots = real_roots(q);
            const auto ref = oracle::scan_roots([&](double x) { return poly(q, x); }, -5000.0, 5000.0, 200000);
            REQUIRE(roots.size() == ref.size());
            for (std::size_t i = 0; i < roots.size(); ++i)
                CHECK(std::abs(roots[i] - ref[i]) <= 1e-9 * std::max(1.0, std::abs(ref[i])));
        }
    }
}

TEST_CASE("equilibria agree with a bisection of the reduced prey equation") {
    for (double r : {1.29, 1.37, 1.47}) {
        const Params p = Params::table2(r);
        const std::optional<Equilibrium> found[3] = {feasible_interior(p), boundary1(p).equilibrium, boundary2(p).equilibrium};
        for (int which = 0; which < 3; ++which) {
            const auto ref = oracle::scan_roots([&](double x) { return oracle::reduced_prey(p, x, which); },
                                                oracle::reduced_lower_bound(p, which) * (1 + 1e-12), 5000.0);
            REQUIRE(ref.size() == 1);
            REQUIRE(found[which]);
            CHECK(std::abs(found[which]->coords.x1 - ref[0]) <= 1e-9 * ref[0]);
        }
    }
}

TEST_CASE("feasible equilibria have vanishing residual") {
    for (double r : {1.29, 1.37, 1.47}) {
        const Params p = Params::table2(r);
        for (const auto& e : all_equilibria(p))
            if (e.feasible) CHECK(residual_inf(p, e) < 1e-8);
    }
}

TEST_CASE("base parameters give four equilibria") {
    const auto eqs = all_equilibria(Params::table2(1.37));
    REQUIRE(eqs.size() == 4);
    CHECK(eqs[0].kind == EquilibriumKind::Trivial);
    CHECK(eqs[1].kind == EquilibriumKind::Boundary1);
    CHECK(eqs[2].kind == EquilibriumKind::Boundary2);
    CHECK(eqs[3].kind == EquilibriumKind::Interior);
    for (const auto& e : eqs) CHECK(e.feasible);
    const State s = eqs[3].coords;
    CHECK(s.x1 == doctest::Approx(163.32648).epsilon(1e-6));
    CHECK(s.x2 == doctest::Approx(57.23523).epsilon(1e-6));
    CHECK(s.x3 == doctest::Approx(66.06411).epsilon(1e-6));
}

TEST_CASE("interior quadratic reports the sign of its leading symbol") {
    const auto cands = interior(Params::table2(1.37));
    REQUIRE(!cands.empty());
    bool found = false;
    for (const auto& d : cands.front().diagnostics) found = found || d.name.find("n1") != std::string::npos;
    CHECK(found);
}

TEST_CASE("boundary equilibrium absent when the predator cannot persist on prey alone") {
    Params p = Params::table2(1.37);
    p.c1 = 0.5;  // c1 e1 < delta1
    const auto b = boundary1(p);
    CHECK_FALSE(b.equilibrium);
    REQUIRE(!b.diagnostics.empty());
    CHECK_FALSE(b.diagnostics.front().satisfied);
}

TEST_CASE("property: feasibility is equivalent to positivity") {
    std::mt19937_64 rng(99);
    int feasible_seen = 0, infeasible_seen = 0;
    for (int n = 0; n < 2000; ++n) {
        const Params p = random_params(rng);
        for (const auto& e : all_equilibria(p)) {
            if (e.kind == EquilibriumKind::Trivial) continue;
            const State s = e.coords;
            bool positive = s.x1 > 0;
            if (e.kind != EquilibriumKind::Boundary2) positive = positive && s.x2 > 0;
            if (e.kind != EquilibriumKind::Boundary1) positive = positive && s.x3 > 0;
            CHECK(e.feasible == positive);
            if (e.feasible) {
                ++feasible_seen;
                CHECK(residual_inf(p, e) < 1e-8 * std::max(1.0, std::max({s.x1, s.x2, s.x3})));
            } else {
                ++infeasible_seen;
            }
        }
    }
    CHECK(feasible_seen > 100);
    CHECK(infeasible_seen > 10);
}
