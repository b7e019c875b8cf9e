#include "bddyn/validation.hpp"

#include <algorithm>
#include <cmath>

namespace bddyn {

double jacobian_fd_error(const Params& p, const State& x, const JacobianFn& jac) {
    const Jacobian3 J = jac(p, x);
    const Vec3 base = x.vec();
    Mat3 fd{};
    for (int j = 0; j < 3; ++j) {
        const double h = fd_step(base[j]);
        Vec3 up = base, dn = base;
        up[j] += h;
        dn[j] -= h;
        const Vec3 fu = rhs(p, State::from(up)).vec();
        const Vec3 fdn = rhs(p, State::from(dn)).vec();
        for (int i = 0; i < 3; ++i) fd[i][j] = (fu[i] - fdn[i]) / (2.0 * h);
    }
    double diff = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) diff = std::max(diff, std::abs(J(i, j) - fd[i][j]));
    return diff / std::max(max_abs(fd), 1e-300);
}

double jacobian_fd_error(const Params& p, const State& x) {
    return jacobian_fd_error(p, x, [](const Params& q, const State& s) { return jacobian(q, s); });
}

double hessian_fd_error(const Params& p, const State& x) {
    const HessianTensor H = hessian(p, x);
    const Vec3 base = x.vec();
    double diff = 0.0, scale = 0.0;
    for (int k = 0; k < 3; ++k) {
        const double h = fd_step(base[k]);
        Vec3 up = base, dn = base;
        up[k] += h;
        dn[k] -= h;
        const Jacobian3 Ju = jacobian(p, State::from(up));
        const Jacobian3 Jd = jacobian(p, State::from(dn));
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                const double fd = (Ju(i, j) - Jd(i, j)) / (2.0 * h);
                diff = std::max(diff, std::abs(H(i, j, k) - fd));
                scale = std::max(scale, std::abs(fd));
            }
    }
    return diff / std::max(scale, 1e-300);
}

std::vector<State> random_states(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(std::log(0.1), std::log(500.0));
    std::vector<State> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double a = std::exp(u(rng)), b = std::exp(u(rng)), c = std::exp(u(rng));
        out.push_back({a, b, c});
    }
    return out;
}

std::vector<Mat3> random_structured_matrices(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Mat3> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Mat3 m{};
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c)
                if (!((r == 1 && c == 2) || (r == 2 && c == 1))) m[r][c] = u(rng);
        out.push_back(m);
    }
    return out;
}

CharPolyCheck charpoly_check(const std::vector<Mat3>& matrices) {
    CharPolyCheck out;
    for (const Mat3& m : matrices) {
        const double s = std::max(max_abs(m), 1e-300);
        auto d = [&](double lambda) {
            Mat3 a{};
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) a[i][j] = (i == j ? lambda : 0.0) - m[i][j];
            return det3(a);
        };
        const double d0 = d(0.0), dp = d(s) - s * s * s, dm = d(-s) + s * s * s;
        const double k3 = d0;
        const double k1 = ((dp + dm) / 2.0 - k3) / (s * s);
        const double k2 = (dp - dm) / (2.0 * s);
        const CharPoly cp = char_poly(Jacobian3{m});
        out.max_coeff_error = std::max({out.max_coeff_error, std::abs(cp.k1 - k1) / std::max(std::abs(k1), s),
                                        std::abs(cp.k2 - k2) / std::max(std::abs(k2), s * s),
                                        std::abs(cp.k3 - k3) / std::max(std::abs(k3), s * s * s)});

        const Spectrum roots = cubic_roots(cp.k1, cp.k2, cp.k3);
        bool near_axis = false, all_negative = true;
        for (const auto& z : roots) {
            if (std::abs(z.real()) < 1e-9 * s) near_axis = true;
            if (z.real() >= 0.0) all_negative = false;
        }
        if (near_axis) continue;
        ++out.compared;
        if (routh_hurwitz(cp) != all_negative) ++out.rh_mismatches;
    }
    return out;
}

GateResult gate(std::string name, double measured, std::string relation, double threshold, std::string detail) {
    GateResult g;
    g.name = std::move(name);
    g.measured = measured;
    g.relation = std::move(relation);
    g.threshold = threshold;
    g.detail = std::move(detail);
    if (g.relation == "<")
        g.passed = measured < threshold;
    else if (g.relation == ">")
        g.passed = measured > threshold;
    else if (g.relation == "<=")
        g.passed = measured <= threshold;
    else
        g.passed = measured >= threshold;
    if (!std::isfinite(measured)) g.passed = false;
    return g;
}

}  // namespace bddyn
