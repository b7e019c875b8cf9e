#include "bddyn/model.hpp"

#include "bddyn/errors.hpp"

#include <cmath>
#include <string>

namespace bddyn {

namespace {

void check_state(const State& s, const char* op) {
    for (double v : {s.x1, s.x2, s.x3}) {
        if (!std::isfinite(v)) throw DomainError(std::string(op) + ": non-finite state component");
        if (v < 0.0) throw DomainError(std::string(op) + ": negative population " + std::to_string(v));
    }
}

void check_params_finite(const Params& p, const char* op) {
    for (auto name : kParamNames)
        if (!std::isfinite(param_value(p, name)))
            throw DomainError(std::string(op) + ": non-finite parameter " + std::string(name));
}

}  // namespace

void Params::validate() const {
    for (auto name : kParamNames) {
        const double v = param_value(*this, name);
        if (!std::isfinite(v) || v <= 0.0)
            throw DomainError("parameter '" + std::string(name) + "' must be a finite positive number");
    }
    if (e1 >= 1.0) throw DomainError("parameter 'e1' must satisfy 0 < e1 < 1");
    if (e2 >= 1.0) throw DomainError("parameter 'e2' must satisfy 0 < e2 < 1");
}

Params Params::table2(double r) {
    Params p;
    p.r = r;
    p.k = 200.0;
    p.a1 = 100.0;
    p.a2 = 100.0;
    p.b1 = 0.5;
    p.b2 = 0.5;
    p.c1 = 1.8;
    p.c2 = 1.8;
    p.delta1 = 0.82;
    p.delta2 = 0.62;
    p.e1 = 0.8143;
    p.e2 = 0.6250;
    return p;
}

double& param_ref(Params& p, std::string_view name) {
    if (name == "r") return p.r;
    if (name == "k") return p.k;
    if (name == "a1") return p.a1;
    if (name == "a2") return p.a2;
    if (name == "b1") return p.b1;
    if (name == "b2") return p.b2;
    if (name == "c1") return p.c1;
    if (name == "c2") return p.c2;
    if (name == "delta1") return p.delta1;
    if (name == "delta2") return p.delta2;
    if (name == "e1") return p.e1;
    if (name == "e2") return p.e2;
    throw UsageError("unknown parameter '" + std::string(name) + "'");
}

double param_value(const Params& p, std::string_view name) {
    return param_ref(const_cast<Params&>(p), name);
}

Vec3 vector_field(const Params& p, const Vec3& x) noexcept {
    const double x1 = x[0], x2 = x[1], x3 = x[2];
    const double g1 = p.c1 * x1 * x2 / (p.a1 + x1 + p.b1 * x2);
    const double g2 = p.c2 * x1 * x3 / (p.a2 + x1 + p.b2 * x3);
    // r x1 (1 - x1/(x1+k)) written without the cancellation
    const double growth = p.r * x1 * p.k / (x1 + p.k);
    return {growth - g1 - g2, -p.delta1 * x2 + p.e1 * g1, -p.delta2 * x3 + p.e2 * g2};
}

Deriv rhs(const Params& p, const State& s) {
    check_params_finite(p, "rhs");
    check_state(s, "rhs");
    const Vec3 f = vector_field(p, s.vec());
    return {f[0], f[1], f[2]};
}

double response(const Params& p, const State& s, int predator_index) {
    check_state(s, "response");
    switch (predator_index) {
        case 1: return p.c1 * s.x1 * s.x2 / (p.a1 + s.x1 + p.b1 * s.x2);
        case 2: return p.c2 * s.x1 * s.x3 / (p.a2 + s.x1 + p.b2 * s.x3);
        default: throw UsageError("response: predator index must be 1 or 2");
    }
}

Jacobian3 jacobian(const Params& p, const State& s) {
    check_params_finite(p, "jacobian");
    check_state(s, "jacobian");
    const double x1 = s.x1, x2 = s.x2, x3 = s.x3;
    const double d1 = p.a1 + x1 + p.b1 * x2;
    const double d2 = p.a2 + x1 + p.b2 * x3;
    const double d1sq = d1 * d1, d2sq = d2 * d2;
    const double xk = x1 + p.k;

    // d/dx1 of the two responses divided by their conversion-free coefficients
    const double g1_x1 = p.c1 * x2 * (p.a1 + p.b1 * x2) / d1sq;
    const double g2_x1 = p.c2 * x3 * (p.a2 + p.b2 * x3) / d2sq;
    const double g1_x2 = p.c1 * x1 * (p.a1 + x1) / d1sq;
    const double g2_x3 = p.c2 * x1 * (p.a2 + x1) / d2sq;

    Jacobian3 J;
    J.m[0][0] = p.r * p.k * p.k / (xk * xk) - g1_x1 - g2_x1;
    J.m[0][1] = -g1_x2;
    J.m[0][2] = -g2_x3;
    J.m[1][0] = p.e1 * g1_x1;
    J.m[1][1] = -p.delta1 + p.e1 * g1_x2;
    J.m[1][2] = 0.0;
    J.m[2][0] = p.e2 * g2_x1;
    J.m[2][1] = 0.0;
    J.m[2][2] = -p.delta2 + p.e2 * g2_x3;
    return J;
}

HessianTensor hessian(const Params& p, const State& s) {
    check_params_finite(p, "hessian");
    check_state(s, "hessian");
    const double x1 = s.x1, x2 = s.x2, x3 = s.x3;
    const double d1 = p.a1 + x1 + p.b1 * x2;
    const double d2 = p.a2 + x1 + p.b2 * x3;
    const double d1cu = d1 * d1 * d1, d2cu = d2 * d2 * d2;
    const double xk = x1 + p.k;

    // Second derivatives of the two responses g_i = c_i x1 x_pred / d_i.
    const double g1_11 = -2.0 * p.c1 * x2 * (p.a1 + p.b1 * x2) / d1cu;
    const double g1_22 = -2.0 * p.b1 * p.c1 * x1 * (p.a1 + x1) / d1cu;
    const double g1_12 = (p.c1 * p.a1 * d1 + 2.0 * p.b1 * p.c1 * x1 * x2) / d1cu;
    const double g2_11 = -2.0 * p.c2 * x3 * (p.a2 + p.b2 * x3) / d2cu;
    const double g2_33 = -2.0 * p.b2 * p.c2 * x1 * (p.a2 + x1) / d2cu;
    const double g2_13 = (p.c2 * p.a2 * d2 + 2.0 * p.b2 * p.c2 * x1 * x3) / d2cu;

    HessianTensor H;
    auto set = [&H](int i, int j, int k, double v) {
        H.h[i][j][k] = v;
        H.h[i][k][j] = v;
    };
    set(0, 0, 0, -2.0 * p.r * p.k * p.k / (xk * xk * xk) - g1_11 - g2_11);
    set(0, 1, 1, -g1_22);
    set(0, 2, 2, -g2_33);
    set(0, 0, 1, -g1_12);
    set(0, 0, 2, -g2_13);
    set(1, 0, 0, p.e1 * g1_11);
    set(1, 1, 1, p.e1 * g1_22);
    set(1, 0, 1, p.e1 * g1_12);
    set(2, 0, 0, p.e2 * g2_11);
    set(2, 2, 2, p.e2 * g2_33);
    set(2, 0, 2, p.e2 * g2_13);
    return H;
}

}  // namespace bddyn
