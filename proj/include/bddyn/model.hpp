#pragma once

#include "bddyn/linalg.hpp"

#include <array>
#include <string_view>

namespace bddyn {

/// Constants of the three-species system: one prey x1 with quasi-linear growth,
/// two predators x2, x3 each consuming the prey through a Beddington-DeAngelis response.
struct Params {
    double r = 0;       // prey growth rate
    double k = 0;       // growth half-saturation
    double a1 = 0;      // predation half-saturation, predator 1
    double a2 = 0;      // predation half-saturation, predator 2
    double b1 = 0;      // mutual interference, predator 1
    double b2 = 0;      // mutual interference, predator 2
    double c1 = 0;      // search rate, predator 1
    double c2 = 0;      // search rate, predator 2
    double delta1 = 0;  // death rate, predator 1
    double delta2 = 0;  // death rate, predator 2
    double e1 = 0;      // conversion factor, predator 1 (0 < e1 < 1)
    double e2 = 0;      // conversion factor, predator 2 (0 < e2 < 1)

    /// Throws DomainError naming the first field that violates positivity or e_i < 1.
    void validate() const;

    /// Base parameter set used throughout the numerical experiments; r must be supplied.
    static Params table2(double r);

    Params with_r(double new_r) const {
        Params p = *this;
        p.r = new_r;
        return p;
    }
};

inline constexpr std::array<std::string_view, 12> kParamNames = {
    "r", "k", "a1", "a2", "b1", "b2", "c1", "c2", "delta1", "delta2", "e1", "e2"};

double& param_ref(Params& p, std::string_view name);
double param_value(const Params& p, std::string_view name);

struct State {
    double x1 = 0;  // prey
    double x2 = 0;  // predator 1
    double x3 = 0;  // predator 2

    Vec3 vec() const { return {x1, x2, x3}; }
    static State from(const Vec3& v) { return {v[0], v[1], v[2]}; }
};

struct Deriv {
    double dx1 = 0;
    double dx2 = 0;
    double dx3 = 0;

    Vec3 vec() const { return {dx1, dx2, dx3}; }
};

// Indices are zero-based: J(i, j) = d f_i / d x_j. J(1,2) and J(2,1) vanish identically.
struct Jacobian3 {
    Mat3 m{};
    double operator()(int i, int j) const { return m[i][j]; }
};

// H(i, j, k) = d^2 f_i / d x_j d x_k, symmetric in (j, k).
struct HessianTensor {
    std::array<Mat3, 3> h{};
    double operator()(int i, int j, int k) const { return h[i][j][k]; }
};

/// Unchecked vector field; used by the integrator on intermediate stages.
Vec3 vector_field(const Params& p, const Vec3& x) noexcept;

Deriv rhs(const Params& p, const State& s);

/// c_i x1 x_pred / (a_i + x1 + b_i x_pred) for predator_index 1 or 2.
double response(const Params& p, const State& s, int predator_index);

Jacobian3 jacobian(const Params& p, const State& s);
HessianTensor hessian(const Params& p, const State& s);

}  // namespace bddyn
