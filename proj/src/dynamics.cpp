#include "bddyn/dynamics.hpp"

#include "bddyn/equilibria.hpp"
#include "bddyn/parallel.hpp"
#include "bddyn/stability.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bddyn {

void IntegratorConfig::validate() const {
    auto in_unit = [](double v, const char* name) {
        if (!(v > 0.0 && v < 1.0)) throw UsageError(std::string("integrator.") + name + " must lie in (0, 1)");
    };
    in_unit(rel_tol, "rel_tol");
    in_unit(abs_tol, "abs_tol");
    if (!(t_end > 0.0) || !std::isfinite(t_end)) throw UsageError("integrator.t_end must be a finite positive number");
    if (!(max_step > 0.0)) throw UsageError("integrator.max_step must be positive");
    if (!(transient_fraction >= 0.0 && transient_fraction < 1.0))
        throw UsageError("integrator.transient_fraction must lie in [0, 1)");
    if (!(extinction_threshold > 0.0)) throw UsageError("integrator.extinction_threshold must be positive");
    if (!(sample_interval > 0.0)) throw UsageError("integrator.sample_interval must be positive");
    if (min_samples < 2) throw UsageError("integrator.min_samples must be at least 2");
    if (max_steps == 0) throw UsageError("integrator.max_steps must be positive");
}

std::size_t IntegratorConfig::sample_count() const {
    const auto by_interval = static_cast<std::size_t>(std::floor(t_end / sample_interval)) + 1;
    return std::max(min_samples, by_interval);
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200, e6 = 22.0 / 525,
                 e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

constexpr double kBeta = 0.04;
constexpr double kAlpha = 0.2 - 0.75 * kBeta;
constexpr double kSafe = 0.9;
constexpr double kFacMin = 0.2;
constexpr double kFacMax = 10.0;

Vec3 axpy(const Vec3& y, double h, std::initializer_list<std::pair<double, const Vec3*>> terms) {
    Vec3 out = y;
    for (const auto& [c, k] : terms)
        for (int i = 0; i < 3; ++i) out[i] += h * c * (*k)[i];
    return out;
}

bool finite(const Vec3& v) { return std::isfinite(v[0]) && std::isfinite(v[1]) && std::isfinite(v[2]); }

double err_norm(const Vec3& e, const Vec3& y0, const Vec3& y1, const IntegratorConfig& cfg) {
    double n = 0.0;
    for (int i = 0; i < 3; ++i) {
        const double sk = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y0[i]), std::abs(y1[i]));
        n = std::max(n, std::abs(e[i]) / sk);
    }
    return n;
}

double initial_step(const Params& p, const Vec3& y0, const Vec3& f0, const IntegratorConfig& cfg) {
    double dy = 0.0, df = 0.0;
    for (int i = 0; i < 3; ++i) {
        const double sk = cfg.abs_tol + cfg.rel_tol * std::abs(y0[i]);
        dy = std::max(dy, std::abs(y0[i]) / sk);
        df = std::max(df, std::abs(f0[i]) / sk);
    }
    double h0 = (dy < 1e-5 || df < 1e-5) ? 1e-6 : 0.01 * dy / df;
    h0 = std::min(h0, cfg.max_step);
    const Vec3 y1 = axpy(y0, h0, {{1.0, &f0}});
    const Vec3 f1 = vector_field(p, y1);
    double d2 = 0.0;
    for (int i = 0; i < 3; ++i) {
        const double sk = cfg.abs_tol + cfg.rel_tol * std::abs(y0[i]);
        d2 = std::max(d2, std::abs(f1[i] - f0[i]) / sk / h0);
    }
    const double dm = std::max(df, d2);
    const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
    return std::min({100.0 * h0, h1, cfg.max_step, cfg.t_end});
}

}  // namespace

Trajectory integrate(const Params& p, const State& init, const IntegratorConfig& cfg) {
    cfg.validate();
    p.validate();
    const Vec3 y_init = init.vec();
    if (!finite(y_init)) throw DomainError("integrate: initial state must be finite");
    if (y_init[0] < 0.0 || y_init[1] < 0.0 || y_init[2] < 0.0)
        throw DomainError("integrate: initial state must lie in the closed positive octant");

    const std::size_t n_samples = cfg.sample_count();
    const double dt_sample = cfg.t_end / static_cast<double>(n_samples - 1);
    Trajectory traj;
    traj.t.reserve(n_samples);
    traj.states.reserve(n_samples);
    traj.t.push_back(0.0);
    traj.states.push_back(init);
    std::size_t next_sample = 1;

    Vec3 y = y_init;
    Vec3 k1 = vector_field(p, y);
    double t = 0.0;
    double h = initial_step(p, y, k1, cfg);
    double err_old = 1e-4;
    bool last_rejected = false;

    while (next_sample < n_samples) {
        if (cfg.t_end - t <= 1e-13 * cfg.t_end) {
            for (; next_sample < n_samples; ++next_sample) {
                traj.t.push_back(next_sample + 1 == n_samples ? cfg.t_end : dt_sample * static_cast<double>(next_sample));
                traj.states.push_back(State::from(y));
            }
            break;
        }
        if (traj.steps + traj.rejected >= cfg.max_steps)
            throw StiffnessError("integrate: step budget exhausted at t=" + std::to_string(t), std::move(traj));
        if (h < 1e-14 * std::max(1.0, std::abs(t)))
            throw StiffnessError("integrate: step size underflow at t=" + std::to_string(t), std::move(traj));
        if (t + h > cfg.t_end) h = cfg.t_end - t;

        const Vec3 k2 = vector_field(p, axpy(y, h, {{a21, &k1}}));
        const Vec3 k3 = vector_field(p, axpy(y, h, {{a31, &k1}, {a32, &k2}}));
        const Vec3 k4 = vector_field(p, axpy(y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
        const Vec3 k5 = vector_field(p, axpy(y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
        const Vec3 y6 = axpy(y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}});
        const Vec3 k6 = vector_field(p, y6);
        const Vec3 y_new = axpy(y, h, {{a71, &k1}, {a73, &k3}, {a74, &k4}, {a75, &k5}, {a76, &k6}});
        const Vec3 k7 = vector_field(p, y_new);
        if (!finite(y_new) || !finite(k7)) {
            if (h > 1e-3 * cfg.max_step && !last_rejected) {
                h *= 0.1;
                ++traj.rejected;
                last_rejected = true;
                continue;
            }
            throw DivergenceError("integrate: non-finite state at t=" + std::to_string(t), std::move(traj));
        }
        Vec3 e{};
        for (int i = 0; i < 3; ++i)
            e[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
        const double err = err_norm(e, y, y_new, cfg);
        const double fac11 = std::pow(err, kAlpha);

        if (err <= 1.0) {
            double fac = fac11 / std::pow(err_old, kBeta);
            fac = std::clamp(fac / kSafe, 1.0 / kFacMax, 1.0 / kFacMin);
            double h_new = h / fac;
            if (last_rejected) h_new = std::min(h_new, h);
            err_old = std::max(err, 1e-4);

            const double t_new = (t + h >= cfg.t_end) ? cfg.t_end : t + h;
            Vec3 r2{}, r3{}, r4{}, r5{};
            for (int i = 0; i < 3; ++i) {
                r2[i] = y_new[i] - y[i];
                r3[i] = h * k1[i] - r2[i];
                r4[i] = r2[i] - h * k7[i] - r3[i];
                r5[i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
            }
            while (next_sample < n_samples) {
                const double ts = next_sample + 1 == n_samples ? cfg.t_end : dt_sample * static_cast<double>(next_sample);
                if (ts > t_new) break;
                const double th = (ts - t) / h;
                const double th1 = 1.0 - th;
                Vec3 ys{};
                for (int i = 0; i < 3; ++i) ys[i] = y[i] + th * (r2[i] + th1 * (r3[i] + th * (r4[i] + th1 * r5[i])));
                traj.t.push_back(ts);
                traj.states.push_back(State::from(ys));
                ++next_sample;
            }
            y = y_new;
            k1 = k7;
            t = t_new;
            ++traj.steps;
            h = std::min(h_new, cfg.max_step);
            last_rejected = false;
        } else {
            h /= std::min(1.0 / kFacMin, fac11 / kSafe);
            ++traj.rejected;
            last_rejected = true;
        }
    }
    return traj;
}

std::string_view to_string(AttractorClass c) {
    switch (c) {
        case AttractorClass::Steady: return "Steady";
        case AttractorClass::Periodic: return "Periodic";
        case AttractorClass::Extinction: return "Extinction";
        case AttractorClass::Diverged: return "Diverged";
        case AttractorClass::Undetermined: return "Undetermined";
    }
    return "?";
}

namespace {

struct Peak {
    double t;
    double value;
};

// Strict local maxima with parabolic refinement of position and height.
std::vector<Peak> local_maxima(const std::vector<double>& t, const std::vector<double>& v, std::size_t from) {
    std::vector<Peak> peaks;
    for (std::size_t i = from + 1; i + 1 < v.size(); ++i) {
        if (!(v[i] > v[i - 1] && v[i] >= v[i + 1])) continue;
        const double ym = v[i - 1], y0 = v[i], yp = v[i + 1];
        const double denom = ym - 2.0 * y0 + yp;
        double shift = 0.0;
        if (denom < 0.0) shift = std::clamp(0.5 * (ym - yp) / denom, -0.5, 0.5);
        const double dt = t[i + 1] - t[i];
        peaks.push_back({t[i] + shift * dt, y0 - 0.25 * (ym - yp) * shift});
    }
    return peaks;
}

double component(const State& s, int i) { return i == 0 ? s.x1 : (i == 1 ? s.x2 : s.x3); }

}  // namespace

CycleEstimate detect_attractor(const Trajectory& traj, const IntegratorConfig& cfg, const AttractorScale& scale) {
    CycleEstimate est;
    const std::size_t n = traj.t.size();
    if (n == 0) return est;
    const double t_last = traj.t.back();
    const double t_cut = cfg.transient_fraction * t_last;
    std::size_t from = 0;
    while (from + 1 < n && traj.t[from] < t_cut) ++from;

    est.min = {INFINITY, INFINITY, INFINITY};
    est.max = {-INFINITY, -INFINITY, -INFINITY};
    Vec3 mean{};
    for (std::size_t j = from; j < n; ++j)
        for (int i = 0; i < 3; ++i) {
            const double v = component(traj.states[j], i);
            est.min[i] = std::min(est.min[i], v);
            est.max[i] = std::max(est.max[i], v);
            mean[i] += std::abs(v);
        }
    for (int i = 0; i < 3; ++i) {
        est.amplitude[i] = est.max[i] - est.min[i];
        mean[i] /= static_cast<double>(n - from);
    }

    double peak_all = 0.0;
    for (const auto& s : traj.states) peak_all = std::max({peak_all, std::abs(s.x1), std::abs(s.x2), std::abs(s.x3)});
    if (peak_all > scale.divergence_bound || !std::isfinite(peak_all)) {
        est.classification = AttractorClass::Diverged;
        return est;
    }
    for (int i = 0; i < 3; ++i)
        if (est.max[i] < cfg.extinction_threshold) est.extinct.push_back(i + 1);
    if (!est.extinct.empty()) {
        est.classification = AttractorClass::Extinction;
        return est;
    }

    const Vec3 mag = scale.magnitude.value_or(mean);
    bool steady = true;
    int lead = 0;
    double lead_rel = -1.0;
    for (int i = 0; i < 3; ++i) {
        const double threshold = kAmplitudeRelThreshold * std::abs(mag[i]);
        if (est.amplitude[i] >= threshold) steady = false;
        const double rel = est.amplitude[i] / std::max(std::abs(mag[i]), 1e-300);
        if (rel > lead_rel) {
            lead_rel = rel;
            lead = i;
        }
    }
    if (steady) {
        est.classification = AttractorClass::Steady;
        return est;
    }

    std::vector<double> v(n);
    for (std::size_t j = 0; j < n; ++j) v[j] = component(traj.states[j], lead);
    const auto peaks = local_maxima(traj.t, v, from);
    est.maxima = peaks.size();
    if (peaks.size() < kMinMaxima) return est;

    std::vector<double> intervals;
    for (std::size_t j = 1; j < peaks.size(); ++j) intervals.push_back(peaks[j].t - peaks[j - 1].t);
    const auto [lo, hi] = std::minmax_element(intervals.begin(), intervals.end());
    const double mean_interval = std::accumulate(intervals.begin(), intervals.end(), 0.0) / intervals.size();
    est.interval_spread = (*hi - *lo) / mean_interval;

    // Peak-to-trough height over the first and last cycle of the window.
    auto height_near = [&](double t0, double t1) {
        double a = INFINITY, b = -INFINITY;
        for (std::size_t j = from; j < n; ++j) {
            if (traj.t[j] < t0 || traj.t[j] > t1) continue;
            a = std::min(a, v[j]);
            b = std::max(b, v[j]);
        }
        return b - a;
    };
    const double early = height_near(peaks.front().t, peaks.front().t + mean_interval);
    const double late = height_near(peaks.back().t - mean_interval, peaks.back().t);
    est.envelope_ratio = early > 0.0 ? late / early : 1.0;

    if (est.interval_spread < kIntervalSpreadLimit) {
        est.period = mean_interval;
        if (est.envelope_ratio >= kEnvelopeRatioMin) est.classification = AttractorClass::Periodic;
    }
    return est;
}

AttractorScale attractor_scale(const Params& p, const std::optional<State>& estar) {
    AttractorScale s;
    if (estar) s.magnitude = estar->vec();
    s.divergence_bound = 10.0 * boundedness_bounds(p).M;
    return s;
}

State perturbed(const State& x, double fraction) {
    const double d = fraction * norm2(x.vec()) / std::sqrt(3.0);
    return {x.x1 + d, x.x2 + d, x.x3 + d};
}

std::size_t SweepResult::succeeded() const {
    return static_cast<std::size_t>(std::count_if(points.begin(), points.end(), [](const auto& s) { return s.ok; }));
}

SweepResult sweep_r(const Params& p, double r_lo, double r_hi, std::size_t n_points, const IntegratorConfig& cfg) {
    if (!(r_lo < r_hi)) throw UsageError("sweep: r_lo must be less than r_hi");
    if (n_points < 2) throw UsageError("sweep: n_points must be at least 2");
    cfg.validate();
    SweepResult out;
    out.points.resize(n_points);
    for (std::size_t i = 0; i < n_points; ++i)
        out.points[i].r = i + 1 == n_points ? r_hi
                                            : r_lo + (r_hi - r_lo) * static_cast<double>(i) / static_cast<double>(n_points - 1);

    parallel_for(n_points, [&](std::size_t i) {
        SweepPoint& pt = out.points[i];
        try {
            const Params q = p.with_r(pt.r);
            q.validate();
            const auto estar = feasible_interior(q);
            if (!estar) {
                pt.error = "no feasible interior equilibrium";
                return;
            }
            pt.estar = estar->coords;
            const double c2 = char_poly(jacobian(q, estar->coords)).c2;
            pt.c2_sign = (c2 > 0.0) - (c2 < 0.0);
            const Trajectory traj = integrate(q, perturbed(estar->coords, kSweepPerturbation), cfg);
            pt.estimate = detect_attractor(traj, cfg, attractor_scale(q, pt.estar));
            pt.ok = true;
        } catch (const DivergenceError& e) {
            pt.estimate.classification = AttractorClass::Diverged;
            pt.error = e.what();
            pt.ok = true;
        } catch (const std::exception& e) {
            pt.error = e.what();
        }
    });
    return out;
}

std::vector<ConvergenceReport> convergence_test(const Params& p, const std::vector<State>& inits, const State& target,
                                                double tol, const IntegratorConfig& cfg) {
    if (!(tol > 0.0)) throw UsageError("convergence: tol must be positive");
    for (const auto& s : inits)
        if (!(s.x1 >= 0.0 && s.x2 >= 0.0 && s.x3 >= 0.0))
            throw UsageError("convergence: initial states must lie in the closed positive octant");
    cfg.validate();
    const double radius = tol * norm2(target.vec());
    auto distance = [&](const State& s) {
        return norm2({s.x1 - target.x1, s.x2 - target.x2, s.x3 - target.x3});
    };
    std::vector<ConvergenceReport> out(inits.size());
    parallel_for(inits.size(), [&](std::size_t i) {
        ConvergenceReport& rep = out[i];
        rep.init = inits[i];
        Trajectory traj;
        try {
            traj = integrate(p, inits[i], cfg);
        } catch (const IntegrationError& e) {
            rep.error = e.what();
            traj = e.trajectory;
        }
        for (std::size_t j = 0; j < traj.t.size(); ++j)
            if (distance(traj.states[j]) <= radius) {
                rep.entry_time = traj.t[j];
                break;
            }
        if (!traj.states.empty()) {
            rep.final_state = traj.states.back();
            rep.final_distance = distance(rep.final_state);
            rep.converged = rep.error.empty() && rep.final_distance <= radius;
        }
    });
    return out;
}

}  // namespace bddyn
