#include "bddyn/commands.hpp"

#include "bddyn/equilibria.hpp"
#include "bddyn/errors.hpp"
#include "bddyn/hopf.hpp"
#include "bddyn/stability.hpp"
#include "bddyn/validation.hpp"

#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <fstream>
#include <random>

namespace bddyn {

namespace {

std::string strf(const char* fmt, ...) {
    va_list ap;
    va_start(ap, fmt);
    char buf[1024];
    std::vsnprintf(buf, sizeof buf, fmt, ap);
    va_end(ap);
    return buf;
}

Json header(std::string_view command, const RunConfig& cfg) {
    Json j;
    j["command"] = std::string(command);
    j["config"] = config_json(cfg);
    return j;
}

std::string state_str(const State& s) { return strf("(%.10g, %.10g, %.10g)", s.x1, s.x2, s.x3); }

State require_interior(const Params& p) {
    const auto e = feasible_interior(p);
    if (!e) throw EvaluationError("no feasible interior equilibrium", p.r);
    return e->coords;
}

std::string condition_row(const ConditionReport& c) {
    if (!c.evaluable) return strf("  %-26s %-48s not evaluable", c.label.c_str(), c.name.c_str());
    return strf("  %-26s %-48s %.10g %s %.10g  %s", c.label.c_str(), c.name.c_str(), c.lhs, c.relation.c_str(), c.rhs,
                c.satisfied ? "holds" : "fails");
}

Json gates_json(const std::vector<GateResult>& gates) {
    Json a = Json::array();
    for (const auto& g : gates) {
        Json x;
        x["name"] = g.name;
        x["measured"] = g.measured;
        x["relation"] = g.relation;
        x["threshold"] = g.threshold;
        x["passed"] = g.passed;
        if (!g.detail.empty()) x["detail"] = g.detail;
        a.push_back(x);
    }
    return a;
}

}  // namespace

Bundle cmd_equilibria(const RunConfig& cfg) {
    const Params& p = cfg.params;
    Bundle b;
    b.doc = header("equilibria", cfg);
    Json list = Json::array();
    b.summary = strf("equilibria at r = %.17g\n", p.r);
    for (const auto& e : all_equilibria(p)) {
        Json j = to_json(e);
        const double res = residual_inf(p, e);
        j["residual_inf"] = res;
        list.push_back(j);
        b.summary += strf("  %-3s %s  feasible=%s  residual=%.3g\n", std::string(to_string(e.kind)).c_str(),
                          state_str(e.coords).c_str(), e.feasible ? "yes" : "no", res);
    }
    b.doc["equilibria"] = list;
    Json existence = Json::array();
    for (const auto& br : {boundary1(p), boundary2(p)})
        for (const auto& c : br.diagnostics) existence.push_back(to_json(c));
    b.doc["boundary_existence"] = existence;
    return b;
}

Bundle cmd_stability(const RunConfig& cfg) {
    const Params& p = cfg.params;
    Bundle b;
    b.doc = header("stability", cfg);
    b.summary = strf("stability at r = %.17g\n", p.r);

    Json reports = Json::array();
    const auto eqs = all_equilibria(p);
    for (const auto& e : eqs) {
        if (!e.feasible) continue;
        const StabilityReport s = classify(p, e);
        reports.push_back(to_json(s));
        const bool stable = s.classification == StabilityClass::StableNode || s.classification == StabilityClass::StableFocus;
        b.summary += strf("  %-3s %s  %s (%s)  RH=%s  C2=%.6g\n", std::string(to_string(e.kind)).c_str(),
                          state_str(e.coords).c_str(), stable ? "Stable" : "Unstable",
                          std::string(to_string(s.classification)).c_str(), s.routh_hurwitz_stable ? "yes" : "no",
                          s.charpoly.c2);
    }
    b.doc["equilibria"] = reports;

    const BoundaryResult e1 = boundary1(p), e2 = boundary2(p);
    std::vector<ConditionReport> rows = persistence_check(p, e1.equilibrium, e2.equilibrium);
    const BoundednessReport bound = boundedness_bounds(p, cfg.boundedness.sigma, cfg.boundedness.m);
    rows.insert(rows.end(), bound.conditions.begin(), bound.conditions.end());
    if (e1.equilibrium && e1.equilibrium->feasible) rows.push_back(local_condition_boundary(p, *e1.equilibrium, 1));
    if (e2.equilibrium && e2.equilibrium->feasible) rows.push_back(local_condition_boundary(p, *e2.equilibrium, 2));
    if (const auto estar = feasible_interior(p)) {
        rows.push_back(local_condition_interior(p, *estar));
        rows.push_back(global_condition(p, *estar, bound.w));
    }
    Json conds = Json::array();
    b.summary += "conditions\n";
    for (const auto& c : rows) {
        conds.push_back(to_json(c));
        b.summary += condition_row(c) + "\n";
    }
    b.doc["conditions"] = conds;
    b.doc["boundedness"] = to_json(bound);
    return b;
}

Bundle cmd_hopf(const RunConfig& cfg) {
    const Params& p = cfg.params;
    Bundle b;
    b.doc = header("hopf", cfg);
    const HopfSearchResult h = find_rc(p, cfg.hopf.bracket);
    const ClosedFormRc cf = rc_closed_form_diagnostic(p.with_r(h.r_c), h.x_star);
    const CenterManifoldReport cm = center_manifold(p, h.r_c);
    const DirectionReport dir = validate_direction(p, h.r_c, cm.direction, cfg.hopf.delta_r, cfg.integrator);

    b.doc["search"] = to_json(h);
    b.doc["closed_form"] = to_json(cf);
    b.doc["center_manifold"] = to_json(cm);
    b.doc["direction_check"] = to_json(dir);
    Json cmp = Json::array();
    cmp.push_back(Json{{"quantity", "critical growth rate"},
                       {"computed", h.r_c},
                       {"published", kPublishedRc},
                       {"relative_difference", std::abs(h.r_c - kPublishedRc) / kPublishedRc}});
    cmp.push_back(Json{{"quantity", "stability quantity"},
                       {"computed", cm.Pi},
                       {"published", kPublishedPi},
                       {"sign_agrees", (cm.Pi > 0) == (kPublishedPi > 0)}});
    b.doc["published_comparison"] = cmp;

    b.summary = strf("critical growth rate r_c = %.12g  (published %.10g, relative difference %.3g)\n", h.r_c,
                     kPublishedRc, std::abs(h.r_c - kPublishedRc) / kPublishedRc);
    b.summary += strf("  |C2(r_c)| = %.3g  k2 = %.8g  dC2/dr = %.8g  Re(pair) = %.3g\n", h.c2_residual, h.k2_at_rc,
                      h.transversality, h.eigen_crosscheck);
    if (cf.r_closed_form) b.summary += strf("  closed-form r from the J11 quadratic = %.12g\n", *cf.r_closed_form);
    b.summary += strf("Pi = %.10g  direction %s  (published %.10g)\n", cm.Pi, std::string(to_string(cm.direction)).c_str(),
                      kPublishedPi);
    b.summary += strf("  slip-corrected Pi = %.6g, full-Taylor Pi = %.6g (%s)\n", cm.Pi_composed, cm.Pi_taylor,
                      std::string(to_string(cm.direction_taylor)).c_str());
    for (const auto& e : cm.errata)
        b.summary += strf("  erratum %-7s printed %.8g consistent %.8g\n", e.quantity.c_str(), e.printed, e.consistent);
    b.summary += "direction check: " + dir.summary + "\n";
    for (const auto& run : dir.runs)
        b.summary += strf("  r=%.6f radius=%.3f %-8s %s\n", run.r, run.radius, run.stable_side ? "stable" : "unstable",
                          std::string(to_string(run.behaviour)).c_str());
    return b;
}

Bundle cmd_simulate(const RunConfig& cfg) {
    const Params& p = cfg.params;
    Bundle b;
    b.doc = header("simulate", cfg);
    const auto estar = feasible_interior(p);
    std::optional<State> xstar;
    if (estar) xstar = estar->coords;
    State init;
    if (cfg.simulate.init)
        init = *cfg.simulate.init;
    else if (xstar)
        init = perturbed(*xstar, kSweepPerturbation);
    else
        throw ConfigError("missing 'simulate.init' and no interior equilibrium to start near");
    b.doc["init"] = to_json(init);

    Trajectory traj;
    bool diverged = false;
    std::string error;
    try {
        traj = integrate(p, init, cfg.integrator);
    } catch (const IntegrationError& e) {
        traj = e.trajectory;
        diverged = true;
        error = e.what();
    }
    b.doc["diverged"] = diverged;
    if (!error.empty()) b.doc["error"] = error;
    b.doc["samples"] = traj.t.size();
    b.doc["steps"] = traj.steps;
    b.doc["rejected"] = traj.rejected;
    b.files.emplace_back("trajectory.csv", trajectory_csv(traj));

    if (diverged) {
        b.exit_code = 1;
        b.summary = "integration failed: " + error + "\n";
        return b;
    }
    const CycleEstimate est = detect_attractor(traj, cfg.integrator, attractor_scale(p, xstar));
    b.doc["cycle"] = to_json(est);
    b.summary = strf("simulate r = %.17g from %s\n", p.r, state_str(init).c_str());
    b.summary += strf("  class %s  amplitude %s", std::string(to_string(est.classification)).c_str(),
                      state_str(State::from(est.amplitude)).c_str());
    b.summary += est.period ? strf("  period %.6g\n", *est.period) : std::string("\n");
    return b;
}

Bundle cmd_sweep(const RunConfig& cfg) {
    Bundle b;
    b.doc = header("sweep", cfg);
    IntegratorConfig ic = cfg.integrator;
    ic.t_end = cfg.sweep.t_end;
    const SweepResult s = sweep_r(cfg.params, cfg.sweep.r_lo, cfg.sweep.r_hi, cfg.sweep.n_points, ic);
    b.files.emplace_back("sweep.csv", sweep_csv(s));

    Json transitions = Json::array();
    for (std::size_t i = 1; i < s.points.size(); ++i) {
        const auto& a = s.points[i - 1];
        const auto& c = s.points[i];
        if (!a.ok || !c.ok || a.estimate.classification == c.estimate.classification) continue;
        transitions.push_back(Json{{"from", std::string(to_string(a.estimate.classification))},
                                   {"to", std::string(to_string(c.estimate.classification))},
                                   {"r_lo", a.r},
                                   {"r_hi", c.r}});
    }
    Json failures = Json::array();
    for (const auto& pt : s.points)
        if (!pt.ok) failures.push_back(Json{{"r", pt.r}, {"error", pt.error}});
    b.doc["sweep"] = Json{{"r_lo", cfg.sweep.r_lo},
                          {"r_hi", cfg.sweep.r_hi},
                          {"n_points", cfg.sweep.n_points},
                          {"t_end", cfg.sweep.t_end}};
    b.doc["succeeded"] = s.succeeded();
    b.doc["transitions"] = transitions;
    b.doc["failures"] = failures;
    const double frac = static_cast<double>(s.succeeded()) / static_cast<double>(s.points.size());
    b.exit_code = frac >= 0.9 ? 0 : 1;

    b.summary = strf("sweep r in [%.6g, %.6g], %zu points: %zu succeeded\n", cfg.sweep.r_lo, cfg.sweep.r_hi,
                     s.points.size(), s.succeeded());
    for (const auto& t : transitions)
        b.summary += strf("  %s -> %s between r=%.8g and r=%.8g\n", t["from"].get<std::string>().c_str(),
                          t["to"].get<std::string>().c_str(), t["r_lo"].get<double>(), t["r_hi"].get<double>());
    return b;
}

Bundle cmd_convergence(const RunConfig& cfg) {
    const Params& p = cfg.params;
    Bundle b;
    b.doc = header("convergence", cfg);
    const State target = cfg.convergence.target ? *cfg.convergence.target : require_interior(p);
    const auto reports = convergence_test(p, cfg.convergence.inits, target, cfg.convergence.tol, cfg.integrator);
    b.doc["target"] = to_json(target);
    b.doc["tol"] = cfg.convergence.tol;
    Json a = Json::array();
    b.summary = strf("convergence at r = %.17g to %s within %.3g relative\n", p.r, state_str(target).c_str(),
                     cfg.convergence.tol);
    for (const auto& r : reports) {
        a.push_back(to_json(r));
        b.summary += strf("  from %s: %s", state_str(r.init).c_str(), r.converged ? "converged" : "did not converge");
        b.summary += r.entry_time ? strf(" (first entry t=%.6g)\n", *r.entry_time) : std::string("\n");
    }
    b.doc["reports"] = a;
    return b;
}

Bundle cmd_validate(const RunConfig& cfg) {
    const Params& p = cfg.params;
    Bundle b;
    b.doc = header("validate", cfg);
    std::vector<GateResult> gates;
    std::mt19937_64 rng(cfg.validate.seed);

    {
        double worst = 0.0;
        for (double r : {p.r, 1.29, 1.37, 1.47}) {
            const Params q = p.with_r(r);
            for (const auto& e : all_equilibria(q))
                if (e.feasible) worst = std::max(worst, residual_inf(q, e));
        }
        gates.push_back(gate("equilibrium residual", worst, "<", 1e-8, "max |rhs| over feasible equilibria"));
    }

    {
        JacobianFn jac = [](const Params& q, const State& s) { return jacobian(q, s); };
        if (cfg.validate.corrupt_jacobian)
            jac = [](const Params& q, const State& s) {
                Jacobian3 J = jacobian(q, s);
                J.m[0][1] *= 1.0 + 1e-3;
                return J;
            };
        const auto states = random_states(rng, 100);
        double jerr = 0.0, herr = 0.0;
        for (const auto& s : states) {
            jerr = std::max(jerr, jacobian_fd_error(p, s, jac));
            herr = std::max(herr, hessian_fd_error(p, s));
        }
        gates.push_back(gate("jacobian vs finite differences", jerr, "<", 1e-6, "100 random states"));
        gates.push_back(gate("hessian vs finite differences", herr, "<", 1e-5, "100 random states"));
    }

    {
        const CharPolyCheck c = charpoly_check(random_structured_matrices(rng, 1000));
        gates.push_back(gate("characteristic polynomial vs determinant sampling", c.max_coeff_error, "<", 1e-9));
        gates.push_back(gate("Routh-Hurwitz vs root signs (mismatches)", static_cast<double>(c.rh_mismatches), "<=", 0.0,
                             strf("%zu matrices outside the margin band", c.compared)));
    }

    const HopfSearchResult h = find_rc(p, cfg.hopf.bracket);
    gates.push_back(gate("|C2(r_c)|", h.c2_residual, "<", 1e-10));
    gates.push_back(gate("k2(r_c)", h.k2_at_rc, ">", 0.0));
    gates.push_back(gate("|Re pair| / spectral scale at r_c", std::abs(h.eigen_crosscheck) / h.spectral_scale, "<", 1e-6));
    gates.push_back(gate("| |Im pair| - sqrt(k2) | / sqrt(k2)", h.imag_rel_error, "<", 1e-6));
    gates.push_back(gate("|dC2/dr| at r_c", std::abs(h.transversality), ">", 1e-8));
    gates.push_back(gate("crossing slope vs -C2'/(2(k1^2+k2)) (relative)",
                         std::abs(h.slope_observed - h.slope_predicted) / std::abs(h.slope_predicted), "<", 1e-3));

    const ClosedFormRc cf = rc_closed_form_diagnostic(p.with_r(h.r_c), h.x_star);
    gates.push_back(gate("J11 quadratic residual at r_c", std::abs(cf.residual), "<", 1e-8));

    const CenterManifoldReport cm = center_manifold(p, h.r_c);
    gates.push_back(gate("block-diagonal residual / scale", cm.block_residual / cm.block_scale, "<", 1e-8));
    gates.push_back(gate("centre-manifold system residual", cm.b_residual, "<", 1e-10));
    gates.push_back(gate("closed-form b vs linear solve", cm.b_closed_vs_direct, "<", 1e-10));

    const DirectionReport dir = validate_direction(p, h.r_c, cm.direction, cfg.hopf.delta_r, cfg.integrator);
    gates.push_back(gate("oscillation below r_c, decay above", dir.core_pattern_ok ? 1.0 : 0.0, ">=", 1.0, dir.summary));

    bool all = true;
    for (const auto& g : gates) all = all && g.passed;
    b.doc["gates"] = gates_json(gates);
    b.doc["all_passed"] = all;
    b.exit_code = all ? 0 : 1;

    // Not gated: findings and the comparison against published values.
    Json findings;
    findings["errata"] = to_json(cm)["errata"];
    findings["pi_printed_chain"] = cm.Pi;
    findings["pi_slip_corrected"] = cm.Pi_composed;
    findings["pi_full_taylor"] = cm.Pi_taylor;
    findings["direction_full_taylor"] = std::string(to_string(cm.direction_taylor));
    findings["simulation_consistent_with_printed_direction"] = dir.consistent_with_direction;
    findings["direction_runs"] = to_json(dir)["runs"];
    {
        Eigenbasis scaled = cm.basis;
        for (int i = 0; i < 3; ++i) scaled.P[i][2] *= 2.0;
        scaled.Q = inverse3(scaled.P);
        const double pi_col3 = center_manifold(p, h.r_c, scaled).Pi;
        scaled = cm.basis;
        for (int i = 0; i < 3; ++i) scaled.P[i][0] *= 2.0, scaled.P[i][1] *= 2.0;
        scaled.Q = inverse3(scaled.P);
        const double pi_pair = center_manifold(p, h.r_c, scaled).Pi;
        findings["pi_ratio_third_column_scaled_2"] = pi_col3 / cm.Pi;
        findings["pi_ratio_centre_pair_scaled_2"] = pi_pair / cm.Pi;
    }
    b.doc["findings"] = findings;

    Json table = Json::array();
    auto estar_row = [&](double r) {
        const State x = require_interior(p.with_r(r));
        const double published[3] = {kPublishedEstar[0], kPublishedEstar[1], kPublishedEstar[2]};
        const double computed[3] = {x.x1, x.x2, x.x3};
        Json rel = Json::array();
        for (int i = 0; i < 3; ++i) rel.push_back((computed[i] - published[i]) / published[i]);
        return Json{{"quantity", strf("interior equilibrium at r=%.17g", r)},
                    {"computed", to_json(x)},
                    {"published", to_json(Vec3{published[0], published[1], published[2]})},
                    {"relative_difference", rel}};
    };
    table.push_back(estar_row(p.r));
    if (p.r != kPublishedEstarR) table.push_back(estar_row(kPublishedEstarR));
    const double rc_rel = std::abs(h.r_c - kPublishedRc) / kPublishedRc;
    table.push_back(Json{{"quantity", "critical growth rate"},
                         {"computed", h.r_c},
                         {"published", kPublishedRc},
                         {"relative_difference", rc_rel},
                         {"within_10_percent", rc_rel <= 0.1}});
    table.push_back(Json{{"quantity", "stability quantity"},
                         {"computed", cm.Pi},
                         {"published", kPublishedPi},
                         {"ratio", cm.Pi / kPublishedPi},
                         {"sign_agrees", (cm.Pi > 0) == (kPublishedPi > 0)}});
    table.push_back(Json{{"quantity", "bifurcation direction"},
                         {"computed_printed_chain", std::string(to_string(cm.direction))},
                         {"computed_full_taylor", std::string(to_string(cm.direction_taylor))},
                         {"published", "Subcritical"}});
    {
        const Params q = p.with_r(1.37);
        const auto c = persistence_check(q, boundary1(q).equilibrium, boundary2(q).equilibrium).front();
        table.push_back(Json{{"quantity", "persistence (i) at r=1.37: r > delta1 + delta2"},
                             {"lhs", c.lhs},
                             {"rhs", c.rhs},
                             {"satisfied", c.satisfied}});
    }
    b.doc["published_comparison"] = table;

    b.summary = "validation gates\n";
    for (const auto& g : gates)
        b.summary += strf("  [%s] %-52s %.6g %s %.3g\n", g.passed ? "pass" : "FAIL", g.name.c_str(), g.measured,
                          g.relation.c_str(), g.threshold);
    b.summary += "comparison with published values (not gated)\n";
    b.summary += strf("  interior equilibrium at r=%.6g: %s vs (%.10g, %.10g, %.10g)\n", p.r,
                      state_str(require_interior(p)).c_str(), kPublishedEstar[0], kPublishedEstar[1], kPublishedEstar[2]);
    b.summary += strf("  critical growth rate: %.12g vs %.10g (relative difference %.3g)\n", h.r_c, kPublishedRc, rc_rel);
    b.summary += strf("  stability quantity: %.6g vs %.10g (sign %s)\n", cm.Pi, kPublishedPi,
                      (cm.Pi > 0) == (kPublishedPi > 0) ? "agrees" : "differs");
    b.summary += strf("  full-Taylor stability quantity: %.6g (%s)\n", cm.Pi_taylor,
                      std::string(to_string(cm.direction_taylor)).c_str());
    b.summary += strf("  persistence (i) at r=1.37: 1.37 > %.4g %s\n", p.delta1 + p.delta2,
                      1.37 > p.delta1 + p.delta2 ? "holds" : "fails");
    b.summary += all ? "all gates passed\n" : "gate failures present\n";
    return b;
}

Bundle run_command(std::string_view command, const RunConfig& cfg) {
    if (command == "equilibria") return cmd_equilibria(cfg);
    if (command == "stability") return cmd_stability(cfg);
    if (command == "hopf") return cmd_hopf(cfg);
    if (command == "simulate") return cmd_simulate(cfg);
    if (command == "sweep") return cmd_sweep(cfg);
    if (command == "validate") return cmd_validate(cfg);
    if (command == "convergence") return cmd_convergence(cfg);
    throw ConfigError("unknown command '" + std::string(command) + "'");
}

void write_bundle(const Bundle& bundle, std::string_view command, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    auto put = [&](const std::string& name, const std::string& content) {
        std::ofstream out(out_dir / name, std::ios::binary);
        if (!out) throw Error("cannot write " + (out_dir / name).string());
        out << content;
    };
    put(std::string(command) + ".json", dump_json(bundle.doc));
    for (const auto& [name, content] : bundle.files) put(name, content);
}

}  // namespace bddyn
