#include "bddyn/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace bddyn {

std::string fmt17(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::string fmt18(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.18g", v);
    return buf;
}

void write(const Json& j, std::string& out, int depth) {
    const std::string pad(2 * (depth + 1), ' ');
    const std::string close_pad(2 * depth, ' ');
    switch (j.type()) {
        case Json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out += ",\n";
                first = false;
                out += pad + Json(it.key()).dump() + ": ";
                write(it.value(), out, depth + 1);
            }
            out += "\n" + close_pad + "}";
            return;
        }
        case Json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            out += "[\n";
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i) out += ",\n";
                out += pad;
                write(j[i], out, depth + 1);
            }
            out += "\n" + close_pad + "]";
            return;
        }
        case Json::value_t::number_float: {
            const double v = j.get<double>();
            out += std::isfinite(v) ? fmt17(v) : "\"" + fmt17(v) + "\"";
            return;
        }
        default:
            out += j.dump();
    }
}

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

}  // namespace

std::string dump_json(const Json& doc) {
    std::string out;
    write(doc, out, 0);
    out += "\n";
    return out;
}

Json to_json(const State& s) { return Json::array({s.x1, s.x2, s.x3}); }
Json to_json(const Vec3& v) { return Json::array({v[0], v[1], v[2]}); }
Json to_json(const Mat3& m) { return Json::array({to_json(m[0]), to_json(m[1]), to_json(m[2])}); }

Json to_json(const ConditionReport& c) {
    Json j;
    j["name"] = c.name;
    j["label"] = c.label;
    j["relation"] = c.relation;
    j["evaluable"] = c.evaluable;
    j["lhs"] = c.evaluable ? Json(c.lhs) : Json(nullptr);
    j["rhs"] = c.rhs;
    j["satisfied"] = c.evaluable ? Json(c.satisfied) : Json(nullptr);
    j["on_boundary"] = c.on_boundary;
    if (!c.note.empty()) j["note"] = c.note;
    if (!c.auxiliary.empty()) {
        Json aux = Json::object();
        for (const auto& [k, v] : c.auxiliary) aux[k] = v;
        j["auxiliary"] = aux;
    }
    return j;
}

Json to_json(const Equilibrium& e) {
    Json j;
    j["kind"] = std::string(to_string(e.kind));
    j["coords"] = to_json(e.coords);
    j["feasible"] = e.feasible;
    Json diag = Json::array();
    for (const auto& c : e.diagnostics) diag.push_back(to_json(c));
    j["diagnostics"] = diag;
    return j;
}

Json to_json(const CharPoly& cp) { return Json{{"k1", cp.k1}, {"k2", cp.k2}, {"k3", cp.k3}, {"C2", cp.c2}}; }

Json to_json(const Spectrum& s) {
    Json a = Json::array();
    for (const auto& z : s) a.push_back(Json::array({z.real(), z.imag()}));
    return a;
}

Json to_json(const StabilityReport& s) {
    Json j;
    j["equilibrium"] = std::string(to_string(s.equilibrium.kind));
    j["coords"] = to_json(s.equilibrium.coords);
    j["jacobian"] = to_json(s.jacobian.m);
    j["charpoly"] = to_json(s.charpoly);
    j["eigenvalues"] = to_json(s.eigenvalues);
    j["routh_hurwitz_stable"] = s.routh_hurwitz_stable;
    j["classification"] = std::string(to_string(s.classification));
    return j;
}

Json to_json(const BoundednessReport& b) {
    Json j;
    j["rho"] = b.rho;
    j["m"] = b.m;
    j["sigma"] = b.sigma;
    j["sigma_interval"] = Json::array({b.sigma_lo, b.sigma_hi});
    j["w"] = b.w;
    j["M"] = b.M;
    Json c = Json::array();
    for (const auto& x : b.conditions) c.push_back(to_json(x));
    j["conditions"] = c;
    return j;
}

Json to_json(const HopfSearchResult& h) {
    Json j;
    j["r_c"] = h.r_c;
    j["bracket"] = Json::array({h.bracket.first, h.bracket.second});
    j["x_star"] = to_json(h.x_star);
    j["charpoly"] = to_json(h.charpoly);
    j["c2_residual"] = h.c2_residual;
    j["k2_at_rc"] = h.k2_at_rc;
    j["transversality"] = h.transversality;
    j["eigen_crosscheck"] = h.eigen_crosscheck;
    j["pair_imag"] = h.pair_imag;
    j["imag_rel_error"] = h.imag_rel_error;
    j["spectral_scale"] = h.spectral_scale;
    j["real_part_slope_observed"] = h.slope_observed;
    j["real_part_slope_predicted"] = h.slope_predicted;
    j["iterations"] = h.iterations;
    return j;
}

Json to_json(const ClosedFormRc& c) {
    Json j;
    j["j11"] = c.j11;
    j["h"] = Json::array({c.h1, c.h2, c.h3});
    j["h2_printed"] = c.h2_printed;
    j["residual"] = c.residual;
    j["residual_printed_h2"] = c.residual_printed;
    j["discriminant"] = c.discriminant;
    j["real_roots"] = c.real_roots;
    Json roots = Json::array(), rr = Json::array(), rp = Json::array();
    for (double v : c.j11_roots) roots.push_back(v);
    for (double v : c.r_roots) rr.push_back(v);
    for (double v : c.r_roots_printed) rp.push_back(v);
    j["j11_roots"] = roots;
    j["r_roots"] = rr;
    j["r_roots_printed_sign"] = rp;
    j["r_closed_form"] = optional_number(c.r_closed_form);
    if (!c.note.empty()) j["note"] = c.note;
    return j;
}

Json to_json(const FDerivatives& f) {
    Json j = Json::object();
    for (const auto& [k, v] : entries(f)) j[k] = v;
    return j;
}

Json to_json(const CenterManifoldReport& c) {
    Json j;
    j["r_c"] = c.r_c;
    j["x_star"] = to_json(c.x_star);
    j["charpoly"] = to_json(c.charpoly);
    j["P"] = to_json(c.basis.P);
    j["Q"] = to_json(c.basis.Q);
    j["det_P"] = c.basis.det;
    j["block_residual"] = c.block_residual;
    j["block_scale"] = c.block_scale;
    j["omega"] = to_json(c.omega);
    j["b"] = to_json(c.b);
    j["b_direct"] = to_json(c.b_direct);
    j["b_residual"] = c.b_residual;
    j["b_closed_vs_direct"] = c.b_closed_vs_direct;
    j["F"] = to_json(c.F);
    j["Pi"] = c.Pi;
    j["direction"] = std::string(to_string(c.direction));
    Json cons;
    cons["omega"] = to_json(c.omega_consistent);
    cons["b"] = to_json(c.b_consistent);
    cons["F_entrywise"] = to_json(c.F_printed_consistent_b);
    cons["F_composed"] = to_json(c.F_composed);
    cons["Pi"] = c.Pi_composed;
    cons["direction"] = std::string(to_string(direction_of(c.Pi_composed)));
    j["slip_corrected"] = cons;
    Json taylor;
    taylor["b"] = to_json(c.b_taylor);
    taylor["F"] = to_json(c.F_taylor);
    taylor["Pi"] = c.Pi_taylor;
    taylor["direction"] = std::string(to_string(c.direction_taylor));
    j["full_taylor"] = taylor;
    Json errata = Json::array();
    for (const auto& e : c.errata)
        errata.push_back(Json{{"quantity", e.quantity},
                              {"printed", e.printed},
                              {"consistent", e.consistent},
                              {"relative_difference", e.relative_difference}});
    j["errata"] = errata;
    return j;
}

Json to_json(const DirectionReport& d) {
    Json j;
    j["r_c"] = d.r_c;
    j["delta_r"] = d.delta_r;
    j["claimed"] = std::string(to_string(d.claimed));
    Json runs = Json::array();
    for (const auto& r : d.runs) {
        Json x;
        x["r"] = r.r;
        x["radius"] = r.radius;
        x["stable_side"] = r.stable_side;
        x["behaviour"] = std::string(to_string(r.behaviour));
        x["attractor"] = std::string(to_string(r.attractor));
        x["initial_distance"] = r.initial_distance;
        x["late_distance"] = r.late_distance;
        if (!r.error.empty()) x["error"] = r.error;
        runs.push_back(x);
    }
    j["runs"] = runs;
    j["core_pattern_ok"] = d.core_pattern_ok;
    j["consistent_with_direction"] = d.consistent_with_direction;
    j["summary"] = d.summary;
    return j;
}

Json to_json(const CycleEstimate& c) {
    Json j;
    j["class"] = std::string(to_string(c.classification));
    if (!c.extinct.empty()) j["extinct"] = c.extinct;
    j["min"] = to_json(c.min);
    j["max"] = to_json(c.max);
    j["amplitude"] = to_json(c.amplitude);
    j["period"] = optional_number(c.period);
    j["maxima"] = c.maxima;
    j["interval_spread"] = c.interval_spread;
    j["envelope_ratio"] = c.envelope_ratio;
    return j;
}

Json to_json(const ConvergenceReport& c) {
    Json j;
    j["init"] = to_json(c.init);
    j["converged"] = c.converged;
    j["entry_time"] = optional_number(c.entry_time);
    j["final_state"] = to_json(c.final_state);
    j["final_distance"] = c.final_distance;
    if (!c.error.empty()) j["error"] = c.error;
    return j;
}

std::string trajectory_csv(const Trajectory& traj) {
    std::string out = "t,x1,x2,x3\n";
    out.reserve(out.size() + traj.t.size() * 96);
    for (std::size_t i = 0; i < traj.t.size(); ++i) {
        const State& s = traj.states[i];
        out += fmt18(traj.t[i]) + ',' + fmt18(s.x1) + ',' + fmt18(s.x2) + ',' + fmt18(s.x3) + '\n';
    }
    return out;
}

Trajectory parse_trajectory_csv(const std::string& text) {
    Trajectory traj;
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "t,x1,x2,x3") throw DomainError("trajectory csv: bad header");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        double v[4];
        std::size_t pos = 0;
        for (int i = 0; i < 4; ++i) {
            const std::size_t end = line.find(',', pos);
            v[i] = std::strtod(line.substr(pos, end - pos).c_str(), nullptr);
            pos = end == std::string::npos ? end : end + 1;
        }
        traj.t.push_back(v[0]);
        traj.states.push_back({v[1], v[2], v[3]});
    }
    return traj;
}

std::string sweep_csv(const SweepResult& sweep) {
    std::string out = "r,x1_star,x2_star,x3_star,c2_sign,class,x1_min,x1_max,x2_min,x2_max,x3_min,x3_max,period\n";
    for (const auto& pt : sweep.points) {
        out += fmt17(pt.r);
        if (pt.estar)
            out += ',' + fmt17(pt.estar->x1) + ',' + fmt17(pt.estar->x2) + ',' + fmt17(pt.estar->x3);
        else
            out += ",,,";
        out += ',' + (pt.estar ? std::to_string(pt.c2_sign) : std::string());
        if (!pt.ok) {
            out += ",error,,,,,,,\n";
            continue;
        }
        out += ',' + std::string(to_string(pt.estimate.classification));
        for (int i = 0; i < 3; ++i) out += ',' + fmt17(pt.estimate.min[i]) + ',' + fmt17(pt.estimate.max[i]);
        out += ',' + (pt.estimate.period ? fmt17(*pt.estimate.period) : std::string());
        out += '\n';
    }
    return out;
}

}  // namespace bddyn
