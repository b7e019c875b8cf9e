#include "bddyn/config.hpp"

#include "bddyn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

namespace bddyn {

namespace {

void reject_unknown(const Json& obj, const std::string& where, std::initializer_list<std::string_view> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
            throw ConfigError("unknown key '" + where + it.key() + "'");
    }
}

const Json& object_at(const Json& doc, const std::string& key) {
    const Json& v = doc.at(key);
    if (!v.is_object()) throw ConfigError("key '" + key + "' must be an object");
    return v;
}

double number(const Json& v, const std::string& key) {
    if (!v.is_number()) throw ConfigError("key '" + key + "' must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError("key '" + key + "' must be finite");
    return x;
}

double positive(const Json& v, const std::string& key) {
    const double x = number(v, key);
    if (!(x > 0.0)) throw ConfigError("key '" + key + "' must be positive");
    return x;
}

std::size_t count(const Json& v, const std::string& key) {
    if (!v.is_number_integer() || v.get<long long>() < 0) throw ConfigError("key '" + key + "' must be a non-negative integer");
    return v.get<std::size_t>();
}

State state(const Json& v, const std::string& key) {
    if (!v.is_array() || v.size() != 3) throw ConfigError("key '" + key + "' must be an array of three numbers");
    return {number(v[0], key), number(v[1], key), number(v[2], key)};
}

}  // namespace

RunConfig parse_config(const Json& doc, const std::optional<std::string>& preset_cli, const std::optional<double>& r_cli) {
    if (!doc.is_object()) throw ConfigError("configuration must be a JSON object");
    {
        std::vector<std::string_view> allowed(kParamNames.begin(), kParamNames.end());
        for (std::string_view s : {"preset", "integrator", "boundedness", "hopf", "simulate", "sweep", "convergence", "validate"})
            allowed.push_back(s);
        for (auto it = doc.begin(); it != doc.end(); ++it)
            if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
                throw ConfigError("unknown key '" + it.key() + "'");
    }

    RunConfig cfg;
    std::optional<std::string> preset = preset_cli;
    if (!preset && doc.contains("preset")) {
        if (!doc["preset"].is_string()) throw ConfigError("key 'preset' must be a string");
        preset = doc["preset"].get<std::string>();
    }
    std::set<std::string_view> have;
    if (preset) {
        if (*preset != kPresetTable2) throw ConfigError("key 'preset': unknown preset '" + *preset + "'");
        cfg.params = Params::table2(0.0);
        for (auto name : kParamNames)
            if (name != "r") have.insert(name);
    }
    for (auto name : kParamNames) {
        const std::string key(name);
        if (doc.contains(key)) {
            param_ref(cfg.params, name) = number(doc[key], key);
            have.insert(name);
        }
    }
    if (r_cli) {
        cfg.params.r = *r_cli;
        have.insert("r");
    }
    for (auto name : kParamNames)
        if (!have.count(name)) throw ConfigError("missing parameter '" + std::string(name) + "'");
    try {
        cfg.params.validate();
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }

    if (doc.contains("integrator")) {
        const Json& s = object_at(doc, "integrator");
        reject_unknown(s, "integrator.", {"rel_tol", "abs_tol", "t_end", "max_step", "transient_fraction",
                                          "extinction_threshold", "sample_interval", "min_samples", "max_steps"});
        auto& c = cfg.integrator;
        if (s.contains("rel_tol")) c.rel_tol = number(s["rel_tol"], "integrator.rel_tol");
        if (s.contains("abs_tol")) c.abs_tol = number(s["abs_tol"], "integrator.abs_tol");
        if (s.contains("t_end")) c.t_end = number(s["t_end"], "integrator.t_end");
        if (s.contains("max_step")) c.max_step = number(s["max_step"], "integrator.max_step");
        if (s.contains("transient_fraction"))
            c.transient_fraction = number(s["transient_fraction"], "integrator.transient_fraction");
        if (s.contains("extinction_threshold"))
            c.extinction_threshold = number(s["extinction_threshold"], "integrator.extinction_threshold");
        if (s.contains("sample_interval")) c.sample_interval = number(s["sample_interval"], "integrator.sample_interval");
        if (s.contains("min_samples")) c.min_samples = count(s["min_samples"], "integrator.min_samples");
        if (s.contains("max_steps")) c.max_steps = count(s["max_steps"], "integrator.max_steps");
    }
    try {
        cfg.integrator.validate();
    } catch (const UsageError& e) {
        throw ConfigError(e.what());
    }

    if (doc.contains("boundedness")) {
        const Json& s = object_at(doc, "boundedness");
        reject_unknown(s, "boundedness.", {"sigma", "m"});
        if (s.contains("sigma")) cfg.boundedness.sigma = number(s["sigma"], "boundedness.sigma");
        if (s.contains("m")) cfg.boundedness.m = number(s["m"], "boundedness.m");
    }

    if (doc.contains("hopf")) {
        const Json& s = object_at(doc, "hopf");
        reject_unknown(s, "hopf.", {"bracket", "delta_r"});
        if (s.contains("bracket")) {
            const Json& b = s["bracket"];
            if (!b.is_array() || b.size() != 2) throw ConfigError("key 'hopf.bracket' must be [r_lo, r_hi]");
            cfg.hopf.bracket = {positive(b[0], "hopf.bracket"), positive(b[1], "hopf.bracket")};
            if (!(cfg.hopf.bracket.first < cfg.hopf.bracket.second))
                throw ConfigError("key 'hopf.bracket' must satisfy r_lo < r_hi");
        }
        if (s.contains("delta_r")) {
            cfg.hopf.delta_r = number(s["delta_r"], "hopf.delta_r");
            if (cfg.hopf.delta_r < 0.0) throw ConfigError("key 'hopf.delta_r' must be non-negative");
        }
    }

    if (doc.contains("simulate")) {
        const Json& s = object_at(doc, "simulate");
        reject_unknown(s, "simulate.", {"init"});
        if (s.contains("init")) {
            const State x = state(s["init"], "simulate.init");
            if (x.x1 < 0 || x.x2 < 0 || x.x3 < 0) throw ConfigError("key 'simulate.init' must be non-negative");
            cfg.simulate.init = x;
        }
    }

    if (doc.contains("sweep")) {
        const Json& s = object_at(doc, "sweep");
        reject_unknown(s, "sweep.", {"r_lo", "r_hi", "n_points", "t_end"});
        if (s.contains("r_lo")) cfg.sweep.r_lo = positive(s["r_lo"], "sweep.r_lo");
        if (s.contains("r_hi")) cfg.sweep.r_hi = positive(s["r_hi"], "sweep.r_hi");
        if (s.contains("n_points")) cfg.sweep.n_points = count(s["n_points"], "sweep.n_points");
        if (s.contains("t_end")) cfg.sweep.t_end = positive(s["t_end"], "sweep.t_end");
    }
    if (!(cfg.sweep.r_lo < cfg.sweep.r_hi)) throw ConfigError("key 'sweep.r_lo' must be less than 'sweep.r_hi'");
    if (cfg.sweep.n_points < 2) throw ConfigError("key 'sweep.n_points' must be at least 2");

    if (doc.contains("convergence")) {
        const Json& s = object_at(doc, "convergence");
        reject_unknown(s, "convergence.", {"inits", "target", "tol"});
        if (s.contains("inits")) {
            if (!s["inits"].is_array()) throw ConfigError("key 'convergence.inits' must be an array of states");
            cfg.convergence.inits.clear();
            for (const auto& v : s["inits"]) {
                const State x = state(v, "convergence.inits");
                if (x.x1 < 0 || x.x2 < 0 || x.x3 < 0)
                    throw ConfigError("key 'convergence.inits' entries must be non-negative");
                cfg.convergence.inits.push_back(x);
            }
        }
        if (s.contains("target")) cfg.convergence.target = state(s["target"], "convergence.target");
        if (s.contains("tol")) cfg.convergence.tol = positive(s["tol"], "convergence.tol");
    }

    if (doc.contains("validate")) {
        const Json& s = object_at(doc, "validate");
        reject_unknown(s, "validate.", {"seed", "test_hooks"});
        if (s.contains("seed")) cfg.validate.seed = count(s["seed"], "validate.seed");
        if (s.contains("test_hooks")) {
            const Json& h = s["test_hooks"];
            if (!h.is_object()) throw ConfigError("key 'validate.test_hooks' must be an object");
            reject_unknown(h, "validate.test_hooks.", {"corrupt_jacobian"});
            if (h.contains("corrupt_jacobian")) {
                if (!h["corrupt_jacobian"].is_boolean())
                    throw ConfigError("key 'validate.test_hooks.corrupt_jacobian' must be a boolean");
                cfg.validate.corrupt_jacobian = h["corrupt_jacobian"].get<bool>();
            }
        }
    }
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path, const std::optional<std::string>& preset,
                      const std::optional<double>& r) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    Json doc;
    try {
        doc = Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config file '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return parse_config(doc, preset, r);
}

Json config_json(const RunConfig& cfg) {
    Json j;
    Json params;
    for (auto name : kParamNames) params[std::string(name)] = param_value(cfg.params, name);
    j["params"] = params;
    const auto& c = cfg.integrator;
    j["integrator"] = Json{{"rel_tol", c.rel_tol},
                           {"abs_tol", c.abs_tol},
                           {"t_end", c.t_end},
                           {"max_step", c.max_step},
                           {"transient_fraction", c.transient_fraction},
                           {"extinction_threshold", c.extinction_threshold},
                           {"sample_interval", c.sample_interval},
                           {"min_samples", c.min_samples},
                           {"max_steps", c.max_steps}};
    return j;
}

}  // namespace bddyn
