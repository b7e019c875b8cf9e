#pragma once

#include "bddyn/dynamics.hpp"
#include "bddyn/equilibria.hpp"
#include "bddyn/hopf.hpp"
#include "bddyn/stability.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace bddyn {

using Json = nlohmann::ordered_json;

/// Deterministic JSON text: floats at 17 significant digits, non-finite values as strings, two-space indent.
std::string dump_json(const Json& doc);

/// %.17g; non-finite values print as inf, -inf, nan.
std::string fmt17(double v);

Json to_json(const State& s);
Json to_json(const Vec3& v);
Json to_json(const Mat3& m);
Json to_json(const ConditionReport& c);
Json to_json(const Equilibrium& e);
Json to_json(const CharPoly& cp);
Json to_json(const Spectrum& s);
Json to_json(const StabilityReport& s);
Json to_json(const BoundednessReport& b);
Json to_json(const HopfSearchResult& h);
Json to_json(const ClosedFormRc& c);
Json to_json(const FDerivatives& f);
Json to_json(const CenterManifoldReport& c);
Json to_json(const DirectionReport& d);
Json to_json(const CycleEstimate& c);
Json to_json(const ConvergenceReport& c);

/// Header t,x1,x2,x3; 18 significant digits; LF line endings.
std::string trajectory_csv(const Trajectory& traj);
Trajectory parse_trajectory_csv(const std::string& text);

/// Header r,x1_star,x2_star,x3_star,c2_sign,class,x1_min,x1_max,x2_min,x2_max,x3_min,x3_max,period.
/// Failed points carry class=error and empty numeric fields.
std::string sweep_csv(const SweepResult& sweep);

}  // namespace bddyn
