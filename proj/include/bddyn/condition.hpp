#pragma once

#include <map>
#include <string>

namespace bddyn {

/// One evaluated inequality `lhs relation rhs`.
struct ConditionReport {
    std::string name;
    std::string relation = ">";
    double lhs = 0;
    double rhs = 0;
    bool satisfied = false;
    bool evaluable = true;
    bool on_boundary = false;
    std::string label;  // which published claim the inequality comes from
    std::string note;
    std::map<std::string, double> auxiliary;
};

inline ConditionReport make_condition(std::string name, double lhs, std::string relation, double rhs,
                                      std::string label = {}) {
    ConditionReport c;
    c.name = std::move(name);
    c.lhs = lhs;
    c.rhs = rhs;
    c.relation = std::move(relation);
    c.label = std::move(label);
    if (c.relation == ">")
        c.satisfied = lhs > rhs;
    else if (c.relation == "<")
        c.satisfied = lhs < rhs;
    else if (c.relation == ">=")
        c.satisfied = lhs >= rhs;
    else
        c.satisfied = lhs <= rhs;
    return c;
}

}  // namespace bddyn
