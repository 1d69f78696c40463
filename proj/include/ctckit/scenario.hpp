#pragma once

// Scenario files: a gate, an input state for the non-time-traveller and a
// selection rule.
//
//   {
//     "gate": {"dim1": 4, "dim2": 2, "perm": [4, 1, 3, 2, 0, 6, 5, 7]},
//     "rho": [{"diag": [1, 0]}, {"diag": [0.9, 0.1]}],     // or any state encoding
//     "rule": "max-entropy",                               // or {"name": ..., overrides}
//     "fixed_point": {"sv_tol": 1e-9}                      // optional
//   }
//
// A JSON array for "rho" is a list of tensor factors.

#include <fstream>
#include <sstream>
#include <string>

#include "ctckit/json_io.hpp"

namespace ctckit {

struct Scenario {
    UnitaryGate gate;
    DensityOperator rho;
    SelectionRule rule;
    FixedPointOptions fixed_point;
};

namespace io {

inline io::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError("'" + path + "' is not valid JSON: " + e.what());
    }
}

inline DensityOperator scenario_state_from_json(const json& j) {
    if (j.is_array()) return density_from_json(json{{"product", j}});
    return density_from_json(j);
}

inline Scenario scenario_from_json(const json& j) {
    if (!j.is_object()) throw ParseError("scenario must be a JSON object");
    Scenario s{gate_from_json(detail::field(j, "gate")), scenario_state_from_json(detail::field(j, "rho")), {}, {}};
    if (j.contains("rule")) s.rule = selection_rule_from_json(j.at("rule"));
    if (j.contains("fixed_point")) s.fixed_point = fixed_point_options_from_json(j.at("fixed_point"));
    if (s.rho.dim() != s.gate.dim1())
        throw DimensionError("scenario: rho has dimension " + std::to_string(s.rho.dim()) + ", gate expects " +
                             std::to_string(s.gate.dim1()));
    return s;
}

inline json to_json(const Scenario& s) {
    return {{"gate", to_json(s.gate)},
            {"rho", to_json(s.rho)},
            {"rule", to_json(s.rule)},
            {"fixed_point", to_json(s.fixed_point)}};
}

inline Scenario read_scenario(const std::string& path) { return scenario_from_json(read_json_file(path)); }

}  // namespace io
}  // namespace ctckit
