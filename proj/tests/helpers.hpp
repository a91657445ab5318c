#pragma once

#include "scred/model.hpp"

#include <string>

namespace testing {

inline scred::Netlist parse(const std::string& text, const std::map<std::string, double>& overrides = {}) {
    return scred::NetlistSource::from_text(text).instantiate(overrides);
}

/// Parallel LC circuit with an oscillator basis of `cutoff` + 1 states.
inline std::string lc_netlist(double l_pH, double c_fF, int cutoff = 30) {
    return R"({"circuits": [{"name": "lc", "nodes": [1], "branches": [
        {"name": "L", "nodes": [1, 0], "type": "L", "value": ")" + std::to_string(l_pH) + R"( pH"},
        {"name": "C", "nodes": [1, 0], "type": "C", "value": ")" + std::to_string(c_fF) + R"( fF"}],
        "basis": [{"node": 1, "kind": "ho", "cutoff": )" + std::to_string(cutoff) + "}]}]}";
}

}  // namespace testing
