#pragma once

#include "scred/circuit.hpp"
#include "scred/operators.hpp"
#include "scred/units.hpp"

#include <json.hpp>

#include <map>
#include <string>
#include <vector>

namespace scred {

/// Per-circuit numerical setup carried by the netlist.
struct CircuitSetup {
    std::vector<ModeBasis> bases;        // mode order
    std::vector<bool> explicit_oscillator;  // frequency/impedance given
    int keep = 0;                        // projected states (coupled systems)
};

struct Netlist {
    std::string name;
    std::map<std::string, units::Quantity> parameters;  // resolved values
    CoupledSystemSpec system;
    std::vector<CircuitSetup> setups;
    std::vector<std::string> warnings;  // advisory basis heuristics

    bool single_circuit() const { return system.circuits.size() == 1; }
};

/// Raw netlist document. Parameters are substituted on instantiate().
class NetlistSource {
public:
    static NetlistSource from_file(const std::string& path);
    static NetlistSource from_text(std::string text);

    /// overrides: parameter name -> value in internal units of that parameter.
    Netlist instantiate(const std::map<std::string, double>& overrides = {}) const;

    const std::string& text() const { return text_; }
    /// FNV-1a of the document text, hex.
    std::string hash() const;
    bool has_parameter(const std::string& name) const;
    units::Dimension parameter_dimension(const std::string& name) const;

private:
    std::string text_;
    nlohmann::ordered_json doc_;
};

/// Evaluates "$fz + 0.5*$fx", "-$M", "5 fF", "2*(1 nH)" against parameters.
units::Quantity evaluate_expression(const std::string& text, const std::map<std::string, units::Quantity>& params);

}  // namespace scred
