#pragma once

#include <numbers>
#include <string>
#include <string_view>

/// Physical constants and unit handling.
///
/// Internal units: energy GHz (h = 1), capacitance fF, inductance pH,
/// flux Phi0, charge 2e, current nA, voltage V.
namespace scred::units {

inline constexpr double planck = 6.62607015e-34;
inline constexpr double elementary_charge = 1.602176634e-19;
inline constexpr double flux_quantum = planck / (2.0 * elementary_charge);  // Wb
inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// E_C such that (2e)^2 / (2C) = 0.5 * charging_energy / C[fF] in GHz.
inline constexpr double charging_energy = (2.0 * elementary_charge) * (2.0 * elementary_charge) / 1e-15 / planck / 1e9;

/// E_L such that (Phi0/2pi)^2 / (2L) = 0.5 * inductive_energy / L[pH] in GHz.
inline constexpr double inductive_energy =
    (flux_quantum / two_pi) * (flux_quantum / two_pi) / 1e-12 / planck / 1e9;

/// Phi0 * 1 nA expressed in GHz.
inline constexpr double flux_current_energy = flux_quantum * 1e-9 / planck / 1e9;

/// 2e * 1 V expressed in GHz.
inline constexpr double charge_voltage_energy = 2.0 * elementary_charge / planck / 1e9;

enum class Dimension { dimensionless, capacitance, inductance, energy, flux, current, voltage, charge };

std::string_view dimension_name(Dimension d);

struct Quantity {
    double value = 0.0;  // in internal units
    Dimension dimension = Dimension::dimensionless;
};

/// Parses "5 fF", "2.5nH", "0.5 Phi0", "-3 nA", "12". Throws std::invalid_argument.
Quantity parse_quantity(std::string_view text);

/// Parses and checks the dimension; a bare number is accepted as already in internal units.
double parse_as(std::string_view text, Dimension expected);

}  // namespace scred::units
