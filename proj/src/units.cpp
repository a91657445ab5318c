#include "scred/units.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <stdexcept>

namespace scred::units {

namespace {

struct Suffix {
    std::string_view name;
    Dimension dimension;
    double scale;
};

constexpr std::array<Suffix, 22> suffixes{{
    {"aF", Dimension::capacitance, 1e-3},
    {"fF", Dimension::capacitance, 1.0},
    {"pF", Dimension::capacitance, 1e3},
    {"nF", Dimension::capacitance, 1e6},
    {"fH", Dimension::inductance, 1e-3},
    {"pH", Dimension::inductance, 1.0},
    {"nH", Dimension::inductance, 1e3},
    {"uH", Dimension::inductance, 1e6},
    {"Hz", Dimension::energy, 1e-9},
    {"kHz", Dimension::energy, 1e-6},
    {"MHz", Dimension::energy, 1e-3},
    {"GHz", Dimension::energy, 1.0},
    {"THz", Dimension::energy, 1e3},
    {"Phi0", Dimension::flux, 1.0},
    {"mPhi0", Dimension::flux, 1e-3},
    {"pA", Dimension::current, 1e-3},
    {"nA", Dimension::current, 1.0},
    {"uA", Dimension::current, 1e3},
    {"uV", Dimension::voltage, 1e-6},
    {"mV", Dimension::voltage, 1e-3},
    {"V", Dimension::voltage, 1.0},
    {"2e", Dimension::charge, 1.0},
}};

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

}  // namespace

std::string_view dimension_name(Dimension d) {
    switch (d) {
        case Dimension::dimensionless: return "dimensionless";
        case Dimension::capacitance: return "capacitance";
        case Dimension::inductance: return "inductance";
        case Dimension::energy: return "energy";
        case Dimension::flux: return "flux";
        case Dimension::current: return "current";
        case Dimension::voltage: return "voltage";
        case Dimension::charge: return "charge";
    }
    return "?";
}

Quantity parse_quantity(std::string_view text) {
    auto s = trim(text);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{}) throw std::invalid_argument("not a number: '" + std::string(text) + "'");
    auto unit = trim(std::string_view(ptr, static_cast<std::size_t>(s.data() + s.size() - ptr)));
    if (unit.empty()) return {value, Dimension::dimensionless};
    for (const auto& suf : suffixes)
        if (suf.name == unit) return {value * suf.scale, suf.dimension};
    throw std::invalid_argument("unknown unit '" + std::string(unit) + "' in '" + std::string(text) + "'");
}

double parse_as(std::string_view text, Dimension expected) {
    auto q = parse_quantity(text);
    if (q.dimension != Dimension::dimensionless && q.dimension != expected)
        throw std::invalid_argument("expected " + std::string(dimension_name(expected)) + ", got '" +
                                    std::string(text) + "'");
    return q.value;
}

}  // namespace scred::units
