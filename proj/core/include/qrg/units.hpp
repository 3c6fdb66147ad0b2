#pragma once

// Internal unit system: angstrom (length), meV (energy), amu (mass),
// radian (angle), kelvin (temperature).  Everything inside the library is
// expressed in these units; conversions happen only at the boundaries
// (config parsing, CSV output labels).

#include <charconv>
#include <string>
#include <string_view>

#include "qrg/errors.hpp"

namespace qrg::units {

// hbar^2 in meV * amu * A^2, so that k^2 = 2*M*E/hbar_sq is in 1/A^2
// when M is in amu and E in meV.  CODATA 2018.
inline constexpr double hbar_sq = 4.18015928049672;

// Boltzmann constant, meV/K (exact in SI since the 2019 redefinition).
inline constexpr double k_boltzmann = 0.0861733326214518;

// 1 hartree in meV.
inline constexpr double hartree_meV = 27211.3862459880;

// 1 joule in meV (exact: 1 eV = 1.602176634e-19 J).
inline constexpr double joule_meV = 6.241509074460763e+21;

// 1 J*m^3 in meV*A^3 (m^3 = 1e30 A^3).
inline constexpr double joule_m3_meV_A3 = 6.241509074460763e+51;

inline constexpr double pi = 3.14159265358979323846;

inline constexpr double nm_A = 10.0;     // 1 nm in A
inline constexpr double um_A = 1.0e4;    // 1 um in A

// Atomic masses, amu.
inline constexpr double mass_He = 4.002602;
inline constexpr double mass_Ne = 20.1797;

// Dimensions a config quantity can carry.
enum class Dim {
    length,
    inverse_length,
    energy,
    temperature,
    angle,
    mass,
    c3,           // energy * volume (Casimir coefficient)
    dimensionless,
};

namespace detail {

struct UnitEntry {
    std::string_view name;
    double factor;  // multiply parsed value by this to land in internal units
};

inline constexpr UnitEntry length_units[] = {
    {"A", 1.0}, {"angstrom", 1.0}, {"nm", nm_A}, {"um", um_A},
    {"micron", um_A}, {"mm", 1.0e7}, {"m", 1.0e10},
};
inline constexpr UnitEntry inverse_length_units[] = {
    {"1/A", 1.0}, {"A^-1", 1.0}, {"1/nm", 1.0 / nm_A}, {"nm^-1", 1.0 / nm_A},
};
inline constexpr UnitEntry energy_units[] = {
    {"meV", 1.0}, {"eV", 1.0e3}, {"Ha", hartree_meV},
    {"hartree", hartree_meV}, {"J", joule_meV},
};
inline constexpr UnitEntry temperature_units[] = {
    {"K", 1.0}, {"mK", 1.0e-3},
};
inline constexpr UnitEntry angle_units[] = {
    {"rad", 1.0}, {"mrad", 1.0e-3}, {"deg", pi / 180.0},
};
inline constexpr UnitEntry mass_units[] = {
    {"amu", 1.0}, {"u", 1.0},
};
inline constexpr UnitEntry c3_units[] = {
    {"J*m^3", joule_m3_meV_A3}, {"meV*A^3", 1.0},
};

inline std::pair<const UnitEntry*, const UnitEntry*> table(Dim dim) {
    switch (dim) {
        case Dim::length:         return {std::begin(length_units), std::end(length_units)};
        case Dim::inverse_length: return {std::begin(inverse_length_units), std::end(inverse_length_units)};
        case Dim::energy:         return {std::begin(energy_units), std::end(energy_units)};
        case Dim::temperature:    return {std::begin(temperature_units), std::end(temperature_units)};
        case Dim::angle:          return {std::begin(angle_units), std::end(angle_units)};
        case Dim::mass:           return {std::begin(mass_units), std::end(mass_units)};
        case Dim::c3:             return {std::begin(c3_units), std::end(c3_units)};
        case Dim::dimensionless:  return {nullptr, nullptr};
    }
    return {nullptr, nullptr};
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

} // namespace detail

// Parse "3.5e-50 J*m^3" style strings.  The number and the unit are separated
// by whitespace; the unit must belong to the dimension's table.  Plain numbers
// are accepted only for Dim::dimensionless.
inline double parse_quantity(std::string_view text, Dim dim) {
    std::string_view s = detail::trim(text);
    if (s.empty()) throw UnitError("empty quantity string");

    double value = 0.0;
    auto [num_end, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || num_end == s.data())
        throw UnitError("bad number in quantity '" + std::string(text) + "'");

    std::string_view unit = detail::trim(s.substr(static_cast<size_t>(num_end - s.data())));

    if (dim == Dim::dimensionless) {
        if (!unit.empty())
            throw UnitError("unexpected unit '" + std::string(unit) + "' on dimensionless quantity");
        return value;
    }
    if (unit.empty())
        throw UnitError("missing unit in quantity '" + std::string(text) + "'");

    auto [first, last] = detail::table(dim);
    for (auto* e = first; e != last; ++e)
        if (e->name == unit) return value * e->factor;

    std::string accepted;
    for (auto* e = first; e != last; ++e) {
        if (!accepted.empty()) accepted += ", ";
        accepted += e->name;
    }
    throw UnitError("unknown unit '" + std::string(unit) + "' in quantity '" +
                    std::string(text) + "' (accepted: " + accepted + ")");
}

} // namespace qrg::units
