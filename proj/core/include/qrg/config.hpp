#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qrg/sweeps.hpp"

namespace qrg {

// Fully resolved run description.  Parsing starts from the named species
// preset (which reproduces the published parameter tables exactly) and
// applies any overrides; every physical quantity in the file must carry an
// explicit unit ("0.5 1/A", "20 um", "7e-4 Ha", ...).
struct RunConfig {
    Species species;
    GratingSpec grating;
    SolverSettings solver;
    double max_condition = 1e12;

    // One-shot solve conditions.
    std::optional<double> beam_t0;          // K
    std::optional<double> beam_wavelength;  // A
    std::optional<double> beam_angle;       // rad

    // Sweep conditions.
    std::vector<double> sweep_angles;        // rad
    std::optional<double> sweep_t0;          // K
    std::optional<double> sweep_wavelength;  // A

    std::vector<int> efficiency_orders = {0, -1, -2, -3};  // published labels
    std::vector<std::string> warnings;
};

// Throws ParseError (with line/column) for malformed JSON, ValidationError
// for unknown/inconsistent keys, UnitError for quantity strings.
RunConfig parse_config_text(const std::string& text, const std::string& origin = "<config>");
RunConfig parse_config(const std::string& path);

// Preset-only config, no file involved.
RunConfig config_for_species(std::string_view name);

// The fully-resolved config as a config-file-shaped document; parsing it
// back reproduces the same RunConfig (written next to outputs for
// provenance).
std::string resolved_config_json(const RunConfig& cfg);

} // namespace qrg
