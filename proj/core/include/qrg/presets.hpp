#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "qrg/kinematics.hpp"
#include "qrg/potential.hpp"
#include "qrg/propagator.hpp"

namespace qrg {

// One incident-particle system with its published interaction parameters,
// absorber settings, default integration grid, and the incidence conditions
// of the reference quantum-reflection scan.
struct Species {
    std::string name;
    double atom_mass;    // amu
    int cluster_count;   // N
    double chi;          // Morse stiffness, 1/A
    double c3;           // vdW coefficient, meV*A^3
    double l;            // crossover length, A
    WoodsSaxonAbsorber absorber;
    RadialGrid grid;
    double scan_t0;                  // source temperature of the k_perp scan, K
    std::vector<double> scan_angles; // grazing angles of that scan, rad

    BeamSpec beam_at_t0(double t0, double grazing_angle) const;
    BeamSpec beam_at_wavelength(double wavelength, double grazing_angle) const;
};

// He, He2, He3, Ne.
const std::vector<Species>& all_species();

// Throws ValidationError for an unknown name.
const Species& species_preset(std::string_view name);

MorseCasimirPotential make_potential(const Species& sp);

// The 20 um / 10 um strip grating all published results use.
GratingSpec default_grating();

} // namespace qrg
