#include "qrg/presets.hpp"

#include "qrg/units.hpp"

namespace qrg {

namespace {

constexpr double mrad = 1e-3;

// c3 given as multiples of 1e-50 J*m^3, absorber amplitudes in hartree.
Species make(std::string name, double mass, int count, double chi, double c3_e50, double l,
             double a0, double al0, double a1, double al1, double a2, double al2, double z_i,
             RadialGrid grid, double t0, std::vector<double> angles) {
    Species sp;
    sp.name = std::move(name);
    sp.atom_mass = mass;
    sp.cluster_count = count;
    sp.chi = chi;
    sp.c3 = c3_e50 * 1e-50 * units::joule_m3_meV_A3;
    sp.l = l;
    sp.absorber.amplitude[0] = a0 * units::hartree_meV;
    sp.absorber.amplitude[1] = a1 * units::hartree_meV;
    sp.absorber.amplitude[2] = a2 * units::hartree_meV;
    sp.absorber.alpha[0] = al0;
    sp.absorber.alpha[1] = al1;
    sp.absorber.alpha[2] = al2;
    sp.absorber.z_i = z_i;
    sp.absorber.chi = chi;
    sp.grid = grid;
    sp.scan_t0 = t0;
    sp.scan_angles = std::move(angles);
    for (double& a : sp.scan_angles) a *= mrad;
    return sp;
}

} // namespace

const std::vector<Species>& all_species() {
    static const std::vector<Species> table = {
        make("He", units::mass_He, 1, 0.5, 3.5, 93.0,
             7.0e-4, 0.5, 9.0e-5, 0.1, 7.0e-3, 0.3, -10.0,
             {-10.0, 500.0, 10000}, 20.0, {3.4, 5.2, 7.6, 9.1, 12.1, 15.1, 18.9}),
        make("He2", units::mass_He, 2, 0.43, 7.0, 93.0,
             2.0e-6, 0.1, 9.0e-5, 0.1, 4.0e-2, 0.3, -20.0,
             {-20.0, 1000.0, 20000}, 15.0, {3.4, 5.2, 7.6, 9.1, 12.1, 15.1, 18.9}),
        make("He3", units::mass_He, 3, 0.405, 10.5, 93.0,
             2.0e-3, 0.3, 2.0e-1, 0.5, 2.0e-4, 0.1, -21.0,
             {-21.0, 1000.0, 20000}, 8.7, {0.8, 1.1, 1.2, 1.4, 1.6}),
        make("Ne", units::mass_Ne, 1, 0.5, 7.0, 118.4,
             2.0e-2, 0.9, 2.0e-2, 1.5, 2.0e-2, 0.12, -12.0,
             {-12.0, 2000.0, 20000}, 40.0, {0.5, 0.6, 0.7, 0.8, 1.1, 1.3}),
    };
    return table;
}

const Species& species_preset(std::string_view name) {
    for (const Species& sp : all_species())
        if (sp.name == name) return sp;
    throw ValidationError("unknown species '" + std::string(name) +
                          "' (known: He, He2, He3, Ne)");
}

MorseCasimirPotential make_potential(const Species& sp) {
    return match_morse_casimir(sp.chi, sp.c3, sp.l);
}

GratingSpec default_grating() {
    return {20.0 * units::um_A, 10.0 * units::um_A, 30};
}

BeamSpec Species::beam_at_t0(double t0, double grazing_angle) const {
    BeamSpec b;
    b.atom_mass = atom_mass;
    b.cluster_count = cluster_count;
    b.source_temperature = t0;
    b.grazing_angle = grazing_angle;
    return b;
}

BeamSpec Species::beam_at_wavelength(double wavelength, double grazing_angle) const {
    BeamSpec b;
    b.atom_mass = atom_mass;
    b.cluster_count = cluster_count;
    b.wavelength = wavelength;
    b.grazing_angle = grazing_angle;
    return b;
}

} // namespace qrg
