#pragma once

#include <optional>
#include <vector>

#include "qrg/errors.hpp"
#include "qrg/potential.hpp"

namespace qrg {

// Incident beam description.  Exactly one of source_temperature / wavelength
// is required (giving both is allowed only if they agree).  Angles are
// grazing, i.e. measured from the surface plane, in radians.
struct BeamSpec {
    double atom_mass = 0.0;                    // amu, single constituent atom
    int cluster_count = 1;                     // N: monomer 1, dimer 2, ...
    std::optional<double> source_temperature;  // K
    std::optional<double> wavelength;          // A (de Broglie, of the cluster)
    double grazing_angle = 0.0;                // rad
};

// Everything derived from a BeamSpec.  A cluster moves with the beam velocity
// of a single atom, sqrt(5 kB T0 / m), and carries N-fold momentum, so
// k_i = N sqrt(5 m kB T0) / hbar and the dynamical mass is N m.
struct BeamKinematics {
    double mass_total;     // N m, amu
    double t0;             // K
    double wavelength;     // A
    double k_i;            // 1/A
    double k_perp;         // k_i sin(theta), 1/A
    double energy;         // total kinetic energy N (5/2) kB T0, meV
    double grazing_angle;  // rad
};

// Throws DomainError for invalid fields, InconsistentSpec when T0 and lambda
// are both given but disagree beyond 1e-9 relative in k_i.
BeamKinematics beam_kinematics(const BeamSpec& beam);

// Vertical wave number squared of channel n (internal sign convention: the
// orders that can emerge have n > 0 here; published/experimental labels are
// the negation, applied only at output time):
//   k_{n,z}^2 = k_i^2 - (k_i cos(theta_g) + 2 pi n / d)^2
double channel_kz2(const BeamKinematics& kin, const GratingSpec& g, int n);

// The coupled-channel basis.  build_channels gives the usual symmetric range
// n = -n_max .. +n_max; an arbitrary subset (e.g. open channels only, for
// sensitivity studies) is equally valid.
struct ChannelSet {
    std::vector<int> n;       // internal channel indices
    std::vector<double> kz2;  // 1/A^2, same order
    std::vector<bool> open;   // kz2 > 0
    double period;            // A
    double k_i;               // 1/A

    int size() const { return static_cast<int>(n.size()); }
    int index_of(int nn) const;  // -1 if absent
    int count_open() const;
};

ChannelSet build_channels(const BeamKinematics& kin, const GratingSpec& g, int n_max);

// The same set with closed channels removed.
ChannelSet open_only(const ChannelSet& cs);

// Grazing exit angle per diffraction order, experimental sign convention
// (negative orders bend toward the surface):  cos(theta_n) = cos(theta_i) - n lambda / d.
struct BraggAngle {
    int n;         // experimental order
    double theta;  // grazing, rad
};

// Orders in [-n_abs_max, +n_abs_max] with a real exit angle; others omitted.
std::vector<BraggAngle> bragg_angles(const BeamKinematics& kin, const GratingSpec& g,
                                     int n_abs_max);

// Threshold ("emerging beam") grazing angles: order n emerges when
// theta_i = theta_R(n) = arccos(1 + n lambda / d), real only for n < 0 in the
// experimental convention.  A pure function of (lambda, d): species enters
// only through lambda.
struct RayleighTable {
    struct Row {
        int n;            // experimental order (negative)
        double theta_R;   // grazing, rad
    };
    std::vector<Row> rows;  // sorted by |n|
};

RayleighTable rayleigh_angles(double wavelength, double period, int n_abs_max);

} // namespace qrg
