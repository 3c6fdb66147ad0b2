#pragma once

#include <functional>
#include <string>
#include <string_view>

#include "qrg/errors.hpp"

namespace qrg {

// Vertical interaction: Morse well matched smoothly onto a van der
// Waals-Casimir tail -C4/((l+z) z^3) at the point z_bar where both value and
// slope agree.  chi, c3 and l are inputs; well_depth, z_bar and c4 = c3*l are
// derived by match_morse_casimir().
struct MorseCasimirPotential {
    double chi;         // Morse stiffness, 1/A
    double well_depth;  // D, meV
    double c3;          // vdW coefficient, meV*A^3
    double l;           // vdW -> Casimir crossover length, A
    double z_bar;       // matching point, A
    double c4;          // c3 * l, meV*A^4

    // D [exp(-2 chi z) - 2 exp(-chi z)]; valid for all z.
    double morse(double z) const;
    double morse_deriv(double z) const;

    // -C4 / ((l+z) z^3); pole at z = 0, so z must be positive.
    double casimir(double z) const;
    double casimir_deriv(double z) const;

    // Branch switch at z_bar: Morse below, Casimir tail above.
    double operator()(double z) const {
        return z < z_bar ? morse(z) : casimir(z);
    }
};

// Solve the two continuity conditions V_M(z_bar) = V_C(z_bar),
// V_M'(z_bar) = V_C'(z_bar) for z_bar and D.  Throws NoMatchingPoint if no
// sign change exists in the (0.1 A, 100 A) bracket, NonConvergence if the
// safeguarded Newton refinement stalls.
MorseCasimirPotential match_morse_casimir(double chi, double c3, double l);

// Periodic strip grating: strips of width a repeating with period d,
// vacuum gaps in between.  Lengths in A.
struct GratingSpec {
    double period;        // d
    double strip_width;   // a
    int max_fourier_order = 30;

    double duty() const { return strip_width / period; }
};

// Throws DomainError unless 0 < a <= d and max_fourier_order >= 1.
// a == d (gapless) is legal but degenerate; callers may warn.
void validate(const GratingSpec& g);

// sin(pi x)/(pi x); exactly 1 at x = 0 and exactly 0 at nonzero integers.
double sinc(double x);

// Fourier coefficient of the strip profile: c_n = (a/d) sinc(n a/d).
double fourier_coefficient(int n, const GratingSpec& g);

// Two published forms of the off-diagonal coupling differ by a constant:
//   as_printed          V_n = 2 sinc(n a/d) V(z)
//   fourier_consistent  V_n = (c_n / c_0) V(z) = sinc(n a/d) V(z)
// The diagonal term is V(z) itself in both.  Default is as_printed, which is
// what the published intensities use.
enum class FormulaMode { as_printed, fourier_consistent };

FormulaMode parse_formula_mode(std::string_view name);  // throws InvalidMode
std::string_view to_string(FormulaMode mode);

// Dimensionless factor multiplying V(z) in the coupling between channels
// whose indices differ by n_diff (n_diff != 0).
double coupling_factor(int n_diff, const GratingSpec& g, FormulaMode mode);

// The coupling as a callable z -> meV, for dumping and tests.  The hot path
// (coupling-matrix assembly) uses coupling_factor() directly.
std::function<double(double)> coupling(int n_diff, const MorseCasimirPotential& pot,
                                       const GratingSpec& g, FormulaMode mode);

// Channels share absorber parameters by class, not individually.
enum class ChannelClass { specular, first_order, other };

constexpr ChannelClass channel_class(int n) {
    if (n == 0) return ChannelClass::specular;
    if (n == 1 || n == -1) return ChannelClass::first_order;
    return ChannelClass::other;
}

// Woods-Saxon ramp A / (1 + exp(alpha chi (z - z_i))): half height at the
// grid start z_i, decaying toward the surface-free region.  It enters the
// channel diagonal as -i * value(...); couplings stay real.  Amplitudes are
// stored in meV (conversion from atomic units happens at config time).
struct WoodsSaxonAbsorber {
    double amplitude[3];  // meV, indexed by ChannelClass
    double alpha[3];      // dimensionless
    double z_i;           // A
    double chi;           // 1/A, shared with the Morse stiffness

    double value(ChannelClass cls, double z) const;
    double value(int n, double z) const { return value(channel_class(n), z); }

    double& amplitude_for(ChannelClass cls) { return amplitude[static_cast<int>(cls)]; }
    double& alpha_for(ChannelClass cls) { return alpha[static_cast<int>(cls)]; }
    double amplitude_for(ChannelClass cls) const { return amplitude[static_cast<int>(cls)]; }
    double alpha_for(ChannelClass cls) const { return alpha[static_cast<int>(cls)]; }
};

} // namespace qrg
