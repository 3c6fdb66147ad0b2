#include "qrg/potential.hpp"

#include <cmath>

#include "qrg/units.hpp"

namespace qrg {

double MorseCasimirPotential::morse(double z) const {
    double u = std::exp(-chi * z);
    return well_depth * (u * u - 2.0 * u);
}

double MorseCasimirPotential::morse_deriv(double z) const {
    double u = std::exp(-chi * z);
    return 2.0 * chi * well_depth * (u - u * u);
}

double MorseCasimirPotential::casimir(double z) const {
    if (z <= 0.0)
        throw DomainError("Casimir branch evaluated at z <= 0 (pole at the surface)");
    return -c4 / ((l + z) * z * z * z);
}

double MorseCasimirPotential::casimir_deriv(double z) const {
    if (z <= 0.0)
        throw DomainError("Casimir branch evaluated at z <= 0 (pole at the surface)");
    double zl = l + z;
    return c4 * (4.0 * z + 3.0 * l) / (zl * zl * z * z * z * z);
}

namespace {

// Matching condition as a single function of the candidate point z:
// logarithmic derivatives of the two branches must agree,
//   V_M'/V_M = -2 chi (1 - u)/(2 - u),  u = exp(-chi z)
//   V_C'/V_C = -(4z + 3l)/((l + z) z)
// phi(z) = difference of the two; strictly decreasing, +inf at 0+, -> -chi.
double phi(double z, double chi, double l) {
    double u = std::exp(-chi * z);
    return -2.0 * chi * (1.0 - u) / (2.0 - u) + (4.0 * z + 3.0 * l) / ((l + z) * z);
}

double phi_deriv(double z, double chi, double l) {
    double u = std::exp(-chi * z);
    double t = 2.0 - u;
    double q = z * z + l * z;
    return -2.0 * chi * chi * u / (t * t) - (4.0 * z * z + 6.0 * l * z + 3.0 * l * l) / (q * q);
}

} // namespace

MorseCasimirPotential match_morse_casimir(double chi, double c3, double l) {
    if (chi <= 0.0 || c3 <= 0.0 || l <= 0.0)
        throw DomainError("match_morse_casimir: chi, c3, l must all be positive");

    double lo = 0.1, hi = 100.0;
    double flo = phi(lo, chi, l), fhi = phi(hi, chi, l);
    if (!(flo > 0.0 && fhi < 0.0))
        throw NoMatchingPoint("no sign change of the matching condition in (0.1, 100) A");

    // Bisect to a narrow bracket, then polish with safeguarded Newton.
    for (int i = 0; i < 40; ++i) {
        double mid = 0.5 * (lo + hi);
        (phi(mid, chi, l) > 0.0 ? lo : hi) = mid;
    }
    double z = 0.5 * (lo + hi);
    bool converged = false;
    for (int i = 0; i < 60; ++i) {
        double f = phi(z, chi, l);
        (f > 0.0 ? lo : hi) = z;
        double step = f / phi_deriv(z, chi, l);
        double next = z - step;
        if (next <= lo || next >= hi) next = 0.5 * (lo + hi);
        if (std::abs(next - z) < 1e-12) {
            z = next;
            converged = true;
            break;
        }
        z = next;
    }
    if (!converged)
        throw NonConvergence("matching-point refinement did not reach 1e-12 A");

    MorseCasimirPotential pot;
    pot.chi = chi;
    pot.c3 = c3;
    pot.l = l;
    pot.c4 = c3 * l;
    pot.z_bar = z;
    pot.well_depth = 1.0;  // placeholder so casimir() sees a complete object
    double u = std::exp(-chi * z);
    pot.well_depth = pot.casimir(z) / (u * u - 2.0 * u);
    return pot;
}

void validate(const GratingSpec& g) {
    if (!(g.period > 0.0))
        throw DomainError("grating period must be positive");
    if (!(g.strip_width > 0.0))
        throw DomainError("grating strip width must be positive");
    if (g.strip_width > g.period)
        throw DomainError("grating strip width exceeds the period");
    if (g.max_fourier_order < 1)
        throw DomainError("max_fourier_order must be at least 1");
}

double sinc(double x) {
    if (x == 0.0) return 1.0;
    if (x == std::round(x)) return 0.0;  // exact zeros at nonzero integers
    double px = units::pi * x;
    return std::sin(px) / px;
}

double fourier_coefficient(int n, const GratingSpec& g) {
    return g.duty() * sinc(n * g.duty());
}

FormulaMode parse_formula_mode(std::string_view name) {
    if (name == "as_printed") return FormulaMode::as_printed;
    if (name == "fourier_consistent") return FormulaMode::fourier_consistent;
    throw InvalidMode("unknown formula mode '" + std::string(name) +
                      "' (expected as_printed or fourier_consistent)");
}

std::string_view to_string(FormulaMode mode) {
    return mode == FormulaMode::as_printed ? "as_printed" : "fourier_consistent";
}

double coupling_factor(int n_diff, const GratingSpec& g, FormulaMode mode) {
    if (n_diff == 0)
        throw DomainError("coupling_factor is for off-diagonal terms; the diagonal is V itself");
    double s = sinc(n_diff * g.duty());
    return mode == FormulaMode::as_printed ? 2.0 * s : s;
}

std::function<double(double)> coupling(int n_diff, const MorseCasimirPotential& pot,
                                       const GratingSpec& g, FormulaMode mode) {
    double f = coupling_factor(n_diff, g, mode);
    return [f, pot](double z) { return f * pot(z); };
}

double WoodsSaxonAbsorber::value(ChannelClass cls, double z) const {
    int i = static_cast<int>(cls);
    return amplitude[i] / (1.0 + std::exp(alpha[i] * chi * (z - z_i)));
}

} // namespace qrg
