#pragma once

#include <Eigen/Dense>
#include <optional>

#include "qrg/kinematics.hpp"
#include "qrg/potential.hpp"

namespace qrg {

// Uniform z-grid from the wall region out to the asymptotic region.
struct RadialGrid {
    double z_start;  // A, where the absorber ramp sits (z_i)
    double z_end;    // A, asymptotic matching point
    int n_points;    // grid points including both ends

    double step() const { return (z_end - z_start) / (n_points - 1); }
    double z(int j) const { return z_start + j * step(); }
};

// Throws DomainError unless z_start < z_end and n_points >= 3.
void validate(const RadialGrid& grid);

// How the solution is seeded at z_start.  hard_wall imposes a node; wkb_decay
// seeds the local decaying exponential instead.  With the absorber active the
// two agree to ~1e-3 in total reflection probability.
enum class InnerBoundary { hard_wall, wkb_decay };

// Assembles W(z) in psi'' = W psi:
//   W_nn  = 2M/hbar^2 (V(z) - i V_WS,class(n)(z)) - kz2_n
//   W_nn' = 2M/hbar^2 * factor(|n - n'|) * V(z)      (real)
// W is complex symmetric, never Hermitian; the absorber only touches the
// diagonal.  Immutable after construction, safe to share across threads.
class CouplingMatrixBuilder {
public:
    CouplingMatrixBuilder(const MorseCasimirPotential& pot, const GratingSpec& g,
                          const ChannelSet& channels, double mass_total, FormulaMode mode,
                          const WoodsSaxonAbsorber* absorber = nullptr);

    int size() const { return static_cast<int>(ns_.size()); }
    void fill(double z, Eigen::MatrixXcd& w) const;
    Eigen::MatrixXcd operator()(double z) const;

private:
    MorseCasimirPotential pot_;
    std::vector<int> ns_;
    std::vector<double> kz2_;
    std::vector<double> factor_;  // by |n - n'|; factor_[0] unused
    std::optional<WoodsSaxonAbsorber> absorber_;
    double two_m_over_hbar2_;
};

// Renormalized two-point ratio of the propagated solution.  With
// F_j = (I - T_j) psi_j and T = h^2 W / 12, `ratio` is F_{J-1} F_J^{-1}
// at the outer edge — finite even when closed channels grow by e^{+40}.
struct PropagationResult {
    Eigen::MatrixXcd ratio;
    Eigen::MatrixXcd imt_prev;  // I - T at z_{J-1}
    Eigen::MatrixXcd imt_end;   // I - T at z_J
    double z_prev;
    double z_end;
    double step;
    long steps;
    double max_step_param;    // max over the grid of ||h^2 W / 12||_max
    double error_estimate;    // ~ max_step_param^3: local Numerov error scale
};

// Numerov recursion in ratio form, z_start -> z_end.  Throws NumericalBlowup
// if non-finite values appear (grid far too coarse or absorber misconfigured).
PropagationResult propagate(const RadialGrid& grid, const CouplingMatrixBuilder& builder,
                            InnerBoundary boundary = InnerBoundary::hard_wall);

} // namespace qrg
