#pragma once

#include <complex>
#include <vector>

#include "qrg/propagator.hpp"

namespace qrg {

struct MatchOptions {
    // Matching system condition-number ceiling; beyond it the linear solve is
    // meaningless (z_end too small, or a channel sitting on threshold).
    double max_condition = 1e12;
    int incoming = 0;  // channel carrying the unit incident flux
};

// Match the propagated ratio to the asymptotic forms at the two outer grid
// points: open channels to exp(+i k z) travelling waves plus the incident
// exp(-i k z) in the incoming channel, closed channels to decaying
// exponentials (solved for, then discarded from observables).  Returns the
// flux-normalized amplitudes S_n,incoming indexed like the ChannelSet, zero
// for closed channels.  Channels with |kz^2| < 1e-14 1/A^2 are pinned to
// exact threshold and treated as closed to keep the system well conditioned.
Eigen::VectorXcd match_asymptotic(const PropagationResult& prop, const ChannelSet& cs,
                                  const MatchOptions& opt = {});

// Same matching repeated for every open incoming channel: S(row, col) with
// both indices in ChannelSet order; closed rows and columns are zero.
// Without an absorber S is symmetric and unitary on the open block.
Eigen::MatrixXcd full_s_matrix(const PropagationResult& prop, const ChannelSet& cs,
                               const MatchOptions& opt = {});

// One solved incidence: amplitudes plus everything derived from them.
// Channel indices are internal (emerging orders positive); published
// convention is the negation, applied by the output layer only.
struct ScatteringSolution {
    BeamKinematics kin;
    RadialGrid grid;
    int channels_used = 0;
    bool absorber_on = false;
    FormulaMode mode = FormulaMode::as_printed;
    double error_estimate = 0.0;  // propagation diagnostic

    std::vector<int> n;
    std::vector<double> kz2;                // 1/A^2
    std::vector<bool> open;
    std::vector<bool> emerging;             // |kz2| within 10 eps k_i^2 of threshold
    std::vector<std::complex<double>> s;    // S_n0, zero for closed
    std::vector<double> intensity;          // |S_n0|^2
    std::vector<double> efficiency;         // intensity / p_qr

    double p_qr = 0.0;  // total quantum reflection probability
    int open_count = 0;
};

// Fill the per-channel observable block from matched amplitudes.
ScatteringSolution observables(const Eigen::VectorXcd& s_column, const ChannelSet& cs);

struct SolveOptions {
    int n_max = 30;  // 61 channels
    FormulaMode mode = FormulaMode::as_printed;
    InnerBoundary boundary = InnerBoundary::hard_wall;
    double max_condition = 1e12;
};

// Whole pipeline for one incidence: kinematics, channel set, propagation,
// matching, observables.  absorber == nullptr switches absorption off.
ScatteringSolution solve_scattering(const MorseCasimirPotential& pot, const GratingSpec& g,
                                    const BeamSpec& beam, const RadialGrid& grid,
                                    const WoodsSaxonAbsorber* absorber,
                                    const SolveOptions& opt = {});

} // namespace qrg
