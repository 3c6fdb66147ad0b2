#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "qrg/sweeps.hpp"

namespace qrg {

// Every numeric cell uses 12 significant digits in scientific notation so
// files round-trip exactly and regression-diff cleanly.  No timestamps, no
// machine identifiers: a rerun must be byte-identical.
std::string format_number(double v);

// Per-channel record of one solved incidence.  Channel labels are the
// published (experimental) orders, i.e. the negated internal index, rows
// sorted by that label.
// Header: n,kz2_invA2,open,emerging,re_s,im_s,intensity,efficiency
void write_solution_csv(std::ostream& os, const ScatteringSolution& sol);

// One row per sweep point (failed points are skipped; they are listed in the
// manifest).  Header: theta_mrad,k_perp_invnm,p_qr,one_minus_p_qr,
// specular_intensity,open_channels
void write_sweep_csv(std::ostream& os, const SweepResult& result);

// Efficiency series per requested published order.  Header:
// theta_mrad,k_perp_invnm,p_qr,eff_<n>,...  plus open_channels last.
void write_efficiency_csv(std::ostream& os, const SweepResult& result,
                          const std::vector<int>& orders, bool normalized = false);

// Header: n,theta_R_mrad
void write_rayleigh_csv(std::ostream& os, const RayleighTable& table);

// Two columns for plotting the vertical potential.  Header: z_A,v_meV
void write_potential_csv(std::ostream& os, const MorseCasimirPotential& pot, double z_min,
                         double z_max, int n_points);

// Header: stage,channels,points,z_end_A,ok,p_qr,specular_intensity
void write_convergence_csv(std::ostream& os, const ConvergenceReport& report);

} // namespace qrg
