#include "qrg/smatrix.hpp"

#include <cmath>
#include <limits>

namespace qrg {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using std::complex;

namespace {

constexpr double kz2_threshold = 1e-14;  // 1/A^2; below this a channel sits on threshold

struct MatchSystem {
    Eigen::PartialPivLU<MatrixXcd> lu;  // of the matching matrix
    MatrixXcd pe;                       // ratio * (I - T_end)
    std::vector<double> k;              // sqrt(|kz2|) per channel
    std::vector<bool> travelling;       // open and safely off threshold
};

MatchSystem factor_matching(const PropagationResult& prop, const ChannelSet& cs,
                            const MatchOptions& opt) {
    const int n = cs.size();
    if (prop.ratio.rows() != n)
        throw DomainError("matching: channel count does not match propagation");

    MatchSystem sys;
    sys.k.resize(n);
    sys.travelling.resize(n);
    VectorXcd g_prev(n), g_end(n);
    const complex<double> iu(0.0, 1.0);

    for (int i = 0; i < n; ++i) {
        double kz2 = cs.kz2[i];
        sys.k[i] = std::sqrt(std::abs(kz2));
        sys.travelling[i] = kz2 > 0.0 && std::abs(kz2) >= kz2_threshold;
        if (sys.travelling[i]) {
            g_prev(i) = std::exp(iu * sys.k[i] * prop.z_prev);
            g_end(i) = std::exp(iu * sys.k[i] * prop.z_end);
        } else if (std::abs(kz2) < kz2_threshold) {
            g_prev(i) = 1.0;  // exact-threshold limit of the decaying branch
            g_end(i) = 1.0;
        } else {
            // Decaying branch normalized at the outer edge so the column
            // stays O(1) instead of underflowing at exp(-kappa z_end).
            g_prev(i) = std::exp(sys.k[i] * prop.step);
            g_end(i) = 1.0;
        }
    }

    sys.pe.noalias() = prop.ratio * prop.imt_end;
    MatrixXcd a = prop.imt_prev * g_prev.asDiagonal();
    a.noalias() -= sys.pe * g_end.asDiagonal();
    sys.lu.compute(a);

    double rcond = sys.lu.rcond();
    if (!(rcond > 1.0 / opt.max_condition))
        throw IllConditionedMatch("matching system condition ~" +
                                  std::to_string(rcond > 0 ? 1.0 / rcond : std::numeric_limits<double>::infinity()) +
                                  " exceeds the configured bound (z_end too small, or a "
                                  "channel sits on threshold)");
    return sys;
}

// Amplitude column for a unit incident wave in channel m.
VectorXcd solve_column(const MatchSystem& sys, const PropagationResult& prop,
                       const ChannelSet& cs, int m_index) {
    const complex<double> iu(0.0, 1.0);
    double km = sys.k[m_index];
    VectorXcd rhs = std::exp(-iu * km * prop.z_end) * sys.pe.col(m_index) -
                    std::exp(-iu * km * prop.z_prev) * prop.imt_prev.col(m_index);
    VectorXcd b = sys.lu.solve(rhs);

    VectorXcd s = VectorXcd::Zero(cs.size());
    for (int i = 0; i < cs.size(); ++i)
        if (sys.travelling[i])
            s(i) = -std::sqrt(sys.k[i] / km) * b(i);
    return s;
}

int incoming_index(const ChannelSet& cs, int incoming) {
    int idx = cs.index_of(incoming);
    if (idx < 0) throw DomainError("matching: incoming channel not in the channel set");
    if (!cs.open[idx] || std::abs(cs.kz2[idx]) < kz2_threshold)
        throw DomainError("matching: incoming channel must be open");
    return idx;
}

} // namespace

VectorXcd match_asymptotic(const PropagationResult& prop, const ChannelSet& cs,
                           const MatchOptions& opt) {
    MatchSystem sys = factor_matching(prop, cs, opt);
    return solve_column(sys, prop, cs, incoming_index(cs, opt.incoming));
}

MatrixXcd full_s_matrix(const PropagationResult& prop, const ChannelSet& cs,
                        const MatchOptions& opt) {
    MatchSystem sys = factor_matching(prop, cs, opt);
    MatrixXcd s = MatrixXcd::Zero(cs.size(), cs.size());
    for (int m = 0; m < cs.size(); ++m)
        if (sys.travelling[m]) s.col(m) = solve_column(sys, prop, cs, m);
    return s;
}

ScatteringSolution observables(const VectorXcd& s_column, const ChannelSet& cs) {
    ScatteringSolution sol;
    const int n = cs.size();
    sol.n = cs.n;
    sol.kz2 = cs.kz2;
    sol.open.assign(n, false);
    sol.emerging.assign(n, false);
    sol.s.resize(n);
    sol.intensity.assign(n, 0.0);
    sol.efficiency.assign(n, 0.0);

    double eps_band = 10.0 * std::numeric_limits<double>::epsilon() * cs.k_i * cs.k_i;
    for (int i = 0; i < n; ++i) {
        sol.open[i] = cs.open[i];
        sol.emerging[i] = std::abs(cs.kz2[i]) <= eps_band;
        sol.s[i] = s_column(i);
        if (cs.open[i]) {
            sol.intensity[i] = std::norm(s_column(i));
            sol.p_qr += sol.intensity[i];
            ++sol.open_count;
        }
    }
    if (sol.p_qr > 0.0)
        for (int i = 0; i < n; ++i)
            if (sol.open[i]) sol.efficiency[i] = sol.intensity[i] / sol.p_qr;
    return sol;
}

ScatteringSolution solve_scattering(const MorseCasimirPotential& pot, const GratingSpec& g,
                                    const BeamSpec& beam, const RadialGrid& grid,
                                    const WoodsSaxonAbsorber* absorber,
                                    const SolveOptions& opt) {
    BeamKinematics kin = beam_kinematics(beam);
    ChannelSet cs = build_channels(kin, g, opt.n_max);
    CouplingMatrixBuilder builder(pot, g, cs, kin.mass_total, opt.mode, absorber);
    PropagationResult prop = propagate(grid, builder, opt.boundary);

    MatchOptions mo;
    mo.max_condition = opt.max_condition;
    VectorXcd s = match_asymptotic(prop, cs, mo);

    ScatteringSolution sol = observables(s, cs);
    sol.kin = kin;
    sol.grid = grid;
    sol.channels_used = cs.size();
    sol.absorber_on = absorber != nullptr;
    sol.mode = opt.mode;
    sol.error_estimate = prop.error_estimate;
    return sol;
}

} // namespace qrg
