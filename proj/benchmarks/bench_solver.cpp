// Microbenchmarks for the solver hot path: potential evaluation, coupling
// matrix assembly, the ratio-recursion propagation (the dominant cost, cubic
// in channel count), asymptotic matching, and a small end-to-end solve.

#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include <qrg/kinematics.hpp>
#include <qrg/potential.hpp>
#include <qrg/presets.hpp>
#include <qrg/propagator.hpp>
#include <qrg/smatrix.hpp>

namespace {

using namespace qrg;

constexpr double kLambda = 1.79;   // A
constexpr double kAngle = 4.5e-3;  // rad

const Species& he() { return species_preset("He"); }

BeamKinematics kin() { return beam_kinematics(he().beam_at_wavelength(kLambda, kAngle)); }

void bm_potential_eval(benchmark::State& state) {
    MorseCasimirPotential pot = make_potential(he());
    double z = 1.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(pot(z));
        z += 0.37;
        if (z > 400.0) z = 1.0;  // exercise both branches around z_bar
    }
}
BENCHMARK(bm_potential_eval);

void bm_coupling_fill(benchmark::State& state) {
    int n_max = (static_cast<int>(state.range(0)) - 1) / 2;
    BeamKinematics k = kin();
    GratingSpec g = default_grating();
    ChannelSet cs = build_channels(k, g, n_max);
    CouplingMatrixBuilder builder(make_potential(he()), g, cs, k.mass_total,
                                  FormulaMode::as_printed, &he().absorber);
    Eigen::MatrixXcd w(cs.size(), cs.size());
    double z = -5.0;
    for (auto _ : state) {
        builder.fill(z, w);
        benchmark::DoNotOptimize(w.data());
        z += 1.7;
        if (z > 450.0) z = -5.0;
    }
}
BENCHMARK(bm_coupling_fill)->Arg(21)->Arg(41)->Arg(61);

void bm_propagate(benchmark::State& state) {
    int n_max = (static_cast<int>(state.range(0)) - 1) / 2;
    BeamKinematics k = kin();
    GratingSpec g = default_grating();
    ChannelSet cs = build_channels(k, g, n_max);
    CouplingMatrixBuilder builder(make_potential(he()), g, cs, k.mass_total,
                                  FormulaMode::as_printed, &he().absorber);
    RadialGrid grid{-10.0, 90.0, 2001};
    for (auto _ : state) {
        PropagationResult prop = propagate(grid, builder);
        benchmark::DoNotOptimize(prop.ratio.data());
    }
    // steps per second: the propagation loop is the production bottleneck
    state.SetItemsProcessed(state.iterations() * (grid.n_points - 2));
}
BENCHMARK(bm_propagate)->Arg(21)->Arg(41)->Arg(61)->Unit(benchmark::kMillisecond);

void bm_match_asymptotic(benchmark::State& state) {
    BeamKinematics k = kin();
    GratingSpec g = default_grating();
    ChannelSet cs = build_channels(k, g, 10);
    CouplingMatrixBuilder builder(make_potential(he()), g, cs, k.mass_total,
                                  FormulaMode::as_printed, &he().absorber);
    PropagationResult prop = propagate(he().grid, builder);
    for (auto _ : state) {
        Eigen::VectorXcd s = match_asymptotic(prop, cs);
        benchmark::DoNotOptimize(s.data());
    }
}
BENCHMARK(bm_match_asymptotic);

void bm_solve_small(benchmark::State& state) {
    const Species& sp = he();
    MorseCasimirPotential pot = make_potential(sp);
    GratingSpec g = default_grating();
    BeamSpec beam = sp.beam_at_wavelength(kLambda, kAngle);
    RadialGrid grid{-10.0, 300.0, 6001};
    SolveOptions opt;
    opt.n_max = 2;
    for (auto _ : state) {
        ScatteringSolution sol = solve_scattering(pot, g, beam, grid, &sp.absorber, opt);
        benchmark::DoNotOptimize(sol.p_qr);
    }
}
BENCHMARK(bm_solve_small)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
