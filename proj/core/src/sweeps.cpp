#include "qrg/sweeps.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "qrg/units.hpp"

namespace qrg {

namespace {

void validate_plan(const SweepPlan& plan) {
    if (plan.t0.has_value() == plan.wavelength.has_value())
        throw DomainError("sweep plan: set exactly one of t0 / wavelength");
    for (size_t i = 1; i < plan.angles.size(); ++i)
        if (!(plan.angles[i] > plan.angles[i - 1]))
            throw DomainError("sweep plan: angles must be strictly increasing");
    if (plan.solver.n_max < 0) throw DomainError("sweep plan: n_max must be >= 0");
}

BeamSpec plan_beam(const SweepPlan& plan, double angle) {
    return plan.t0 ? plan.species.beam_at_t0(*plan.t0, angle)
                   : plan.species.beam_at_wavelength(*plan.wavelength, angle);
}

} // namespace

SweepPlan kperp_plan(const Species& sp, std::optional<double> t0, std::vector<double> angles,
                     SolverSettings solver) {
    SweepPlan plan;
    plan.species = sp;
    plan.angles = angles.empty() ? sp.scan_angles : std::move(angles);
    plan.t0 = t0 ? *t0 : sp.scan_t0;
    plan.solver = solver;
    return plan;
}

SweepPlan wavelength_plan(const Species& sp, double wavelength, std::vector<double> angles,
                          SolverSettings solver) {
    SweepPlan plan;
    plan.species = sp;
    plan.angles = std::move(angles);
    plan.wavelength = wavelength;
    plan.solver = solver;
    return plan;
}

SweepResult run_sweep(const SweepPlan& plan, int threads) {
    validate_plan(plan);
    if (threads < 1) throw DomainError("run_sweep: thread count must be >= 1");

    SweepResult result;
    result.plan = plan;
    result.points.resize(plan.angles.size());

    const GratingSpec grating = default_grating();
    const MorseCasimirPotential pot = make_potential(plan.species);
    const RadialGrid grid = plan.solver.grid.value_or(plan.species.grid);
    const WoodsSaxonAbsorber* absorber = plan.solver.absorber ? &plan.species.absorber : nullptr;

    SolveOptions sopt;
    sopt.n_max = plan.solver.n_max;
    sopt.mode = plan.solver.mode;
    sopt.boundary = plan.solver.boundary;

    auto solve_point = [&](size_t i) {
        SweepPoint& pt = result.points[i];
        pt.angle = plan.angles[i];
        try {
            BeamSpec beam = plan_beam(plan, pt.angle);
            pt.solution = solve_scattering(pot, grating, beam, grid, absorber, sopt);
            pt.k_perp = pt.solution.kin.k_perp;
            pt.ok = true;
        } catch (const std::exception& e) {
            pt.ok = false;
            pt.error = e.what();
            try {
                pt.k_perp = beam_kinematics(plan_beam(plan, pt.angle)).k_perp;
            } catch (const std::exception&) {
                pt.k_perp = 0.0;  // the beam spec itself was the problem
            }
        }
    };

    if (threads == 1 || result.points.size() <= 1) {
        for (size_t i = 0; i < result.points.size(); ++i) solve_point(i);
    } else {
        std::atomic<size_t> next{0};
        auto worker = [&] {
            for (size_t i = next.fetch_add(1); i < result.points.size(); i = next.fetch_add(1))
                solve_point(i);
        };
        std::vector<std::thread> pool;
        int width = std::min<int>(threads, static_cast<int>(result.points.size()));
        pool.reserve(width);
        for (int t = 0; t < width; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    // The wavelength is an angle-independent plan property; derive it at a
    // synthetic valid incidence so one broken plan angle cannot veto the
    // threshold table.  If the beam spec itself is unusable, every point
    // already carries that error and the table stays empty.
    try {
        BeamKinematics kin = beam_kinematics(plan_beam(plan, 1e-3));
        result.wavelength = kin.wavelength;
        result.rayleigh = rayleigh_angles(kin.wavelength, grating.period, 6);
    } catch (const std::exception&) {
    }
    return result;
}

void fit_threshold_slope(SweepResult& result) {
    result.slope.reset();
    std::vector<std::pair<double, double>> pts;  // (k_perp, 1 - P)
    double k_min = 0.0;
    for (const SweepPoint& pt : result.points) {
        if (!pt.ok) continue;
        pts.emplace_back(pt.k_perp, 1.0 - pt.solution.p_qr);
        k_min = (pts.size() == 1) ? pt.k_perp : std::min(k_min, pt.k_perp);
    }
    if (pts.size() < 2) {
        result.slope_note = "slope fit refused: need at least 2 solved points, have " +
                            std::to_string(pts.size());
        return;
    }

    double k_max = 10.0 * k_min;  // smallest decade present
    double sky = 0.0, skk = 0.0;
    int used = 0;
    for (auto [k, y] : pts)
        if (k <= k_max) {
            sky += k * y;
            skk += k * k;
            ++used;
        }
    if (used < 2) {
        result.slope_note = "slope fit refused: fewer than 2 points in the smallest decade";
        return;
    }

    SlopeFit fit;
    fit.slope2b = sky / skk;
    fit.b = 0.5 * fit.slope2b;
    fit.points_used = used;
    fit.k_max_used = k_max;
    double ss_res = 0.0, ss_tot = 0.0;
    for (auto [k, y] : pts)
        if (k <= k_max) {
            double r = y - fit.slope2b * k;
            ss_res += r * r;
            ss_tot += y * y;
        }
    fit.residual = ss_tot > 0.0 ? std::sqrt(ss_res / ss_tot) : 0.0;
    result.slope = fit;
    result.slope_note.clear();
}

std::vector<double> efficiency_series(const SweepResult& result, int n_exp) {
    int n_internal = -n_exp;  // published orders are the negated channel index
    std::vector<double> out(result.points.size(), 0.0);
    for (size_t i = 0; i < result.points.size(); ++i) {
        const SweepPoint& pt = result.points[i];
        if (!pt.ok) continue;
        const auto& sol = pt.solution;
        for (size_t c = 0; c < sol.n.size(); ++c)
            if (sol.n[c] == n_internal && sol.open[c]) out[i] = sol.efficiency[c];
    }
    return out;
}

std::vector<double> peak_normalized(std::vector<double> series) {
    double peak = 0.0;
    for (double v : series) peak = std::max(peak, v);
    if (peak > 0.0)
        for (double& v : series) v /= peak;
    return series;
}

namespace {

// Specular probability with every absorber class sharing one candidate pair
// except those pinned by earlier stages.
double staged_specular(const MorseCasimirPotential& pot, const GratingSpec& grating,
                       const BeamSpec& beam, const RadialGrid& grid,
                       const SolverSettings& solver, int n_max,
                       const WoodsSaxonAbsorber& absorber) {
    SolveOptions sopt;
    sopt.n_max = n_max;
    sopt.mode = solver.mode;
    sopt.boundary = solver.boundary;
    ScatteringSolution sol = solve_scattering(pot, grating, beam, grid, &absorber, sopt);
    int idx = 0;
    for (size_t c = 0; c < sol.n.size(); ++c)
        if (sol.n[c] == 0) idx = static_cast<int>(c);
    return sol.intensity[idx];
}

} // namespace

CalibrationResult calibrate_absorber(const Species& sp, const CalibrationOptions& opt) {
    if (opt.amplitude_grid_hartree.empty() || opt.alpha_grid.empty())
        throw DomainError("calibration: empty search grid");

    const GratingSpec grating = default_grating();
    const MorseCasimirPotential pot = make_potential(sp);
    const RadialGrid grid = opt.solver.grid.value_or(sp.grid);
    const BeamSpec beam = sp.beam_at_t0(opt.t0, opt.angle);

    // One-channel baseline with the species' published absorber.
    double reference =
        staged_specular(pot, grating, beam, grid, opt.solver, 0, sp.absorber);
    if (!(reference > 0.0))
        throw CalibrationFailed("calibration: one-channel baseline has no reflected flux");

    WoodsSaxonAbsorber fitted = sp.absorber;  // keeps z_i and chi

    // A stage scans candidates in grid order; the first within tolerance wins.
    auto run_stage = [&](int n_max, std::initializer_list<ChannelClass> vary) {
        for (double amp_ha : opt.amplitude_grid_hartree) {
            for (double alpha : opt.alpha_grid) {
                WoodsSaxonAbsorber trial = fitted;
                for (ChannelClass cls : vary) {
                    trial.amplitude_for(cls) = amp_ha * units::hartree_meV;
                    trial.alpha_for(cls) = alpha;
                }
                double p = staged_specular(pot, grating, beam, grid, opt.solver, n_max, trial);
                double residual = std::abs(p - reference) / reference;
                if (residual <= opt.tolerance) {
                    fitted = trial;
                    return residual;
                }
            }
        }
        throw CalibrationFailed("calibration: no candidate within tolerance at " +
                                std::to_string(2 * n_max + 1) + " channels");
    };

    CalibrationResult out;
    // Each stage adds channels and tunes only the incoming pair; the specular
    // pair stays what the baseline was computed with.  Three channels: the
    // {+-1} pair is searched, winner (A1, alpha1).
    out.stage1_residual = run_stage(1, {ChannelClass::first_order});
    // Five channels: {+-1} pinned at the stage-1 winner, the {+-2} pair is
    // searched, winner (A2, alpha2).
    out.stage2_residual = run_stage(2, {ChannelClass::other});
    // Remaining channels inherit (A2, alpha2).

    out.absorber = fitted;
    out.reference = reference;
    return out;
}

ConvergenceReport convergence_study(const Species& sp, const ConvergenceOptions& opt,
                                    int threads) {
    (void)threads;  // rows depend on each other's comparison only; solve serially
    const GratingSpec grating = default_grating();
    const MorseCasimirPotential pot = make_potential(sp);
    const RadialGrid base = opt.solver.grid.value_or(sp.grid);
    const BeamSpec beam = sp.beam_at_t0(opt.t0, opt.angle);
    const WoodsSaxonAbsorber* absorber = opt.solver.absorber ? &sp.absorber : nullptr;

    ConvergenceReport report;

    auto solve_row = [&](std::string stage, int channels, RadialGrid grid) {
        ConvergenceReport::Row row;
        row.stage = std::move(stage);
        row.channels = channels;
        row.points = grid.n_points;
        row.z_end = grid.z_end;
        try {
            SolveOptions sopt;
            sopt.n_max = (channels - 1) / 2;
            sopt.mode = opt.solver.mode;
            sopt.boundary = opt.solver.boundary;
            ScatteringSolution sol = solve_scattering(pot, grating, beam, grid, absorber, sopt);
            row.ok = true;
            row.p_qr = sol.p_qr;
            for (size_t c = 0; c < sol.n.size(); ++c)
                if (sol.n[c] == 0) row.specular = sol.intensity[c];
        } catch (const std::exception& e) {
            row.ok = false;
            row.p_qr = row.specular = 0.0;
            row.error = e.what();
        }
        report.rows.push_back(row);
        return row;
    };

    auto rel_delta = [](double a, double b) {
        return b != 0.0 ? std::abs(a - b) / std::abs(b) : std::abs(a - b);
    };

    // Stage 1: grid refinement at the solver's channel count.
    int ref_channels = 2 * opt.solver.n_max + 1;
    double prev = 0.0;
    bool have_prev = false;
    for (int np : opt.point_counts) {
        RadialGrid g = base;
        g.n_points = np;
        auto row = solve_row("points", ref_channels, g);
        if (row.ok && have_prev) {
            report.points_delta = rel_delta(row.p_qr, prev);
            report.points_converged = report.points_delta < opt.rel_tol;
        }
        if (row.ok) {
            prev = row.p_qr;
            have_prev = true;
        }
    }

    // Stage 2: channel refinement on the base grid.
    have_prev = false;
    for (int ch : opt.channel_counts) {
        auto row = solve_row("channels", ch, base);
        if (row.ok && have_prev) {
            report.channels_delta = rel_delta(row.p_qr, prev);
            report.channels_converged = report.channels_delta < opt.rel_tol;
        }
        if (row.ok) {
            prev = row.p_qr;
            have_prev = true;
        }
    }

    // Stage 3: double the box (same density).
    auto base_row = solve_row("z_end", ref_channels, base);
    RadialGrid doubled = base;
    doubled.z_end = base.z_start + 2.0 * (base.z_end - base.z_start);
    doubled.n_points = 2 * base.n_points - 1;  // keeps the spacing identical
    auto big_row = solve_row("z_end", ref_channels, doubled);
    if (base_row.ok && big_row.ok) {
        report.z_end_delta = rel_delta(big_row.p_qr, base_row.p_qr);
        report.z_end_converged = report.z_end_delta < opt.rel_tol;
    }

    return report;
}

} // namespace qrg
