#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qrg/presets.hpp"
#include "qrg/smatrix.hpp"

namespace qrg {

// Solver knobs shared by every point of a sweep (comparability within a plan).
struct SolverSettings {
    int n_max = 30;
    FormulaMode mode = FormulaMode::as_printed;
    bool absorber = true;
    InnerBoundary boundary = InnerBoundary::hard_wall;
    std::optional<RadialGrid> grid;  // unset: the species default
};

// A list of incidences for one species at fixed T0 or fixed wavelength.
struct SweepPlan {
    Species species;
    std::vector<double> angles;        // grazing, rad, strictly increasing
    std::optional<double> t0;          // K
    std::optional<double> wavelength;  // A; exactly one of t0/wavelength set
    SolverSettings solver;
};

SweepPlan kperp_plan(const Species& sp, std::optional<double> t0,
                     std::vector<double> angles, SolverSettings solver = {});
SweepPlan wavelength_plan(const Species& sp, double wavelength,
                          std::vector<double> angles, SolverSettings solver = {});

struct SweepPoint {
    double angle = 0.0;   // rad
    double k_perp = 0.0;  // 1/A
    bool ok = false;
    std::string error;            // failure reason when !ok
    ScatteringSolution solution;  // valid when ok
};

// Least-squares line through the origin on (k_perp, 1 - P^QR), restricted to
// the smallest decade of k_perp present: 1 - P = (2b) k.
struct SlopeFit {
    double b;            // threshold length, A
    double slope2b;      // 2b, A
    double residual;     // rms misfit relative to rms signal over the window
    int points_used;
    double k_max_used;   // window edge, 1/A
};

struct SweepResult {
    SweepPlan plan;
    double wavelength = 0.0;  // A, common to all points
    std::vector<SweepPoint> points;
    RayleighTable rayleigh;   // thresholds at this (wavelength, period)
    std::optional<SlopeFit> slope;
    std::string slope_note;   // diagnostic when the fit was refused
};

// Solve every plan point on `threads` workers and merge in plan order.
// A failing point is flagged and does not abort the rest.
SweepResult run_sweep(const SweepPlan& plan, int threads = 1);

// Fill result.slope from the points (or result.slope_note explaining why not).
void fit_threshold_slope(SweepResult& result);

// Efficiency of experimental order n_exp at each sweep point (0 where the
// channel is closed or the point failed).
std::vector<double> efficiency_series(const SweepResult& result, int n_exp);

// Series scaled to unit maximum; an all-zero series stays zero.
std::vector<double> peak_normalized(std::vector<double> series);

// Staged absorber fit against the one-channel baseline.
struct CalibrationOptions {
    double t0;             // K; reference incidence
    double angle;          // rad
    double tolerance = 0.05;                      // relative, on the specular probability
    std::vector<double> amplitude_grid_hartree =  // searched in this order
        {1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1};
    std::vector<double> alpha_grid = {0.1, 0.12, 0.3, 0.5, 0.9, 1.5};
    SolverSettings solver;  // n_max ignored (stages fix it)
};

struct CalibrationResult {
    WoodsSaxonAbsorber absorber;
    double reference;         // one-channel specular probability
    double stage1_residual;   // relative mismatch of the accepted candidate
    double stage2_residual;
};

// The specular pair (A0, alpha0) is whatever the species carries: it defines
// the one-channel baseline and is not searched.  Stage 1: three channels
// {0, +-1}; the {+-1} pair is scanned in grid order, the first (A, alpha)
// whose specular probability matches the baseline within tolerance becomes
// (A1, alpha1).  Stage 2: five channels with stage 1 pinned; the {+-2} pair
// is scanned the same way, the winner (A2, alpha2) is inherited by every
// remaining channel (those barely move the specular flux).  Throws
// CalibrationFailed when a stage has no candidate within tolerance.
CalibrationResult calibrate_absorber(const Species& sp, const CalibrationOptions& opt);

// Grid / channel / box-size refinement table.
struct ConvergenceOptions {
    double t0;     // K
    double angle;  // rad
    std::vector<int> point_counts = {5000, 10000, 20000, 40000};
    std::vector<int> channel_counts = {21, 41, 61, 81};
    double rel_tol = 1e-3;
    SolverSettings solver;
};

struct ConvergenceReport {
    struct Row {
        std::string stage;  // "points", "channels", "z_end"
        int channels;
        int points;
        double z_end;  // A
        bool ok;
        double p_qr;
        double specular;  // |S_00|^2
        std::string error;
    };
    std::vector<Row> rows;
    bool points_converged = false;
    bool channels_converged = false;
    bool z_end_converged = false;
    double points_delta = 0.0;    // last successive relative change
    double channels_delta = 0.0;
    double z_end_delta = 0.0;
};

ConvergenceReport convergence_study(const Species& sp, const ConvergenceOptions& opt,
                                    int threads = 1);

} // namespace qrg
