// qrg: coupled-channel quantum reflection and diffraction from a periodic
// strip grating.  Subcommands cover single incidences, angle/k_perp sweeps,
// the fixed-wavelength multi-species comparison, absorber calibration, and
// grid convergence checks.  All outputs are deterministic CSV plus a JSON
// manifest; rerunning a manifest's command line reproduces the bytes.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <qrg/config.hpp>
#include <qrg/csv.hpp>
#include <qrg/errors.hpp>
#include <qrg/kinematics.hpp>
#include <qrg/presets.hpp>
#include <qrg/smatrix.hpp>
#include <qrg/sweeps.hpp>
#include <qrg/units.hpp>

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using qrg::units::Dim;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string species;
    std::string output = "out";
    int channels = 0;     // 0: keep config value
    bool no_absorber = false;
    std::string formula_mode;
    std::string boundary;
    int threads = 1;
    int grid_points = 0;  // 0: keep config value
};

const CLI::Validator odd_channels{
    [](std::string& s) {
        int v = 0;
        try {
            v = std::stoi(s);
        } catch (...) {
            return std::string("not an integer");
        }
        if (v < 1 || v % 2 == 0) return std::string("channel count must be odd and positive");
        return std::string();
    },
    "ODD"};

void add_common(CLI::App* cmd, CommonOpts& o, bool solver_flags = true) {
    cmd->add_option("--config", o.config_path, "run config (JSON with unit strings)")
        ->check(CLI::ExistingFile);
    cmd->add_option("--species", o.species, "preset: He, He2, He3, Ne");
    cmd->add_option("--output", o.output, "output directory (default: out)");
    if (solver_flags) {
        cmd->add_option("--channels", o.channels, "diffraction channel count (odd)")
            ->check(odd_channels);
        cmd->add_flag("--no-absorber", o.no_absorber, "switch the absorbing ramp off");
        cmd->add_option("--formula-mode", o.formula_mode, "as_printed | fourier_consistent");
        cmd->add_option("--boundary", o.boundary, "hard_wall | wkb_decay");
        cmd->add_option("--threads", o.threads, "sweep worker count")->check(CLI::Range(1, 256));
        cmd->add_option("--grid-points", o.grid_points, "radial grid points")
            ->check(CLI::Range(3, 50'000'000));
    }
}

qrg::InnerBoundary parse_boundary(const std::string& name) {
    if (name == "hard_wall") return qrg::InnerBoundary::hard_wall;
    if (name == "wkb_decay") return qrg::InnerBoundary::wkb_decay;
    throw qrg::ValidationError("unknown boundary '" + name + "' (hard_wall, wkb_decay)");
}

qrg::RunConfig load_config(const CommonOpts& o) {
    if (!o.config_path.empty() && !o.species.empty())
        throw qrg::ValidationError("give --config or --species, not both");
    qrg::RunConfig cfg = !o.config_path.empty()
                             ? qrg::parse_config(o.config_path)
                             : qrg::config_for_species(o.species.empty() ? "He" : o.species);
    if (o.channels) cfg.solver.n_max = (o.channels - 1) / 2;
    if (o.no_absorber) cfg.solver.absorber = false;
    if (!o.formula_mode.empty()) cfg.solver.mode = qrg::parse_formula_mode(o.formula_mode);
    if (!o.boundary.empty()) cfg.solver.boundary = parse_boundary(o.boundary);
    if (o.grid_points) cfg.species.grid.n_points = o.grid_points;
    cfg.solver.grid = cfg.species.grid;
    return cfg;
}

// Angles on the command line: bare numbers mean mrad, otherwise an explicit
// unit ("0.0052 rad", "5.2 mrad").
double parse_angle_item(const std::string& item) {
    bool has_alpha = std::any_of(item.begin(), item.end(),
                                 [](unsigned char c) { return std::isalpha(c); });
    if (has_alpha) return qrg::units::parse_quantity(item, Dim::angle);
    return qrg::units::parse_quantity(item + " mrad", Dim::angle);
}

std::vector<double> parse_angle_list(const std::vector<std::string>& items) {
    std::vector<double> out;
    out.reserve(items.size());
    for (const std::string& s : items) out.push_back(parse_angle_item(s));
    return out;
}

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw qrg::ValidationError("cannot open '" + p.string() + "' for writing");
    os << content;
    if (!os) throw qrg::ValidationError("short write to '" + p.string() + "'");
}

int csv_rows(const std::string& text) {
    int lines = 0;
    for (char c : text)
        if (c == '\n') ++lines;
    return lines > 0 ? lines - 1 : 0;  // minus header
}

// Shared manifest skeleton; subcommands append their own blocks.
struct OutputDir {
    fs::path dir;
    ordered_json manifest;
    std::vector<std::string> warnings;

    explicit OutputDir(const std::string& path, const std::string& subcommand,
                       const qrg::RunConfig& cfg)
        : dir(path) {
        fs::create_directories(dir);
        manifest["subcommand"] = subcommand;
        manifest["species"] = cfg.species.name;
        manifest["channels"] = 2 * cfg.solver.n_max + 1;
        manifest["absorber"] = cfg.solver.absorber;
        manifest["formula_mode"] = std::string(to_string(cfg.solver.mode));
        manifest["boundary"] =
            cfg.solver.boundary == qrg::InnerBoundary::hard_wall ? "hard_wall" : "wkb_decay";
        const qrg::RadialGrid& g = cfg.solver.grid ? *cfg.solver.grid : cfg.species.grid;
        manifest["grid"] = {{"z_start_A", g.z_start}, {"z_end_A", g.z_end},
                            {"points", g.n_points}};
        manifest["outputs"] = ordered_json::array();
        warnings = cfg.warnings;
        write_file(dir / "resolved_config.json", qrg::resolved_config_json(cfg));
    }

    void emit(const std::string& name, const std::string& content) {
        write_file(dir / name, content);
        manifest["outputs"].push_back({{"file", name}, {"rows", csv_rows(content)}});
    }

    void finish() {
        manifest["warnings"] = warnings;
        write_file(dir / "manifest.json", manifest.dump(2) + "\n");
    }
};

ordered_json kinematics_block(const qrg::BeamKinematics& kin) {
    return {{"t0_K", kin.t0},
            {"wavelength_A", kin.wavelength},
            {"k_i_invA", kin.k_i},
            {"k_perp_invA", kin.k_perp},
            {"energy_meV", kin.energy},
            {"grazing_angle_rad", kin.grazing_angle}};
}

qrg::BeamSpec make_beam(const qrg::Species& sp, std::optional<double> t0,
                        std::optional<double> wavelength, double angle) {
    qrg::BeamSpec beam;
    beam.atom_mass = sp.atom_mass;
    beam.cluster_count = sp.cluster_count;
    beam.source_temperature = t0;
    beam.wavelength = wavelength;
    beam.grazing_angle = angle;
    return beam;
}

ordered_json sweep_failures(const qrg::SweepResult& res, int& exit_status) {
    ordered_json failures = ordered_json::array();
    for (const qrg::SweepPoint& pt : res.points)
        if (!pt.ok) failures.push_back({{"theta_mrad", pt.angle * 1e3}, {"error", pt.error}});
    if (!failures.empty()) exit_status = 3;
    return failures;
}

ordered_json slope_block(const qrg::SweepResult& res) {
    if (!res.slope) return {{"note", res.slope_note}};
    return {{"b_A", res.slope->b},
            {"slope2b_A", res.slope->slope2b},
            {"residual", res.slope->residual},
            {"points_used", res.slope->points_used},
            {"k_max_used_invA", res.slope->k_max_used}};
}

std::string slopes_csv(const std::vector<std::pair<std::string, qrg::SweepResult>>& results) {
    std::ostringstream os;
    os << "species,b_A,slope2b_A,residual,points_used,k_max_invnm\n";
    for (const auto& [name, res] : results) {
        if (!res.slope) continue;
        os << name << ',' << qrg::format_number(res.slope->b) << ','
           << qrg::format_number(res.slope->slope2b) << ','
           << qrg::format_number(res.slope->residual) << ',' << res.slope->points_used << ','
           << qrg::format_number(res.slope->k_max_used * 10.0) << '\n';
    }
    return os.str();
}

// Step fine enough for the deepest local wavevector sqrt(2M D)/hbar; the
// fixed-wavelength comparison pushes z_end far beyond the species defaults,
// so the point count follows the box instead of being hardcoded.
int points_for(const qrg::Species& sp, double well_depth, double z_start, double z_end,
               double k_dz = 0.4) {
    double mass = sp.atom_mass * sp.cluster_count;
    double k_well = std::sqrt(2.0 * mass / qrg::units::hbar_sq * well_depth);
    return static_cast<int>(std::ceil(k_well * (z_end - z_start) / k_dz)) + 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"coupled-channel quantum reflection from a periodic strip grating"};
    app.require_subcommand(1);
    int exit_status = 0;

    // ---- dump-potential ----------------------------------------------------
    auto* dump_cmd = app.add_subcommand("dump-potential",
                                        "tabulate the vertical potential V0(z)");
    auto dump_opts = std::make_shared<CommonOpts>();
    auto dump_zmin = std::make_shared<std::string>();
    auto dump_zmax = std::make_shared<std::string>("50 A");
    auto dump_points = std::make_shared<int>(2000);
    add_common(dump_cmd, *dump_opts, false);
    dump_cmd->add_option("--z-min", *dump_zmin, "lower edge (default: grid start)");
    dump_cmd->add_option("--z-max", *dump_zmax, "upper edge (default: 50 A)");
    dump_cmd->add_option("--points", *dump_points, "sample count")->check(CLI::Range(2, 10'000'000));
    dump_cmd->callback([=]() {
        qrg::RunConfig cfg = load_config(*dump_opts);
        qrg::MorseCasimirPotential pot = qrg::make_potential(cfg.species);
        double zmin = dump_zmin->empty() ? cfg.species.grid.z_start
                                         : qrg::units::parse_quantity(*dump_zmin, Dim::length);
        double zmax = qrg::units::parse_quantity(*dump_zmax, Dim::length);
        OutputDir out(dump_opts->output, "dump-potential", cfg);
        std::ostringstream csv;
        qrg::write_potential_csv(csv, pot, zmin, zmax, *dump_points);
        out.emit("potential.csv", csv.str());
        out.manifest["potential"] = {{"z_bar_A", pot.z_bar},
                                     {"well_depth_meV", pot.well_depth},
                                     {"c4_meVA4", pot.c4}};
        out.finish();
        std::cout << cfg.species.name << ": D = " << pot.well_depth
                  << " meV, z_bar = " << pot.z_bar << " A\n";
    });

    // ---- rayleigh ----------------------------------------------------------
    auto* ray_cmd = app.add_subcommand("rayleigh", "emerging-beam threshold angles");
    auto ray_opts = std::make_shared<CommonOpts>();
    auto ray_lambda = std::make_shared<std::string>("0.179 nm");
    auto ray_orders = std::make_shared<int>(6);
    add_common(ray_cmd, *ray_opts, false);
    ray_cmd->add_option("--lambda", *ray_lambda, "de Broglie wavelength (default 0.179 nm)");
    ray_cmd->add_option("--orders", *ray_orders, "maximum |n|")->check(CLI::Range(1, 1000));
    ray_cmd->callback([=]() {
        qrg::RunConfig cfg = load_config(*ray_opts);
        double lambda = qrg::units::parse_quantity(*ray_lambda, Dim::length);
        qrg::RayleighTable table =
            qrg::rayleigh_angles(lambda, cfg.grating.period, *ray_orders);
        OutputDir out(ray_opts->output, "rayleigh", cfg);
        std::ostringstream csv;
        qrg::write_rayleigh_csv(csv, table);
        out.emit("rayleigh.csv", csv.str());
        out.manifest["wavelength_A"] = lambda;
        out.manifest["period_A"] = cfg.grating.period;
        out.finish();
        for (const auto& row : table.rows)
            std::cout << "theta_R(" << row.n << ") = " << row.theta_R * 1e3 << " mrad\n";
    });

    // ---- solve ---------------------------------------------------------------
    auto* solve_cmd = app.add_subcommand("solve", "one incidence, full channel table");
    auto solve_opts = std::make_shared<CommonOpts>();
    auto solve_angle = std::make_shared<std::string>();
    auto solve_t0 = std::make_shared<std::string>();
    auto solve_lambda = std::make_shared<std::string>();
    add_common(solve_cmd, *solve_opts);
    solve_cmd->add_option("--angle", *solve_angle, "grazing angle (bare number: mrad)");
    solve_cmd->add_option("--t0", *solve_t0, "source temperature, e.g. \"20 K\"");
    solve_cmd->add_option("--lambda", *solve_lambda, "de Broglie wavelength, e.g. \"0.179 nm\"");
    solve_cmd->callback([=]() {
        qrg::RunConfig cfg = load_config(*solve_opts);
        if (!solve_t0->empty() && !solve_lambda->empty())
            throw qrg::ValidationError("give --t0 or --lambda, not both");
        std::optional<double> t0 = cfg.beam_t0;
        std::optional<double> wl = cfg.beam_wavelength;
        if (!solve_t0->empty()) {
            t0 = qrg::units::parse_quantity(*solve_t0, Dim::temperature);
            wl.reset();
        }
        if (!solve_lambda->empty()) {
            wl = qrg::units::parse_quantity(*solve_lambda, Dim::length);
            t0.reset();
        }
        if (!t0 && !wl) throw qrg::ValidationError("no beam energy: give --t0 or --lambda");
        std::optional<double> angle =
            solve_angle->empty() ? cfg.beam_angle
                                 : std::optional<double>(parse_angle_item(*solve_angle));
        if (!angle) throw qrg::ValidationError("no incidence: give --angle");

        qrg::MorseCasimirPotential pot = qrg::make_potential(cfg.species);
        qrg::BeamSpec beam = make_beam(cfg.species, t0, wl, *angle);
        qrg::SolveOptions sopt;
        sopt.n_max = cfg.solver.n_max;
        sopt.mode = cfg.solver.mode;
        sopt.boundary = cfg.solver.boundary;
        sopt.max_condition = cfg.max_condition;
        const qrg::RadialGrid& grid = cfg.solver.grid ? *cfg.solver.grid : cfg.species.grid;
        qrg::ScatteringSolution sol = qrg::solve_scattering(
            pot, cfg.grating, beam, grid,
            cfg.solver.absorber ? &cfg.species.absorber : nullptr, sopt);

        OutputDir out(solve_opts->output, "solve", cfg);
        std::ostringstream csv;
        qrg::write_solution_csv(csv, sol);
        out.emit("solution.csv", csv.str());
        out.manifest["kinematics"] = kinematics_block(sol.kin);
        out.manifest["p_qr"] = sol.p_qr;
        out.manifest["open_channels"] = sol.open_count;
        out.manifest["error_estimate"] = sol.error_estimate;
        out.finish();
        std::cout << "P_QR = " << sol.p_qr << "  open = " << sol.open_count
                  << "  k_perp = " << sol.kin.k_perp * 10.0 << " 1/nm\n";
    });

    // ---- scan-kperp ----------------------------------------------------------
    auto* kperp_cmd = app.add_subcommand(
        "scan-kperp", "quantum reflection vs k_perp at fixed source temperature");
    auto kperp_opts = std::make_shared<CommonOpts>();
    auto kperp_t0 = std::make_shared<std::string>();
    auto kperp_angles = std::make_shared<std::vector<std::string>>();
    auto kperp_orders = std::make_shared<std::vector<int>>();
    add_common(kperp_cmd, *kperp_opts);
    kperp_cmd->add_option("--t0", *kperp_t0, "source temperature (default: preset scan)");
    kperp_cmd->add_option("--angles", *kperp_angles, "grazing angles, comma separated, mrad")
        ->delimiter(',');
    kperp_cmd->add_option("--orders", *kperp_orders, "efficiency columns (published labels)")
        ->delimiter(',');
    kperp_cmd->callback([=, &exit_status]() {
        qrg::RunConfig cfg = load_config(*kperp_opts);
        std::optional<double> t0 = cfg.sweep_t0;
        if (!kperp_t0->empty()) t0 = qrg::units::parse_quantity(*kperp_t0, Dim::temperature);
        std::vector<double> angles = !kperp_angles->empty() ? parse_angle_list(*kperp_angles)
                                                            : cfg.sweep_angles;
        qrg::SweepPlan plan = qrg::kperp_plan(cfg.species, t0, angles, cfg.solver);
        qrg::SweepResult res = qrg::run_sweep(plan, kperp_opts->threads);
        qrg::fit_threshold_slope(res);

        std::vector<int> orders =
            kperp_orders->empty() ? cfg.efficiency_orders : *kperp_orders;
        OutputDir out(kperp_opts->output, "scan-kperp", cfg);
        std::ostringstream sweep_csv, eff_csv, ray_csv;
        qrg::write_sweep_csv(sweep_csv, res);
        qrg::write_efficiency_csv(eff_csv, res, orders);
        qrg::write_rayleigh_csv(ray_csv, res.rayleigh);
        out.emit("sweep.csv", sweep_csv.str());
        out.emit("efficiency.csv", eff_csv.str());
        out.emit("rayleigh.csv", ray_csv.str());
        out.manifest["t0_K"] = *plan.t0;
        out.manifest["wavelength_A"] = res.wavelength;
        out.manifest["threshold_fit"] = slope_block(res);
        out.manifest["failures"] = sweep_failures(res, exit_status);
        out.finish();
        std::cout << "swept " << res.points.size() << " angles, wavelength = "
                  << res.wavelength / 10.0 << " nm\n";
    });

    // ---- scan-angle ------------------------------------------------------------
    auto* angle_cmd = app.add_subcommand(
        "scan-angle", "efficiencies vs grazing angle across the emerging-beam thresholds");
    auto angle_opts = std::make_shared<CommonOpts>();
    auto angle_t0 = std::make_shared<std::string>();
    auto angle_lambda = std::make_shared<std::string>();
    auto angle_angles = std::make_shared<std::vector<std::string>>();
    auto angle_orders = std::make_shared<std::vector<int>>();
    auto angle_count = std::make_shared<int>(25);
    auto angle_normalize = std::make_shared<bool>(false);
    add_common(angle_cmd, *angle_opts);
    angle_cmd->add_option("--t0", *angle_t0, "source temperature");
    angle_cmd->add_option("--lambda", *angle_lambda, "de Broglie wavelength");
    angle_cmd->add_option("--angles", *angle_angles, "explicit grazing angles, mrad")
        ->delimiter(',');
    angle_cmd->add_option("--count", *angle_count,
                          "points of the default grid spanning the first three thresholds")
        ->check(CLI::Range(2, 100000));
    angle_cmd->add_option("--orders", *angle_orders, "efficiency columns (published labels)")
        ->delimiter(',');
    angle_cmd->add_flag("--normalize", *angle_normalize, "peak-normalize efficiency columns");
    angle_cmd->callback([=, &exit_status]() {
        qrg::RunConfig cfg = load_config(*angle_opts);
        if (!angle_t0->empty() && !angle_lambda->empty())
            throw qrg::ValidationError("give --t0 or --lambda, not both");
        std::optional<double> t0 = cfg.sweep_t0;
        std::optional<double> wl = cfg.sweep_wavelength;
        if (!angle_t0->empty()) {
            t0 = qrg::units::parse_quantity(*angle_t0, Dim::temperature);
            wl.reset();
        }
        if (!angle_lambda->empty()) {
            wl = qrg::units::parse_quantity(*angle_lambda, Dim::length);
            t0.reset();
        }
        if (!t0 && !wl) throw qrg::ValidationError("no beam energy: give --t0 or --lambda");

        // The default grid brackets the first three thresholds at this
        // wavelength: 0.5 theta_R(-1) .. 1.2 theta_R(-3).
        std::vector<double> angles;
        if (!angle_angles->empty()) {
            angles = parse_angle_list(*angle_angles);
        } else {
            double lambda = wl ? *wl
                               : qrg::beam_kinematics(cfg.species.beam_at_t0(*t0, 1e-3)).wavelength;
            qrg::RayleighTable table = qrg::rayleigh_angles(lambda, cfg.grating.period, 3);
            if (table.rows.size() < 3)
                throw qrg::ValidationError("fewer than three thresholds at this wavelength; "
                                           "pass --angles explicitly");
            double lo = 0.5 * table.rows[0].theta_R;
            double hi = 1.2 * table.rows[2].theta_R;
            for (int i = 0; i < *angle_count; ++i)
                angles.push_back(lo + (hi - lo) * i / (*angle_count - 1));
        }

        qrg::SweepPlan plan = wl ? qrg::wavelength_plan(cfg.species, *wl, angles, cfg.solver)
                                 : qrg::kperp_plan(cfg.species, t0, angles, cfg.solver);
        qrg::SweepResult res = qrg::run_sweep(plan, angle_opts->threads);

        std::vector<int> orders =
            angle_orders->empty() ? cfg.efficiency_orders : *angle_orders;
        OutputDir out(angle_opts->output, "scan-angle", cfg);
        std::ostringstream sweep_csv, eff_csv, ray_csv;
        qrg::write_sweep_csv(sweep_csv, res);
        qrg::write_efficiency_csv(eff_csv, res, orders, *angle_normalize);
        qrg::write_rayleigh_csv(ray_csv, res.rayleigh);
        out.emit("sweep.csv", sweep_csv.str());
        out.emit("efficiency.csv", eff_csv.str());
        out.emit("rayleigh.csv", ray_csv.str());
        out.manifest["wavelength_A"] = res.wavelength;
        out.manifest["normalized"] = *angle_normalize;
        out.manifest["failures"] = sweep_failures(res, exit_status);
        out.finish();
        std::cout << "swept " << res.points.size() << " angles across "
                  << res.rayleigh.rows.size() << " thresholds\n";
    });

    // ---- scan-universal ---------------------------------------------------------
    auto* uni_cmd = app.add_subcommand(
        "scan-universal", "all species at one de Broglie wavelength, common angle grid");
    auto uni_opts = std::make_shared<CommonOpts>();
    auto uni_lambda = std::make_shared<std::string>("0.179 nm");
    auto uni_angles = std::make_shared<std::vector<std::string>>();
    auto uni_zend = std::make_shared<std::string>("5000 A");
    add_common(uni_cmd, *uni_opts);
    uni_cmd->add_option("--lambda", *uni_lambda, "shared wavelength (default 0.179 nm)");
    uni_cmd->add_option("--angles", *uni_angles, "grazing angles, mrad")->delimiter(',');
    uni_cmd->add_option("--z-end", *uni_zend,
                        "box edge; far tail matters at threshold (default 5000 A)");
    uni_cmd->callback([=, &exit_status]() {
        qrg::RunConfig cfg = load_config(*uni_opts);
        double lambda = qrg::units::parse_quantity(*uni_lambda, Dim::length);
        double z_end = qrg::units::parse_quantity(*uni_zend, Dim::length);
        // Default grid: one decade below the first threshold, where the
        // species comparison is meaningful.
        std::vector<double> angles =
            !uni_angles->empty()
                ? parse_angle_list(*uni_angles)
                : std::vector<double>{0.03e-3, 0.042e-3, 0.058e-3, 0.08e-3, 0.11e-3,
                                      0.155e-3, 0.215e-3, 0.30e-3};

        std::vector<std::string> names =
            uni_opts->species.empty() ? std::vector<std::string>{"He", "He2", "He3", "Ne"}
                                      : std::vector<std::string>{uni_opts->species};
        OutputDir out(uni_opts->output, "scan-universal", cfg);
        std::vector<std::pair<std::string, qrg::SweepResult>> results;
        for (const std::string& name : names) {
            qrg::Species sp = qrg::species_preset(name);
            qrg::MorseCasimirPotential pot = qrg::make_potential(sp);
            qrg::SolverSettings solver = cfg.solver;
            qrg::RadialGrid grid{sp.grid.z_start, z_end,
                                 uni_opts->grid_points
                                     ? uni_opts->grid_points
                                     : points_for(sp, pot.well_depth, sp.grid.z_start, z_end)};
            solver.grid = grid;
            qrg::SweepPlan plan = qrg::wavelength_plan(sp, lambda, angles, solver);
            qrg::SweepResult res = qrg::run_sweep(plan, uni_opts->threads);
            qrg::fit_threshold_slope(res);
            std::ostringstream csv;
            qrg::write_sweep_csv(csv, res);
            out.emit("universal_" + name + ".csv", csv.str());
            ordered_json block;
            block["species"] = name;
            block["grid_points"] = grid.n_points;
            block["threshold_fit"] = slope_block(res);
            block["failures"] = sweep_failures(res, exit_status);
            out.manifest["runs"].push_back(block);
            results.emplace_back(name, std::move(res));
        }
        out.emit("slopes.csv", slopes_csv(results));
        std::ostringstream ray_csv;
        qrg::write_rayleigh_csv(ray_csv, qrg::rayleigh_angles(lambda, cfg.grating.period, 6));
        out.emit("rayleigh.csv", ray_csv.str());
        out.manifest["wavelength_A"] = lambda;
        out.finish();
        std::cout << "swept " << names.size() << " species x " << angles.size()
                  << " angles at lambda = " << lambda / 10.0 << " nm\n";
    });

    // ---- calibrate -------------------------------------------------------------
    auto* cal_cmd = app.add_subcommand(
        "calibrate", "stage the absorber strengths against the one-channel baseline");
    auto cal_opts = std::make_shared<CommonOpts>();
    auto cal_t0 = std::make_shared<std::string>();
    auto cal_angle = std::make_shared<std::string>();
    auto cal_tol = std::make_shared<double>(0.05);
    add_common(cal_cmd, *cal_opts);
    cal_cmd->add_option("--t0", *cal_t0, "reference temperature (default: preset scan)");
    cal_cmd->add_option("--angle", *cal_angle, "reference angle (default: first preset angle)");
    cal_cmd->add_option("--tolerance", *cal_tol, "relative acceptance on the specular survival")
        ->check(CLI::PositiveNumber);
    cal_cmd->callback([=]() {
        qrg::RunConfig cfg = load_config(*cal_opts);
        qrg::CalibrationOptions copt;
        copt.t0 = cal_t0->empty() ? cfg.species.scan_t0
                                  : qrg::units::parse_quantity(*cal_t0, Dim::temperature);
        copt.angle = cal_angle->empty() ? cfg.species.scan_angles.front()
                                        : parse_angle_item(*cal_angle);
        copt.tolerance = *cal_tol;
        copt.solver = cfg.solver;
        qrg::CalibrationResult res = qrg::calibrate_absorber(cfg.species, copt);

        OutputDir out(cal_opts->output, "calibrate", cfg);
        std::ostringstream csv;
        csv << "class,amplitude_hartree,amplitude_meV,alpha\n";
        const char* cls_names[3] = {"specular", "first_order", "other"};
        for (int c = 0; c < 3; ++c)
            csv << cls_names[c] << ','
                << qrg::format_number(res.absorber.amplitude[c] / qrg::units::hartree_meV) << ','
                << qrg::format_number(res.absorber.amplitude[c]) << ','
                << qrg::format_number(res.absorber.alpha[c]) << '\n';
        out.emit("calibration.csv", csv.str());
        out.manifest["t0_K"] = copt.t0;
        out.manifest["angle_rad"] = copt.angle;
        out.manifest["tolerance"] = copt.tolerance;
        out.manifest["reference_survival"] = res.reference;
        out.manifest["stage1_residual"] = res.stage1_residual;
        out.manifest["stage2_residual"] = res.stage2_residual;
        out.finish();
        std::cout << "calibrated: reference = " << res.reference
                  << ", residuals = " << res.stage1_residual << " / " << res.stage2_residual
                  << "\n";
    });

    // ---- converge -------------------------------------------------------------
    auto* conv_cmd = app.add_subcommand(
        "converge", "grid, channel and box refinement at one reference incidence");
    auto conv_opts = std::make_shared<CommonOpts>();
    auto conv_t0 = std::make_shared<std::string>();
    auto conv_angle = std::make_shared<std::string>();
    auto conv_tol = std::make_shared<double>(1e-3);
    add_common(conv_cmd, *conv_opts);
    conv_cmd->add_option("--t0", *conv_t0, "reference temperature (default: preset scan)");
    conv_cmd->add_option("--angle", *conv_angle, "reference angle (default: first preset angle)");
    conv_cmd->add_option("--tolerance", *conv_tol, "relative change declared converged")
        ->check(CLI::PositiveNumber);
    conv_cmd->callback([=, &exit_status]() {
        qrg::RunConfig cfg = load_config(*conv_opts);
        qrg::ConvergenceOptions vopt;
        vopt.t0 = conv_t0->empty() ? cfg.species.scan_t0
                                   : qrg::units::parse_quantity(*conv_t0, Dim::temperature);
        vopt.angle = conv_angle->empty() ? cfg.species.scan_angles.front()
                                         : parse_angle_item(*conv_angle);
        vopt.rel_tol = *conv_tol;
        vopt.solver = cfg.solver;
        qrg::ConvergenceReport rep = qrg::convergence_study(cfg.species, vopt,
                                                            conv_opts->threads);

        OutputDir out(conv_opts->output, "converge", cfg);
        std::ostringstream csv;
        qrg::write_convergence_csv(csv, rep);
        out.emit("convergence.csv", csv.str());
        out.manifest["t0_K"] = vopt.t0;
        out.manifest["angle_rad"] = vopt.angle;
        out.manifest["points_converged"] = rep.points_converged;
        out.manifest["channels_converged"] = rep.channels_converged;
        out.manifest["z_end_converged"] = rep.z_end_converged;
        out.manifest["points_delta"] = rep.points_delta;
        out.manifest["channels_delta"] = rep.channels_delta;
        out.manifest["z_end_delta"] = rep.z_end_delta;
        ordered_json failures = ordered_json::array();
        for (const auto& row : rep.rows)
            if (!row.ok) failures.push_back({{"stage", row.stage}, {"error", row.error}});
        if (!failures.empty()) exit_status = 3;
        out.manifest["failures"] = failures;
        out.finish();
        std::cout << "points " << (rep.points_converged ? "converged" : "NOT converged")
                  << " (delta " << rep.points_delta << "), channels "
                  << (rep.channels_converged ? "converged" : "NOT converged") << " (delta "
                  << rep.channels_delta << "), z_end "
                  << (rep.z_end_converged ? "converged" : "NOT converged") << " (delta "
                  << rep.z_end_delta << ")\n";
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    } catch (const qrg::Error& e) {
        bool config_err = dynamic_cast<const qrg::ParseError*>(&e) ||
                          dynamic_cast<const qrg::ValidationError*>(&e) ||
                          dynamic_cast<const qrg::UnitError*>(&e) ||
                          dynamic_cast<const qrg::InvalidMode*>(&e) ||
                          dynamic_cast<const qrg::InconsistentSpec*>(&e) ||
                          dynamic_cast<const qrg::DomainError*>(&e);
        std::cerr << (config_err ? "config error: " : "numerical error: ") << e.what() << "\n";
        return config_err ? 2 : 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return exit_status;
}
